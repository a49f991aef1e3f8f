#include "thermotrack/translate.hpp"

#include <algorithm>
#include <cmath>

namespace thermotrack {
namespace {

void require_pairs(const Batch& a, const Batch& b, const char* what) {
  if (a.empty()) throw Error(ErrorCategory::data, std::string(what) + ": empty batch");
  if (a.size() != b.size())
    throw Error(ErrorCategory::data, std::string(what) + ": " + std::to_string(a.size()) + " vs " +
                                         std::to_string(b.size()) + " images");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a[i].same_shape(b[i]))
      throw Error(ErrorCategory::data, std::string(what) + ": image " + std::to_string(i) + " differs in shape");
}

double abs_sum(const Frame& a, const Frame& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
  return s;
}

double mean_log(const std::vector<double>& p, bool complement) {
  if (p.empty()) throw Error(ErrorCategory::data, "discriminator batch is empty");
  double s = 0.0;
  for (double v : p) {
    const double c = std::clamp(v, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    s += std::log(complement ? 1.0 - c : c);
  }
  return s / p.size();
}

// Normalized box filter along one axis with replicated borders.
Eigen::ArrayXXd box_rows(const Eigen::ArrayXXd& in, int r) {
  const Eigen::Index R = in.rows(), C = in.cols();
  Eigen::ArrayXXd out(R, C);
  for (Eigen::Index y = 0; y < R; ++y) {
    for (Eigen::Index x = 0; x < C; ++x) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k) s += in(y, std::clamp<Eigen::Index>(x + k, 0, C - 1));
      out(y, x) = s / (2 * r + 1);
    }
  }
  return out;
}

}  // namespace

const char* to_string(Domain domain) { return domain == Domain::visible ? "visible" : "thermal"; }

Frame MappingFn::operator()(const Frame& image) const {
  if (!fn) throw Error(ErrorCategory::usage, "mapping has no function");
  Frame out = fn(image);
  if (!out.same_shape(image)) throw Error(ErrorCategory::data, "mapping changed the image shape");
  return out;
}

MappingFn MappingFn::identity(Domain from, Domain to) {
  return {from, to, [](const Frame& f) { return f; }};
}

MappingFn MappingFn::affine(Domain from, Domain to, double gain, double offset, bool clamp) {
  return {from, to, [=](const Frame& f) {
            Frame out = f;
            for (double& v : out.pixels) {
              v = gain * v + offset;
              if (clamp) v = std::clamp(v, 0.0, 255.0);
            }
            return out;
          }};
}

double l1_loss(const Batch& y, const Batch& gx) {
  require_pairs(y, gx, "L1 loss");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += abs_sum(y[i], gx[i]);
  return s / y.size();
}

double cgan_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
  return mean_log(d_real, false) + mean_log(d_fake, true);
}

double pix2pix_objective(double cgan, double l1, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCategory::config, "L1 weight must be non-negative");
  return cgan + lambda * l1;
}

double cycle_loss(const MappingFn& g, const MappingFn& f, const Batch& x, const Batch& y) {
  if (g.to != f.from || f.to != g.from || g.from == g.to)
    throw Error(ErrorCategory::config, std::string("cycle needs G: X -> Y and F: Y -> X, got G: ") +
                                           to_string(g.from) + " -> " + to_string(g.to) + ", F: " +
                                           to_string(f.from) + " -> " + to_string(f.to));
  if (x.empty() || y.empty()) throw Error(ErrorCategory::data, "cycle loss: empty batch");
  double forward = 0.0, backward = 0.0;
  for (const Frame& image : x) forward += abs_sum(f(g(image)), image);
  for (const Frame& image : y) backward += abs_sum(g(f(image)), image);
  return forward / x.size() + backward / y.size();
}

TranslationDistance translation_distance(const Batch& predicted, const Batch& reference) {
  require_pairs(predicted, reference, "translation distance");
  TranslationDistance d;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    double s = 0.0;
    const auto& a = predicted[i].pixels;
    const auto& b = reference[i].pixels;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    d.per_frame.push_back(a.empty() ? 0.0 : std::sqrt(s / a.size()));
  }
  for (double v : d.per_frame) d.mean += v;
  d.mean /= d.per_frame.size();
  return d;
}

Frame pseudo_tir(const Frame& frame, int radius) {
  if (radius < 0) throw Error(ErrorCategory::config, "blur radius must be non-negative");
  if (frame.channels != 1 && frame.channels != 3)
    throw Error(ErrorCategory::data, "pseudo-thermal input must have 1 or 3 channels");
  const Eigen::ArrayXXd luma = frame.luma();
  const Eigen::ArrayXXd blurred = box_rows(box_rows(luma, radius).transpose().eval(), radius).transpose();
  return Frame::from_array(255.0 - blurred);
}

}  // namespace thermotrack
