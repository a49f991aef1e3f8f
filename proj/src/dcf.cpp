#include "thermotrack/dcf.hpp"

#include "thermotrack/fft.hpp"

#include <cmath>

namespace thermotrack::dcf {
namespace {

void require_matching(Channels a, Channels b, const Eigen::MatrixXd* label, const char* what) {
  if (a.empty() || a.size() != b.size())
    throw Error(ErrorCategory::data, std::string(what) + ": channel count mismatch");
  const Eigen::Index r = a.front().rows(), c = a.front().cols();
  auto check = [&](const Eigen::MatrixXd& m) {
    if (m.rows() != r || m.cols() != c)
      throw Error(ErrorCategory::data, std::string(what) + ": size mismatch");
  };
  for (const auto& m : a) check(m);
  for (const auto& m : b) check(m);
  if (label) check(*label);
}

Eigen::MatrixXcd correlate_hat(const std::vector<Eigen::MatrixXcd>& f_hat, Channels samples) {
  Eigen::MatrixXcd r_hat = Eigen::MatrixXcd::Zero(samples.front().rows(), samples.front().cols());
  for (std::size_t d = 0; d < samples.size(); ++d)
    r_hat += (f_hat[d].conjugate().array() * fft2(samples[d]).array()).matrix();
  return r_hat;
}

}  // namespace

LabelMap gaussian_label(Eigen::Index size, double sigma) {
  if (size < 3) throw Error(ErrorCategory::data, "label size must be at least 3");
  if (!(sigma > 0.0)) throw Error(ErrorCategory::data, "label sigma must be positive");
  const Eigen::Index center = size / 2;
  const double n = static_cast<double>(size);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  auto wrapped = [&](double d) {
    // Pair the two neighbouring periods first so that g(d) == g(-d) bitwise.
    return std::exp(-d * d * inv) +
           (std::exp(-(d - n) * (d - n) * inv) + std::exp(-(d + n) * (d + n) * inv));
  };
  const double peak = wrapped(0.0);
  Eigen::VectorXd profile(size);
  for (Eigen::Index i = 0; i < size; ++i)
    profile(i) = wrapped(static_cast<double>(i - center)) / peak;

  LabelMap label;
  label.values = profile * profile.transpose();
  label.peak_row = center;
  label.peak_col = center;
  return label;
}

FourierFilter to_fourier(Channels spatial) {
  FourierFilter f;
  for (const auto& c : spatial) f.channels.push_back(fft2(c));
  return f;
}

std::vector<Eigen::MatrixXd> to_spatial(const FourierFilter& filter) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& c : filter.channels) out.push_back(ifft2(c).real());
  return out;
}

double dcf_objective(Channels filter, Channels samples, const Eigen::MatrixXd& label,
                     const RegParams& reg) {
  require_matching(filter, samples, &label, "dcf objective");
  if (!std::isfinite(reg.lambda) || reg.lambda < 0)
    throw Error(ErrorCategory::data, "dcf objective: lambda must be finite and non-negative");
  const FourierFilter f_hat = to_fourier(filter);
  const Eigen::MatrixXd r = ifft2(correlate_hat(f_hat.channels, samples)).real();
  double reg_term = 0.0;
  for (const auto& f : filter) reg_term += f.squaredNorm();
  return (r - label).squaredNorm() + reg.lambda * reg_term;
}

FourierFilter solve_dcf(Channels samples, const Eigen::MatrixXd& label, const RegParams& reg) {
  require_matching(samples, samples, &label, "solve_dcf");
  if (!std::isfinite(reg.lambda) || reg.lambda < 0)
    throw Error(ErrorCategory::data, "solve_dcf: lambda must be finite and non-negative");

  std::vector<Eigen::MatrixXcd> x_hat;
  Eigen::ArrayXXd denom = Eigen::ArrayXXd::Constant(label.rows(), label.cols(), reg.lambda);
  for (const auto& x : samples) {
    x_hat.push_back(fft2(x));
    denom += x_hat.back().array().abs2();
  }
  const double largest = denom.maxCoeff();
  if (!(denom > 1e-12 * largest).all() || !(largest > 0.0))
    throw Error(ErrorCategory::numeric,
                "solve_dcf: zero denominator (lambda = 0 and every channel vanishes at some "
                "frequency)");

  const Eigen::ArrayXXcd y_conj = fft2(label).conjugate().array();
  FourierFilter f;
  for (const auto& xh : x_hat) f.channels.push_back((xh.array() * y_conj / denom).matrix());
  return f;
}

Eigen::MatrixXd response(const FourierFilter& filter, Channels samples) {
  if (filter.channels.size() != samples.size() || samples.empty())
    throw Error(ErrorCategory::data, "response: channel count mismatch");
  for (std::size_t d = 0; d < samples.size(); ++d)
    if (filter.channels[d].rows() != samples[d].rows() ||
        filter.channels[d].cols() != samples[d].cols())
      throw Error(ErrorCategory::data, "response: size mismatch");
  const Eigen::MatrixXcd r = ifft2(correlate_hat(filter.channels, samples));
  const double scale = std::max(1.0, r.real().cwiseAbs().maxCoeff());
  if (r.imag().cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw Error(ErrorCategory::numeric,
                "response: filter is not conjugate-symmetric (complex response)");
  return r.real();
}

}  // namespace thermotrack::dcf
