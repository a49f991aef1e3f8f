#pragma once

// Evaluators for image-translation losses and the translation-quality metric,
// plus an analytic visible-to-thermal stand-in translator.

#include "thermotrack/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace thermotrack {

enum class Domain { visible, thermal };

const char* to_string(Domain domain);

/// A deterministic image-to-image map between tagged domains.
struct MappingFn {
  Domain from = Domain::visible;
  Domain to = Domain::thermal;
  std::function<Frame(const Frame&)> fn;

  /// Applies fn and checks that the output keeps the input's shape.
  Frame operator()(const Frame& image) const;

  static MappingFn identity(Domain from, Domain to);
  /// gain * v + offset per value, optionally clamped to [0, 255].
  static MappingFn affine(Domain from, Domain to, double gain, double offset, bool clamp = false);
};

using Batch = std::vector<Frame>;

/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// Mean over examples of the summed absolute difference.
double l1_loss(const Batch& y, const Batch& gx);

/// mean log D(x, y) + mean log(1 - D(x, G(x))), natural logarithm.
double cgan_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake);

double pix2pix_objective(double cgan, double l1, double lambda = 100.0);

/// mean |F(G(x)) - x|_1 + mean |G(F(y)) - y|_1 for G: X -> Y and F: Y -> X.
double cycle_loss(const MappingFn& g, const MappingFn& f, const Batch& x, const Batch& y);

struct TranslationDistance {
  std::vector<double> per_frame;  // root-mean-square difference per frame
  double mean = 0.0;
};

TranslationDistance translation_distance(const Batch& predicted, const Batch& reference);

/// 255 minus a (2r+1)^2 box blur of the luma, borders replicated. Output is
/// single channel.
Frame pseudo_tir(const Frame& frame, int radius = 2);

}  // namespace thermotrack
