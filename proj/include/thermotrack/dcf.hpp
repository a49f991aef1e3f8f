#pragma once

#include "thermotrack/core.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

// Baseline multi-channel discriminative correlation filter.
//
// Correlation convention, used throughout:
//   (f * x)[n] = sum_m f[m] x[m + n]   <->   conj(F) . X
// so circularly shifting x by p shifts the response by p, and the ridge
// solution per frequency is F^d = X^d conj(Y) / (sum_d |X^d|^2 + lambda).

namespace thermotrack::dcf {

struct LabelMap {
  Eigen::MatrixXd values;
  Eigen::Index peak_row = 0;
  Eigen::Index peak_col = 0;
};

struct RegParams {
  double lambda = 1e-2;
};

struct FourierFilter {
  std::vector<Eigen::MatrixXcd> channels;

  Eigen::Index size() const { return channels.empty() ? 0 : channels.front().rows(); }
};

using Channels = std::span<const Eigen::MatrixXd>;

/// Periodic Gaussian peaked at grid cell floor(N/2) in both axes, summed over
/// the neighbouring periods and normalized to a peak of exactly 1.
LabelMap gaussian_label(Eigen::Index size, double sigma);

/// ||sum_d f^d * x^d - y||^2 + lambda sum_d ||f^d||^2 for spatial filters.
double dcf_objective(Channels filter, Channels samples, const Eigen::MatrixXd& label,
                     const RegParams& reg);

/// Closed-form joint ridge solution with one denominator shared by all channels.
FourierFilter solve_dcf(Channels samples, const Eigen::MatrixXd& label, const RegParams& reg);

/// sum_d f^d * x^d evaluated through the frequency domain.
Eigen::MatrixXd response(const FourierFilter& filter, Channels samples);

FourierFilter to_fourier(Channels spatial);
std::vector<Eigen::MatrixXd> to_spatial(const FourierFilter& filter);

}  // namespace thermotrack::dcf
