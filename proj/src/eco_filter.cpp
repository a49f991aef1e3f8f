#include "thermotrack/eco.hpp"

#include <cmath>
#include <numbers>

namespace thermotrack::eco {

using std::numbers::pi;

SpatialRegularizer spatial_reg(double base, double growth, double r_u, double r_v) {
  if (!(base > 0.0)) throw Error(ErrorCategory::config, "regularizer base must be positive");
  if (!(growth >= 0.0)) throw Error(ErrorCategory::config, "regularizer growth must be non-negative");
  if (!(r_u > 0.0 && r_u < 0.5 && r_v > 0.0 && r_v < 0.5))
    throw Error(ErrorCategory::config, "target half-sizes must lie in (0, 0.5) of the period");
  SpatialRegularizer w;
  w.base = base;
  w.growth = growth;
  w.r_u = r_u;
  w.r_v = r_v;
  // sin^2(pi t) = 1/2 - exp(2 pi i t) / 4 - exp(-2 pi i t) / 4
  const double gu = growth / std::pow(std::sin(pi * r_u), 2);
  const double gv = growth / std::pow(std::sin(pi * r_v), 2);
  w.coeffs = Eigen::MatrixXcd::Zero(3, 3);
  w.coeffs(1, 1) = base + 0.5 * gu + 0.5 * gv;
  w.coeffs(1, 0) = w.coeffs(1, 2) = -0.25 * gu;
  w.coeffs(0, 1) = w.coeffs(2, 1) = -0.25 * gv;
  return w;
}

SpatialRegularizer spatial_reg_for_target(double base, double r_u, double r_v, double edge_ratio) {
  if (!(edge_ratio >= 1.0)) throw Error(ErrorCategory::config, "edge ratio must be at least 1");
  const double r = std::max(r_u, r_v);
  return spatial_reg(base, (edge_ratio - 1.0) * base * std::pow(std::sin(pi * r), 2), r_u, r_v);
}

double SpatialRegularizer::operator()(double tv, double tu) const {
  return base + growth * std::pow(std::sin(pi * tu) / std::sin(pi * r_u), 2) +
         growth * std::pow(std::sin(pi * tv) / std::sin(pi * r_v), 2);
}

Eigen::MatrixXcd convolve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Eigen::Index n = a.rows() + b.rows() - 1, m = a.cols() + b.cols() - 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, m);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      if (b(i, j) != 0.0) out.block(i, j, a.rows(), a.cols()) += b(i, j) * a;
  return out;
}

ContinuousFilter zero_filter(const ProjectionMatrix& projection, const Sample& like) {
  if (projection.layers.size() != like.size())
    throw Error(ErrorCategory::data, "projection and sample disagree on layer count");
  ContinuousFilter f;
  for (std::size_t d = 0; d < like.size(); ++d)
    f.push_back(LayerCoeffs::zeros(like[d].K, static_cast<int>(projection.layers[d].cols())));
  return f;
}

}  // namespace thermotrack::eco
