#include "thermotrack/eco.hpp"

#include <algorithm>
#include <cmath>

namespace thermotrack::eco {
namespace {

void require_memory(const SampleMemory& memory) {
  if (memory.empty()) throw Error(ErrorCategory::data, "objective needs at least one sample in memory");
}

Eigen::MatrixXcd residual(const ScoreFunction& s, const Eigen::MatrixXcd& label) {
  const int K = std::max(s.K(), static_cast<int>(label.rows() / 2));
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
  add_centered(r, s.coeffs);
  add_centered(r, -label);
  return r;
}

}  // namespace

double eco_objective_fourier(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                             const SampleMemory& memory, const SpatialRegularizer& reg,
                             double lambda) {
  require_memory(memory);
  const std::vector<double> alpha = memory.weights();
  double data = 0.0;
  for (std::size_t j = 0; j < memory.size(); ++j)
    data += alpha[j] * residual(score(filter, projection, memory.samples()[j]), memory.labels()[j]).squaredNorm();
  double penalty = 0.0;
  for (const auto& layer : filter)
    for (const auto& c : layer.channels) penalty += convolve(c, reg.coeffs).squaredNorm();
  return data + penalty + lambda * projection.frobenius_sq();
}

double eco_objective(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                     const SampleMemory& memory, const SpatialRegularizer& reg, double lambda) {
  require_memory(memory);
  int K = 0;
  for (const auto& layer : filter) K = std::max(K, layer.K);
  for (const auto& label : memory.labels()) K = std::max(K, static_cast<int>(label.rows() / 2));
  // |S - y|^2 has bandwidth 2K and |w f|^2 has 2K + 2; a grid above both
  // integrates them exactly.
  const int Q = std::max(128, 2 * K + 3);
  const double cell = 1.0 / (static_cast<double>(Q) * Q);

  const std::vector<double> alpha = memory.weights();
  double data = 0.0;
  for (std::size_t j = 0; j < memory.size(); ++j) {
    const Eigen::MatrixXd r =
        evaluate_on_grid(residual(score(filter, projection, memory.samples()[j]), memory.labels()[j]), Q);
    data += alpha[j] * r.squaredNorm() * cell;
  }

  Eigen::MatrixXd w(Q, Q);
  for (int m1 = 0; m1 < Q; ++m1)
    for (int m2 = 0; m2 < Q; ++m2) w(m1, m2) = reg(static_cast<double>(m1) / Q, static_cast<double>(m2) / Q);
  double penalty = 0.0;
  for (const auto& layer : filter)
    for (const auto& c : layer.channels)
      penalty += (w.array() * evaluate_on_grid(c, Q).array()).matrix().squaredNorm() * cell;

  return data + penalty + lambda * projection.frobenius_sq();
}

}  // namespace thermotrack::eco
