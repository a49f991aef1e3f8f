#include "thermotrack/eco.hpp"

#include "thermotrack/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermotrack::eco {

using std::numbers::pi;

LayerCoeffs LayerCoeffs::zeros(int K, int channels) {
  LayerCoeffs out;
  out.K = K;
  out.channels.assign(channels, Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1));
  return out;
}

double cubic_spline_ft(double nu) {
  if (nu == 0.0) return 1.0;
  const double s = std::sin(pi * nu) / (pi * nu);
  const double s2 = s * s;
  return 3.0 * s2 * s2 / (2.0 + std::cos(2.0 * pi * nu));
}

int InterpKernel::max_bandwidth() const {
  return bandwidth.empty() ? 0 : *std::max_element(bandwidth.begin(), bandwidth.end());
}

InterpKernel InterpKernel::for_grids(const std::vector<int>& grid, const std::vector<int>& bandwidth) {
  if (grid.empty()) throw Error(ErrorCategory::data, "interpolation kernel needs at least one layer");
  if (!bandwidth.empty() && bandwidth.size() != grid.size())
    throw Error(ErrorCategory::data, "one bandwidth per layer expected");
  InterpKernel kernel;
  kernel.grid = grid;
  for (std::size_t d = 0; d < grid.size(); ++d) {
    if (grid[d] < 3) throw Error(ErrorCategory::data, "layer grid must be at least 3");
    const int K = bandwidth.empty() ? grid[d] / 2 : bandwidth[d];
    if (K < 0 || K > grid[d] / 2)
      throw Error(ErrorCategory::data, "bandwidth " + std::to_string(K) + " exceeds Nyquist for grid " +
                                           std::to_string(grid[d]));
    kernel.bandwidth.push_back(K);
  }
  return kernel;
}

InterpKernel InterpKernel::for_stack(const FeatureStack& stack) {
  std::vector<int> grid;
  for (const auto& layer : stack.layers) grid.push_back(static_cast<int>(layer.size()));
  return for_grids(grid);
}

LayerCoeffs interpolate(const FeatureChannelMap& layer, const InterpKernel& kernel, std::size_t d) {
  if (d >= kernel.layers()) throw Error(ErrorCategory::data, "layer index outside the kernel");
  const int N = kernel.grid[d];
  const int K = kernel.bandwidth[d];
  if (layer.size() != N)
    throw Error(ErrorCategory::data, "layer grid " + std::to_string(layer.size()) +
                                         " does not match kernel grid " + std::to_string(N));
  if (K > N / 2) throw Error(ErrorCategory::data, "bandwidth exceeds Nyquist");

  // Samples sit at t_n = t0 + n / N, so the series coefficient picks up exp(-2 pi i k t0).
  const double t0 = (1.0 - N) / (2.0 * N);
  Eigen::VectorXcd factor(2 * K + 1);
  for (int k = -K; k <= K; ++k)
    factor(k + K) = std::polar(kernel.coefficient(d, k) / N, -2.0 * pi * k * t0);

  LayerCoeffs out = LayerCoeffs::zeros(K, layer.channel_count());
  for (int c = 0; c < layer.channel_count(); ++c) {
    const Eigen::MatrixXcd X = fft2(layer.channels[c]);
    Eigen::MatrixXcd& block = out.channels[c];
    for (int k1 = -K; k1 <= K; ++k1)
      for (int k2 = -K; k2 <= K; ++k2)
        block(k1 + K, k2 + K) = X((k1 + N) % N, (k2 + N) % N) * factor(k1 + K) * factor(k2 + K);
    // Real input: enforce c(-k) = conj(c(k)) exactly.
    const Eigen::MatrixXcd flipped = block.reverse().conjugate();
    block = 0.5 * (block + flipped);
  }
  return out;
}

Sample interpolate(const FeatureStack& stack, const InterpKernel& kernel) {
  if (stack.layers.size() != kernel.layers())
    throw Error(ErrorCategory::data, "feature stack and kernel disagree on layer count");
  Sample out;
  for (std::size_t d = 0; d < stack.layers.size(); ++d) out.push_back(interpolate(stack.layers[d], kernel, d));
  return out;
}

double ProjectionMatrix::frobenius_sq() const {
  double s = 0.0;
  for (const auto& p : layers) s += p.squaredNorm();
  return s;
}

ProjectionMatrix ProjectionMatrix::identity(const Sample& sample) {
  ProjectionMatrix p;
  for (const auto& layer : sample)
    p.layers.push_back(Eigen::MatrixXd::Identity(layer.channel_count(), layer.channel_count()));
  return p;
}

Sample project(const Sample& sample, const ProjectionMatrix& projection) {
  if (sample.size() != projection.layers.size())
    throw Error(ErrorCategory::data, "projection and sample disagree on layer count");
  Sample out;
  for (std::size_t d = 0; d < sample.size(); ++d) {
    const Eigen::MatrixXd& P = projection.layers[d];
    const LayerCoeffs& x = sample[d];
    if (P.rows() != x.channel_count())
      throw Error(ErrorCategory::data, "projection rows do not match channel count of layer " +
                                           std::to_string(d));
    LayerCoeffs z = LayerCoeffs::zeros(x.K, static_cast<int>(P.cols()));
    for (Eigen::Index cp = 0; cp < P.cols(); ++cp)
      for (Eigen::Index c = 0; c < P.rows(); ++c)
        if (P(c, cp) != 0.0) z.channels[cp] += P(c, cp) * x.channels[c];
    out.push_back(std::move(z));
  }
  return out;
}

std::complex<double> evaluate_at(const Eigen::MatrixXcd& coeffs, double tv, double tu) {
  const int K = static_cast<int>(coeffs.rows() / 2);
  Eigen::VectorXcd ev(2 * K + 1), eu(2 * K + 1);
  for (int k = -K; k <= K; ++k) {
    ev(k + K) = std::polar(1.0, 2.0 * pi * k * tv);
    eu(k + K) = std::polar(1.0, 2.0 * pi * k * tu);
  }
  return ev.transpose() * coeffs * eu;
}

Eigen::MatrixXd evaluate_on_grid(const Eigen::MatrixXcd& coeffs, int n) {
  const int K = static_cast<int>(coeffs.rows() / 2);
  if (n < 2 * K + 1)
    throw Error(ErrorCategory::numeric, "grid of " + std::to_string(n) + " would alias bandwidth " +
                                            std::to_string(K));
  Eigen::MatrixXcd spectrum = Eigen::MatrixXcd::Zero(n, n);
  for (int k1 = -K; k1 <= K; ++k1)
    for (int k2 = -K; k2 <= K; ++k2) spectrum((k1 + n) % n, (k2 + n) % n) = coeffs(k1 + K, k2 + K);
  return ifft2_unscaled(spectrum).real();
}

double ScoreFunction::operator()(double tv, double tu) const { return evaluate_at(coeffs, tv, tu).real(); }

Eigen::MatrixXd ScoreFunction::sample_grid(int n) const { return evaluate_on_grid(coeffs, n); }

void add_centered(Eigen::MatrixXcd& target, const Eigen::MatrixXcd& block) {
  const Eigen::Index off = (target.rows() - block.rows()) / 2;
  if (off < 0) throw Error(ErrorCategory::data, "block larger than target");
  target.block(off, off, block.rows(), block.cols()) += block;
}

Eigen::MatrixXcd crop_centered(const Eigen::MatrixXcd& block, int K) {
  const Eigen::Index off = block.rows() / 2 - K;
  if (off < 0) throw Error(ErrorCategory::data, "crop larger than block");
  return block.block(off, off, 2 * K + 1, 2 * K + 1);
}

ScoreFunction score(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                    const Sample& sample) {
  const Sample z = project(sample, projection);
  if (filter.size() != z.size()) throw Error(ErrorCategory::data, "filter and sample disagree on layer count");
  int K = 0;
  for (const auto& layer : z) K = std::max(K, layer.K);
  ScoreFunction s{Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1)};
  for (std::size_t d = 0; d < z.size(); ++d) {
    if (filter[d].K != z[d].K || filter[d].channel_count() != z[d].channel_count())
      throw Error(ErrorCategory::data, "filter layer " + std::to_string(d) + " does not match projected sample");
    Eigen::MatrixXcd layer_sum = Eigen::MatrixXcd::Zero(z[d].side(), z[d].side());
    for (int c = 0; c < z[d].channel_count(); ++c)
      layer_sum.array() += filter[d].channels[c].array() * z[d].channels[c].array();
    add_centered(s.coeffs, layer_sum);
  }
  return s;
}

ScoreFunction score(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                    const FeatureStack& stack, const InterpKernel& kernel) {
  return score(filter, projection, interpolate(stack, kernel));
}

Eigen::MatrixXcd label_coeffs(int K, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCategory::data, "label sigma must be positive");
  Eigen::VectorXd profile(2 * K + 1);
  for (int k = -K; k <= K; ++k)
    profile(k + K) = std::sqrt(2.0 * pi) * sigma * std::exp(-2.0 * pi * pi * sigma * sigma * k * k);
  return (profile * profile.transpose()).cast<std::complex<double>>();
}

}  // namespace thermotrack::eco
