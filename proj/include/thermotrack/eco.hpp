#pragma once

#include "thermotrack/core.hpp"
#include "thermotrack/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

// Continuous-domain correlation filter.
//
// Each feature layer lives on a periodic continuous domain with period 1 in
// both axes; t = 0 is the region centre and the grid sample n of an N-cell
// layer sits at t_n = (n + 1/2) / N - 1/2. Every function on that domain is
// held as a truncated Fourier series: a (2K+1) x (2K+1) block whose entry
// (K + k1, K + k2) is the coefficient of exp(2 pi i (k1 t_v + k2 t_u)), with
// rows (k1, t_v) vertical and columns (k2, t_u) horizontal.

namespace thermotrack::eco {

/// Fourier coefficient blocks of one layer, one block per channel.
struct LayerCoeffs {
  int K = 0;
  std::vector<Eigen::MatrixXcd> channels;

  int side() const { return 2 * K + 1; }
  int channel_count() const { return static_cast<int>(channels.size()); }
  std::complex<double> at(int c, int k1, int k2) const { return channels[c](K + k1, K + k2); }

  static LayerCoeffs zeros(int K, int channels);
};

/// A sample (or a filter): one LayerCoeffs per feature layer.
using Sample = std::vector<LayerCoeffs>;
using ContinuousFilter = std::vector<LayerCoeffs>;

/// Fourier transform of the interpolating (cardinal) cubic B-spline at
/// normalized frequency nu: 3 sinc(nu)^4 / (2 + cos(2 pi nu)).
double cubic_spline_ft(double nu);

struct InterpKernel {
  std::vector<int> grid;       // N_d
  std::vector<int> bandwidth;  // K_d

  std::size_t layers() const { return grid.size(); }
  int max_bandwidth() const;
  double coefficient(std::size_t d, int k) const {
    return cubic_spline_ft(static_cast<double>(k) / grid[d]);
  }

  /// K_d = floor(N_d / 2) unless an explicit bandwidth is given.
  static InterpKernel for_grids(const std::vector<int>& grid, const std::vector<int>& bandwidth = {});
  static InterpKernel for_stack(const FeatureStack& stack);
};

/// Fourier coefficients of the spline-interpolated layer, truncated to |k| <= K.
LayerCoeffs interpolate(const FeatureChannelMap& layer, const InterpKernel& kernel, std::size_t d);
Sample interpolate(const FeatureStack& stack, const InterpKernel& kernel);

/// Per-layer real channel projections, C_d x C'_d.
struct ProjectionMatrix {
  std::vector<Eigen::MatrixXd> layers;

  double frobenius_sq() const;
  static ProjectionMatrix identity(const Sample& sample);
};

/// z^{c'} = sum_c P(c, c') x^c, per layer.
Sample project(const Sample& sample, const ProjectionMatrix& projection);

/// Periodic band-limited function given by a centred coefficient block.
struct ScoreFunction {
  Eigen::MatrixXcd coeffs;

  int K() const { return static_cast<int>(coeffs.rows() / 2); }
  /// Real value at (t_v, t_u), both in period units.
  double operator()(double tv, double tu) const;
  /// Values at t = (m1 / n, m2 / n), m in [0, n). Requires n >= 2K + 1.
  Eigen::MatrixXd sample_grid(int n) const;
};

/// Values of a centred coefficient block on the n x n grid t = m / n.
Eigen::MatrixXd evaluate_on_grid(const Eigen::MatrixXcd& coeffs, int n);
std::complex<double> evaluate_at(const Eigen::MatrixXcd& coeffs, double tv, double tu);

/// Adds `block` into the centre of `target` (both centred, target not smaller).
void add_centered(Eigen::MatrixXcd& target, const Eigen::MatrixXcd& block);
Eigen::MatrixXcd crop_centered(const Eigen::MatrixXcd& block, int K);

/// S = sum_d f^d * P J_d{x^d} for an unprojected sample.
ScoreFunction score(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                    const Sample& sample);
ScoreFunction score(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                    const FeatureStack& stack, const InterpKernel& kernel);

/// Coefficients of the periodized Gaussian exp(-|t|^2 / (2 sigma^2)) centred
/// at t = 0, truncated to |k| <= K. sigma is in period units.
Eigen::MatrixXcd label_coeffs(int K, double sigma);

/// w(t) = base + growth sin^2(pi t_u) / sin^2(pi r_u) + growth sin^2(pi t_v) / sin^2(pi r_v).
/// Near the centre this is the quadratic bowl base + growth (t_u/r_u)^2 + growth (t_v/r_v)^2;
/// the sine form keeps it periodic with a three-term Fourier series per axis.
struct SpatialRegularizer {
  double base = 1e-3;
  double growth = 0.0;
  double r_u = 0.25;
  double r_v = 0.25;
  Eigen::MatrixXcd coeffs;  // 3 x 3, centred

  double operator()(double tv, double tu) const;
};

SpatialRegularizer spatial_reg(double base, double growth, double r_u, double r_v);

/// Growth chosen so that w at the nearest patch edge is `edge_ratio` times the base.
SpatialRegularizer spatial_reg_for_target(double base, double r_u, double r_v,
                                          double edge_ratio = 10.0);

/// Full 2-D convolution of two centred blocks.
Eigen::MatrixXcd convolve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

class SampleMemory {
 public:
  SampleMemory(int capacity = 30, double gamma = 0.003);

  /// Decays existing weights by (1 - gamma), appends the sample with raw
  /// weight 1 and, above capacity, merges the closest pair.
  void insert(Sample sample, Eigen::MatrixXcd label);

  /// alpha_j = u_j / sum u, oldest first.
  std::vector<double> weights() const;

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int capacity() const { return capacity_; }
  double gamma() const { return gamma_; }

  const std::vector<Sample>& samples() const { return samples_; }
  const std::vector<Eigen::MatrixXcd>& labels() const { return labels_; }
  const std::vector<double>& raw_weights() const { return raw_; }

  /// Rebuilds a memory from stored state (snapshot loading).
  static SampleMemory restore(int capacity, double gamma, std::vector<Sample> samples,
                              std::vector<Eigen::MatrixXcd> labels, std::vector<double> raw);

 private:
  void merge_closest();

  int capacity_;
  double gamma_;
  std::vector<Sample> samples_;
  std::vector<Eigen::MatrixXcd> labels_;
  std::vector<double> raw_;
};

double sample_distance_sq(const Sample& a, const Sample& b);

/// Loss evaluated in the spatial domain: the squared residuals and the
/// weighted filter are sampled on a quadrature grid fine enough to integrate
/// them exactly.
double eco_objective(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                     const SampleMemory& memory, const SpatialRegularizer& reg, double lambda);

/// The same loss from Fourier coefficients; the regularizer is a frequency-domain convolution.
double eco_objective_fourier(const ContinuousFilter& filter, const ProjectionMatrix& projection,
                             const SampleMemory& memory, const SpatialRegularizer& reg,
                             double lambda);

struct CgOptions {
  int max_iterations = 50;
  double tolerance = 1e-6;
  bool preconditioned = true;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Conjugate gradients on the normal equations of the Fourier loss for fixed P.
/// Stops once ||b - A f|| <= tol ||b||.
ContinuousFilter solve_filter_cg(const SampleMemory& memory, const ProjectionMatrix& projection,
                                 const SpatialRegularizer& reg, const ContinuousFilter& initial,
                                 const CgOptions& options, CgReport* report = nullptr);

ContinuousFilter zero_filter(const ProjectionMatrix& projection, const Sample& like);

struct GnOptions {
  int outer_iterations = 5;
  int cg_iterations = 50;
  double tolerance = 1e-6;
  double lambda = 1e-7;
  bool freeze_projection = true;
  /// Output dimension per layer; empty or 0 keeps the input dimension.
  std::vector<int> output_dims;
  std::uint64_t seed = 1;
};

struct GnResult {
  ContinuousFilter filter;
  ProjectionMatrix projection;
  /// Objective after the initial filter solve, then after every outer iteration.
  std::vector<double> objective_trace;
  bool reinitialized = false;
};

/// Principal directions of each layer's channel covariance, largest first.
ProjectionMatrix pca_projection(const Sample& sample, const std::vector<int>& output_dims);

/// Joint learning of filter and projection by Gauss-Newton. With a frozen
/// projection this is one solve_filter_cg call from zero with the same budget.
GnResult learn_joint_gn(const SampleMemory& memory, const SpatialRegularizer& reg,
                        const GnOptions& options);

struct ModelSnapshot {
  ContinuousFilter filter;
  ProjectionMatrix projection;
  SampleMemory memory;
};

/// Little-endian versioned binary dump.
void write_snapshot(std::ostream& out, const ModelSnapshot& snapshot);
ModelSnapshot read_snapshot(std::istream& in);

}  // namespace thermotrack::eco
