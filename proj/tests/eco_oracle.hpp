#pragma once

// Reference computations for the continuous filter, written directly from the
// definitions: functions are evaluated pointwise by direct Fourier sums,
// convolutions by an exact periodic quadrature, and normal equations are
// assembled as dense matrices.

#include "test_util.hpp"

#include "thermotrack/eco.hpp"

#include <numbers>
#include <random>

namespace thermotrack::testing {

struct EcoInstance {
  eco::SampleMemory memory{30, 0.003};
  eco::ContinuousFilter filter;
  eco::ProjectionMatrix projection;
  eco::SpatialRegularizer reg;
  double lambda = 0.0;
};

inline Eigen::MatrixXcd random_symmetric_block(std::mt19937_64& rng, int K, double scale = 1.0) {
  const int n = 2 * K + 1;
  Eigen::MatrixXcd c = random_matrix(rng, n, n).cast<std::complex<double>>() +
                       std::complex<double>(0, 1) * random_matrix(rng, n, n).cast<std::complex<double>>();
  return scale * 0.5 * (c + c.reverse().conjugate());
}

/// Random instance with N x N layers at bandwidth K. channels[d] is the input
/// dimension of layer d; out_channels[d] its projected dimension.
inline EcoInstance random_eco_instance(std::mt19937_64& rng, int N, int K, int samples,
                                       const std::vector<int>& channels, const std::vector<int>& out_channels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EcoInstance inst;
  inst.memory = eco::SampleMemory(30, 0.05 + 0.3 * u(rng));
  const eco::InterpKernel kernel =
      eco::InterpKernel::for_grids(std::vector<int>(channels.size(), N), std::vector<int>(channels.size(), K));
  for (int j = 0; j < samples; ++j) {
    FeatureStack stack;
    for (std::size_t d = 0; d < channels.size(); ++d) {
      FeatureChannelMap layer;
      layer.layer_id = static_cast<int>(d);
      for (int c = 0; c < channels[d]; ++c) layer.channels.push_back(random_matrix(rng, N, N));
      stack.layers.push_back(layer);
    }
    Eigen::MatrixXcd label = eco::label_coeffs(K, 0.05 + 0.15 * u(rng)) + random_symmetric_block(rng, K, 0.01);
    inst.memory.insert(eco::interpolate(stack, kernel), label);
  }
  for (std::size_t d = 0; d < channels.size(); ++d) {
    inst.projection.layers.push_back(random_matrix(rng, channels[d], out_channels[d]));
    eco::LayerCoeffs f;
    f.K = K;
    for (int c = 0; c < out_channels[d]; ++c) f.channels.push_back(random_symmetric_block(rng, K, 0.3));
    inst.filter.push_back(f);
  }
  inst.reg = eco::spatial_reg(0.01 + 0.1 * u(rng), u(rng), 0.05 + 0.4 * u(rng), 0.05 + 0.4 * u(rng));
  inst.lambda = 0.1 * u(rng);
  return inst;
}

/// Real values of a centred coefficient block on the Q x Q grid t = n / Q, by direct sums.
inline Eigen::MatrixXd direct_values(const Eigen::MatrixXcd& coeffs, int Q) {
  const int K = static_cast<int>(coeffs.rows() / 2);
  Eigen::MatrixXcd E(Q, 2 * K + 1);
  for (int n = 0; n < Q; ++n)
    for (int k = -K; k <= K; ++k) E(n, k + K) = std::polar(1.0, 2.0 * std::numbers::pi * k * n / Q);
  return (E * coeffs * E.transpose()).real();
}

inline double closed_form_w(const eco::SpatialRegularizer& w, double tv, double tu) {
  const double pi = std::numbers::pi;
  const double su = std::sin(pi * tu) / std::sin(pi * w.r_u);
  const double sv = std::sin(pi * tv) / std::sin(pi * w.r_v);
  return w.base + w.growth * su * su + w.growth * sv * sv;
}

/// The loss from its spatial definition. Scores are continuous convolutions
/// evaluated by a 16-point periodic quadrature per axis (exact while 2K < 16);
/// the squared residual and the weighted filter are integrated on a 128-point
/// grid per axis.
inline double spatial_objective_oracle(const EcoInstance& inst) {
  constexpr int Q = 128, Qc = 16, stride = Q / Qc;
  const auto& memory = inst.memory;
  double total_u = 0.0;
  for (double u : memory.raw_weights()) total_u += u;

  double data = 0.0;
  for (std::size_t j = 0; j < memory.size(); ++j) {
    const double alpha = memory.raw_weights()[j] / total_u;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(Q, Q);
    for (std::size_t d = 0; d < inst.filter.size(); ++d) {
      const eco::LayerCoeffs& x = memory.samples()[j][d];
      const Eigen::MatrixXd& P = inst.projection.layers[d];
      std::vector<Eigen::MatrixXd> xv;
      for (const auto& c : x.channels) xv.push_back(direct_values(c, Q));
      for (Eigen::Index cp = 0; cp < P.cols(); ++cp) {
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(Q, Q);
        for (Eigen::Index c = 0; c < P.rows(); ++c) z += P(c, cp) * xv[c];
        const Eigen::MatrixXd f = direct_values(inst.filter[d].channels[cp], Q);
        for (int m1 = 0; m1 < Qc; ++m1)
          for (int m2 = 0; m2 < Qc; ++m2) {
            const double fs = f(m1 * stride, m2 * stride) / (Qc * Qc);
            for (int n1 = 0; n1 < Q; ++n1)
              for (int n2 = 0; n2 < Q; ++n2)
                S(n1, n2) += fs * z((n1 - m1 * stride + Q) % Q, (n2 - m2 * stride + Q) % Q);
          }
      }
    }
    const Eigen::MatrixXd y = direct_values(memory.labels()[j], Q);
    data += alpha * (S - y).squaredNorm() / (Q * Q);
  }

  double penalty = 0.0;
  for (const auto& layer : inst.filter)
    for (const auto& c : layer.channels) {
      const Eigen::MatrixXd f = direct_values(c, Q);
      for (int n1 = 0; n1 < Q; ++n1)
        for (int n2 = 0; n2 < Q; ++n2) {
          const double v = closed_form_w(inst.reg, double(n1) / Q, double(n2) / Q) * f(n1, n2);
          penalty += v * v / (Q * Q);
        }
    }
  return data + penalty + inst.lambda * inst.projection.frobenius_sq();
}

/// Dense normal equations of the filter-only problem. Unknowns are the
/// coefficients of every (layer, output channel) block, column-major.
struct DenseNormal {
  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // (layer, channel)
  std::vector<int> bandwidth;
};

inline DenseNormal dense_normal_equations(const eco::SampleMemory& memory, const eco::ProjectionMatrix& P,
                                          const eco::SpatialRegularizer& reg) {
  DenseNormal out;
  const eco::Sample z0 = eco::project(memory.samples().front(), P);
  int Kmax = 0;
  std::vector<Eigen::Index> offset;
  Eigen::Index n = 0;
  for (std::size_t d = 0; d < z0.size(); ++d) {
    Kmax = std::max(Kmax, z0[d].K);
    for (int c = 0; c < z0[d].channel_count(); ++c) {
      out.blocks.emplace_back(d, c);
      out.bandwidth.push_back(z0[d].K);
      offset.push_back(n);
      n += z0[d].side() * z0[d].side();
    }
  }
  const int side = 2 * Kmax + 1;
  out.A = Eigen::MatrixXcd::Zero(n, n);
  out.b = Eigen::VectorXcd::Zero(n);

  double total_u = 0.0;
  for (double u : memory.raw_weights()) total_u += u;
  for (std::size_t j = 0; j < memory.size(); ++j) {
    const double alpha = memory.raw_weights()[j] / total_u;
    const eco::Sample z = eco::project(memory.samples()[j], P);
    // Score coefficients as a linear map of the unknowns.
    Eigen::MatrixXcd Aj = Eigen::MatrixXcd::Zero(side * side, n);
    for (std::size_t bi = 0; bi < out.blocks.size(); ++bi) {
      const auto [d, c] = out.blocks[bi];
      const int K = out.bandwidth[bi];
      for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
          const Eigen::Index row = (k2 + Kmax) * side + (k1 + Kmax);
          const Eigen::Index col = offset[bi] + (k2 + K) * (2 * K + 1) + (k1 + K);
          Aj(row, col) = z[d].channels[c](k1 + K, k2 + K);
        }
    }
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(side, side);
    const Eigen::MatrixXcd& label = memory.labels()[j];
    const int Kl = static_cast<int>(label.rows() / 2);
    for (int k1 = -std::min(Kl, Kmax); k1 <= std::min(Kl, Kmax); ++k1)
      for (int k2 = -std::min(Kl, Kmax); k2 <= std::min(Kl, Kmax); ++k2) y(k1 + Kmax, k2 + Kmax) = label(k1 + Kl, k2 + Kl);
    const Eigen::VectorXcd yv = Eigen::Map<const Eigen::VectorXcd>(y.data(), y.size());
    out.A += alpha * Aj.adjoint() * Aj;
    out.b += alpha * Aj.adjoint() * yv;
  }
  // Convolution with w as a dense map onto the widened support.
  for (std::size_t bi = 0; bi < out.blocks.size(); ++bi) {
    const int K = out.bandwidth[bi];
    const int inner = 2 * K + 1, wide = 2 * K + 3;
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(wide * wide, inner * inner);
    for (int k1 = -K; k1 <= K; ++k1)
      for (int k2 = -K; k2 <= K; ++k2)
        for (int m1 = -1; m1 <= 1; ++m1)
          for (int m2 = -1; m2 <= 1; ++m2)
            W((k2 + m2 + K + 1) * wide + (k1 + m1 + K + 1), (k2 + K) * inner + (k1 + K)) += reg.coeffs(m1 + 1, m2 + 1);
    out.A.block(offset[bi], offset[bi], inner * inner, inner * inner) += W.adjoint() * W;
  }
  return out;
}

inline Eigen::VectorXcd flatten(const eco::ContinuousFilter& f) {
  std::vector<std::complex<double>> v;
  for (const auto& layer : f)
    for (const auto& c : layer.channels) v.insert(v.end(), c.data(), c.data() + c.size());
  return Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace thermotrack::testing
