#pragma once

// Test-only helpers: seeded generators and slow reference transforms that do
// not share code with the library.

#include "thermotrack/core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace thermotrack::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

/// Direct O(N^4) DFT with the same sign convention as the library.
inline Eigen::MatrixXcd naive_dft2(const Eigen::MatrixXd& x) {
  const Eigen::Index R = x.rows(), C = x.cols();
  Eigen::MatrixXcd out(R, C);
  for (Eigen::Index k1 = 0; k1 < R; ++k1) {
    for (Eigen::Index k2 = 0; k2 < C; ++k2) {
      std::complex<double> acc = 0.0;
      for (Eigen::Index n1 = 0; n1 < R; ++n1)
        for (Eigen::Index n2 = 0; n2 < C; ++n2) {
          const double phase = -2.0 * std::numbers::pi *
                               (static_cast<double>(k1 * n1) / R + static_cast<double>(k2 * n2) / C);
          acc += x(n1, n2) * std::polar(1.0, phase);
        }
      out(k1, k2) = acc;
    }
  }
  return out;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

template <typename A, typename B>
double rel_err_norm(const A& a, const B& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline Frame random_frame(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 255.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Frame f(w, h, 1);
  for (auto& p : f.pixels) p = std::round(dist(rng));
  return f;
}

}  // namespace thermotrack::testing
