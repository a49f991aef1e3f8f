#pragma once

#include <Eigen/Dense>

namespace thermotrack {

// Exact-size 2-D discrete Fourier transforms over Eigen matrices.
//
// fft2:  X[k1,k2] = sum_n x[n1,n2] exp(-2 pi i (k1 n1 / R + k2 n2 / C))
// ifft2: the inverse, including the 1/(R C) factor.
// Plans are cached per thread.

Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& x);
Eigen::MatrixXcd fft2(const Eigen::MatrixXd& x);
Eigen::MatrixXcd ifft2(const Eigen::MatrixXcd& x);

/// Unscaled inverse: sum_k X[k] exp(+2 pi i k n / N).
Eigen::MatrixXcd ifft2_unscaled(const Eigen::MatrixXcd& x);

/// Circular shift by (rows, cols), positive values move content down/right.
template <typename Derived>
typename Derived::PlainObject circshift(const Eigen::MatrixBase<Derived>& m, Eigen::Index dr,
                                        Eigen::Index dc) {
  typename Derived::PlainObject out(m.rows(), m.cols());
  const Eigen::Index R = m.rows(), C = m.cols();
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index c = 0; c < C; ++c)
      out(((r + dr) % R + R) % R, ((c + dc) % C + C) % C) = m(r, c);
  return out;
}

}  // namespace thermotrack
