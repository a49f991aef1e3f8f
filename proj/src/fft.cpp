#include "thermotrack/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace thermotrack {
namespace {

Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

// Applies a 1-D transform along every column, then every row.
template <bool Inverse>
Eigen::MatrixXcd transform2(const Eigen::MatrixXcd& x) {
  auto& fft = engine();
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  Eigen::MatrixXcd tmp(x.rows(), x.cols());
  Eigen::VectorXcd in, out;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    in = x.col(c);
    if constexpr (Inverse) fft.inv(out, in); else fft.fwd(out, in);
    tmp.col(c) = out;
  }
  Eigen::MatrixXcd result(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    in = tmp.row(r).transpose();
    if constexpr (Inverse) fft.inv(out, in); else fft.fwd(out, in);
    result.row(r) = out.transpose();
  }
  return result;
}

}  // namespace

Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& x) { return transform2<false>(x); }

Eigen::MatrixXcd fft2(const Eigen::MatrixXd& x) {
  return transform2<false>(x.cast<std::complex<double>>());
}

Eigen::MatrixXcd ifft2_unscaled(const Eigen::MatrixXcd& x) { return transform2<true>(x); }

Eigen::MatrixXcd ifft2(const Eigen::MatrixXcd& x) {
  return ifft2_unscaled(x) / static_cast<double>(x.size());
}

}  // namespace thermotrack
