#include "doctest.h"
#include "test_util.hpp"

#include "thermotrack/dcf.hpp"
#include "thermotrack/fft.hpp"

#include <random>

using namespace thermotrack;
using namespace thermotrack::dcf;
using thermotrack::testing::naive_dft2;
using thermotrack::testing::random_matrix;

namespace {

std::vector<Eigen::MatrixXd> random_channels(std::mt19937_64& rng, int d, Eigen::Index n) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < d; ++i) out.push_back(random_matrix(rng, n, n));
  return out;
}

// Dense matrix of x -> (f * x) acting on vec(f), with vec in row-major order:
// (f * x)[n] = sum_m f[m] x[m + n].
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x) {
  const Eigen::Index R = x.rows(), C = x.cols();
  Eigen::MatrixXd A(R * C, R * C);
  for (Eigen::Index n1 = 0; n1 < R; ++n1)
    for (Eigen::Index n2 = 0; n2 < C; ++n2)
      for (Eigen::Index m1 = 0; m1 < R; ++m1)
        for (Eigen::Index m2 = 0; m2 < C; ++m2)
          A(n1 * C + n2, m1 * C + m2) = x((m1 + n1) % R, (m2 + n2) % C);
  return A;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(r * m.cols() + c) = m(r, c);
  return v;
}

double dense_objective(const std::vector<Eigen::MatrixXd>& f, const std::vector<Eigen::MatrixXd>& x,
                       const Eigen::MatrixXd& y, double lambda) {
  Eigen::VectorXd r = -vec(y);
  double reg = 0;
  for (std::size_t d = 0; d < f.size(); ++d) {
    r += correlation_matrix(x[d]) * vec(f[d]);
    reg += f[d].squaredNorm();
  }
  return r.squaredNorm() + lambda * reg;
}

// Per-frequency dense solve of (v v^H + lambda I) g = v conj(Y), with the
// spectra taken from a direct DFT.
std::vector<Eigen::MatrixXcd> per_frequency_solve(const std::vector<Eigen::MatrixXd>& x,
                                                  const Eigen::MatrixXd& y, double lambda) {
  const Eigen::Index n = y.rows();
  const int D = static_cast<int>(x.size());
  std::vector<Eigen::MatrixXcd> xh;
  for (const auto& c : x) xh.push_back(naive_dft2(c));
  const Eigen::MatrixXcd yh = naive_dft2(y);
  std::vector<Eigen::MatrixXcd> out(D, Eigen::MatrixXcd(n, n));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::VectorXcd v(D);
      for (int d = 0; d < D; ++d) v(d) = xh[d](r, c);
      const Eigen::MatrixXcd M = v * v.adjoint() + lambda * Eigen::MatrixXcd::Identity(D, D);
      const Eigen::VectorXcd g = M.fullPivLu().solve(v * std::conj(yh(r, c)));
      for (int d = 0; d < D; ++d) out[d](r, c) = g(d);
    }
  return out;
}

}  // namespace

TEST_CASE("gaussian_label peak and delta limit") {
  for (Eigen::Index n : {3, 8, 13}) {
    const LabelMap y = gaussian_label(n, 1.7);
    CHECK(y.values(n / 2, n / 2) == 1.0);
    CHECK(y.values.maxCoeff() == 1.0);
    CHECK((y.values.array() > 0.0).all());
  }
  const LabelMap delta = gaussian_label(8, 1e-3);
  CHECK(delta.values(4, 4) == 1.0);
  CHECK(delta.values.sum() == doctest::Approx(1.0));
}

TEST_CASE("gaussian_label matches brute-force periodic summation") {
  const int n = 8;
  const double sigma = 2.0;
  auto brute = [&](int r, int c) {
    double s = 0;
    for (int p = -1; p <= 1; ++p)
      for (int q = -1; q <= 1; ++q) {
        const double dr = r - 4 + p * n, dc = c - 4 + q * n;
        s += std::exp(-(dr * dr + dc * dc) / (2 * sigma * sigma));
      }
    return s;
  };
  const LabelMap y = gaussian_label(n, sigma);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) CHECK(y.values(r, c) == doctest::Approx(brute(r, c) / brute(4, 4)).epsilon(1e-14));
  // One cell from centre: exp(-1/8) plus the wrapped tail.
  CHECK(y.values(4, 5) == doctest::Approx(brute(4, 5) / brute(4, 4)).epsilon(1e-14));
  CHECK(std::abs(y.values(4, 5) - std::exp(-1.0 / 8.0)) < 5e-3);
}

TEST_CASE("gaussian_label is reflection symmetric about its centre") {
  for (Eigen::Index n : {6, 7, 16}) {
    const LabelMap y = gaussian_label(n, 1.3);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) {
        const Eigen::Index rr = ((2 * (n / 2) - r) % n + n) % n;
        const Eigen::Index cc = ((2 * (n / 2) - c) % n + n) % n;
        CHECK(y.values(r, c) == y.values(rr, cc));
      }
  }
}

TEST_CASE("dcf_objective examples") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd y = gaussian_label(8, 1.5).values;
  const std::vector<Eigen::MatrixXd> zero(1, Eigen::MatrixXd::Zero(8, 8));
  const auto x = random_channels(rng, 1, 8);
  CHECK(dcf_objective(zero, x, y, RegParams{0.3}) == doctest::Approx(y.squaredNorm()));

  // Correlating with a unit impulse reflects the filter; the centred label on
  // an even grid is its own reflection, so f = y fits exactly.
  std::vector<Eigen::MatrixXd> impulse(1, Eigen::MatrixXd::Zero(8, 8));
  impulse[0](0, 0) = 1.0;
  const std::vector<Eigen::MatrixXd> f{y};
  CHECK(dcf_objective(f, impulse, y, RegParams{0.0}) < 1e-24);

  CHECK_THROWS_AS(dcf_objective(f, random_channels(rng, 1, 6), y, RegParams{0.1}), Error);
}

TEST_CASE("dcf_objective equals the dense circulant evaluation") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_channels(rng, 3, 8);
    const auto f = random_channels(rng, 3, 8);
    const Eigen::MatrixXd y = random_matrix(rng, 8, 8);
    const double lambda = 0.05 * trial;
    CHECK(testing::rel_err(dcf_objective(f, x, y, RegParams{lambda}), dense_objective(f, x, y, lambda)) <= 1e-10);
  }
}

TEST_CASE("solve_dcf with an impulse sample") {
  std::mt19937_64 rng(3);
  std::vector<Eigen::MatrixXd> impulse(1, Eigen::MatrixXd::Zero(8, 8));
  impulse[0](0, 0) = 1.0;
  const Eigen::MatrixXd y = random_matrix(rng, 8, 8);
  for (double lambda : {0.0, 0.5, 3.0}) {
    const FourierFilter f = solve_dcf(impulse, y, RegParams{lambda});
    const Eigen::MatrixXcd expected = naive_dft2(y).conjugate() / (1.0 + lambda);
    CHECK(testing::rel_err_norm(f.channels[0], expected) < 1e-12);
  }
}

TEST_CASE("solve_dcf ridge limit") {
  std::mt19937_64 rng(4);
  const auto x = random_channels(rng, 2, 8);
  const Eigen::MatrixXd y = gaussian_label(8, 1.0).values;
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 1e2, 1e4, 1e8}) {
    const auto f = to_spatial(solve_dcf(x, y, RegParams{lambda}));
    double norm = 0;
    for (const auto& c : f) norm += c.squaredNorm();
    CHECK(norm < previous);
    previous = norm;
  }
  CHECK(previous < 1e-10);
}

TEST_CASE("solve_dcf minimizes the objective and matches dense least squares") {
  std::mt19937_64 rng(5);
  const auto x = random_channels(rng, 3, 8);
  const Eigen::MatrixXd y = gaussian_label(8, 1.2).values;
  const double lambda = 0.01;
  const auto f = to_spatial(solve_dcf(x, y, RegParams{lambda}));
  const double best = dcf_objective(f, x, y, RegParams{lambda});

  std::normal_distribution<double> noise(0.0, 1e-3);
  for (int i = 0; i < 100; ++i) {
    auto g = f;
    for (auto& c : g)
      for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] += noise(rng);
    CHECK(best <= dcf_objective(g, x, y, RegParams{lambda}));
  }

  // Dense normal equations in the spatial domain: (A^T A + lambda I) f = A^T y.
  Eigen::MatrixXd A(64, 192);
  for (int d = 0; d < 3; ++d) A.middleCols(64 * d, 64) = correlation_matrix(x[d]);
  const Eigen::MatrixXd normal = A.transpose() * A + lambda * Eigen::MatrixXd::Identity(192, 192);
  const Eigen::VectorXd dense = normal.ldlt().solve(A.transpose() * vec(y));
  Eigen::VectorXd ours(192);
  for (int d = 0; d < 3; ++d) ours.segment(64 * d, 64) = vec(f[d]);
  CHECK(testing::rel_err_norm(ours, dense) <= 1e-8);
}

TEST_CASE("solve_dcf matches the per-frequency dense solve across sizes and channels") {
  for (Eigen::Index n : {4, 8, 16})
    for (int D : {1, 2, 3})
      for (int seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(1000 * n + 10 * D + seed);
        const auto x = random_channels(rng, D, n);
        const Eigen::MatrixXd y = gaussian_label(n, 1.0 + 0.1 * seed).values;
        const FourierFilter f = solve_dcf(x, y, RegParams{0.01});
        const auto oracle = per_frequency_solve(x, y, 0.01);
        for (int d = 0; d < D; ++d) CHECK(testing::rel_err_norm(f.channels[d], oracle[d]) <= 1e-8);
      }
}

TEST_CASE("solve_dcf rejects a vanishing denominator") {
  const std::vector<Eigen::MatrixXd> zero(2, Eigen::MatrixXd::Zero(8, 8));
  CHECK_THROWS_AS(solve_dcf(zero, gaussian_label(8, 1.0).values, RegParams{0.0}), Error);
  // A constant sample only has energy at DC.
  const std::vector<Eigen::MatrixXd> flat(1, Eigen::MatrixXd::Constant(8, 8, 2.0));
  CHECK_THROWS_AS(solve_dcf(flat, gaussian_label(8, 1.0).values, RegParams{0.0}), Error);
  CHECK_NOTHROW(solve_dcf(flat, gaussian_label(8, 1.0).values, RegParams{0.1}));
}

TEST_CASE("response reproduces the label in the interpolation limit") {
  std::mt19937_64 rng(6);
  const auto x = random_channels(rng, 2, 8);
  const Eigen::MatrixXd y = gaussian_label(8, 1.0).values;
  const Eigen::MatrixXd r = response(solve_dcf(x, y, RegParams{0.0}), x);
  CHECK((r - y).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("response of a zero filter is zero") {
  std::mt19937_64 rng(7);
  const auto x = random_channels(rng, 2, 8);
  FourierFilter f;
  f.channels.assign(2, Eigen::MatrixXcd::Zero(8, 8));
  CHECK(response(f, x).isZero());
  CHECK_THROWS_AS(response(f, random_channels(rng, 1, 8)), Error);
}

TEST_CASE("response follows circular shifts of the sample") {
  std::mt19937_64 rng(8);
  const auto x = random_channels(rng, 3, 8);
  const FourierFilter f = solve_dcf(x, gaussian_label(8, 1.0).values, RegParams{0.1});
  const Eigen::MatrixXd r = response(f, x);
  for (auto [p, q] : {std::pair{1, 0}, std::pair{2, 5}, std::pair{7, 3}}) {
    std::vector<Eigen::MatrixXd> shifted;
    for (const auto& c : x) shifted.push_back(circshift(c, p, q));
    CHECK((response(f, shifted) - circshift(r, p, q)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("parseval and conjugate symmetry") {
  std::mt19937_64 rng(9);
  for (Eigen::Index n : {4, 7, 8, 16}) {
    const auto x = random_channels(rng, 2, n);
    const FourierFilter f = solve_dcf(x, gaussian_label(n, 1.0).values, RegParams{0.05});
    const Eigen::MatrixXd r = response(f, x);
    const Eigen::MatrixXcd r_hat = fft2(r);
    CHECK(testing::rel_err(r.squaredNorm(), r_hat.squaredNorm() / static_cast<double>(n * n)) <= 1e-9);
    for (const auto& c : f.channels)
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
          CHECK(std::abs(c((n - a) % n, (n - b) % n) - std::conj(c(a, b))) <= 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff()));
  }
}
