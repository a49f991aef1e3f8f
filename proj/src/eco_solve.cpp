#include "thermotrack/eco.hpp"

#include "thermotrack/log.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <random>

namespace thermotrack::eco {
namespace {

// Centred block of half-width K, cropped or zero-padded from m.
Eigen::MatrixXcd fit_block(const Eigen::MatrixXcd& m, int K) {
  const int Km = static_cast<int>(m.rows() / 2);
  if (Km >= K) return crop_centered(m, K);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
  add_centered(out, m);
  return out;
}

int max_bandwidth(const Sample& s) {
  int K = 0;
  for (const auto& layer : s) K = std::max(K, layer.K);
  return K;
}

// Vector-space helpers for the two unknown layouts.

double dot(const ContinuousFilter& a, const ContinuousFilter& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d)
    for (std::size_t c = 0; c < a[d].channels.size(); ++c)
      s += (a[d].channels[c].conjugate().array() * b[d].channels[c].array()).sum().real();
  return s;
}

void axpy(ContinuousFilter& y, double a, const ContinuousFilter& x) {
  for (std::size_t d = 0; d < y.size(); ++d)
    for (std::size_t c = 0; c < y[d].channels.size(); ++c) y[d].channels[c] += a * x[d].channels[c];
}

void xpay(ContinuousFilter& y, const ContinuousFilter& x, double b) {
  for (std::size_t d = 0; d < y.size(); ++d)
    for (std::size_t c = 0; c < y[d].channels.size(); ++c)
      y[d].channels[c] = x[d].channels[c] + b * y[d].channels[c];
}

bool all_finite(const ContinuousFilter& f) {
  for (const auto& layer : f)
    for (const auto& c : layer.channels)
      if (!c.allFinite()) return false;
  return true;
}

struct Joint {
  ContinuousFilter f;
  std::vector<Eigen::MatrixXd> p;
};

double dot(const Joint& a, const Joint& b) {
  double s = dot(a.f, b.f);
  for (std::size_t d = 0; d < a.p.size(); ++d) s += (a.p[d].array() * b.p[d].array()).sum();
  return s;
}

void axpy(Joint& y, double a, const Joint& x) {
  axpy(y.f, a, x.f);
  for (std::size_t d = 0; d < y.p.size(); ++d) y.p[d] += a * x.p[d];
}

void xpay(Joint& y, const Joint& x, double b) {
  xpay(y.f, x.f, b);
  for (std::size_t d = 0; d < y.p.size(); ++d) y.p[d] = x.p[d] + b * y.p[d];
}

bool all_finite(const Joint& v) {
  if (!all_finite(v.f)) return false;
  for (const auto& p : v.p)
    if (!p.allFinite()) return false;
  return true;
}

// Preconditioned conjugate gradients for a self-adjoint positive definite
// operator under the real inner product dot().
template <typename V>
V conjugate_gradient(const std::function<V(const V&)>& apply, const std::function<V(const V&)>* precondition,
                     const V& b, V x, const CgOptions& options, CgReport* report) {
  CgReport rep;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    axpy(x, -1.0, x);
    rep.converged = true;
    if (report) *report = rep;
    return x;
  }
  V r = b;
  axpy(r, -1.0, apply(x));
  double r_norm = std::sqrt(dot(r, r));
  if (r_norm <= options.tolerance * b_norm) {
    rep.relative_residual = r_norm / b_norm;
    rep.converged = true;
    if (report) *report = rep;
    return x;
  }
  V z = precondition ? (*precondition)(r) : r;
  V p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const V Ap = apply(p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0) || !std::isfinite(pAp)) {
      if (!std::isfinite(pAp))
        throw Error(ErrorCategory::numeric, "conjugate gradients: non-finite curvature at iteration " +
                                                std::to_string(it));
      break;  // exact solution reached or numerically zero direction
    }
    const double step = rz / pAp;
    axpy(x, step, p);
    axpy(r, -step, Ap);
    if (!all_finite(x) || !all_finite(r))
      throw Error(ErrorCategory::numeric, "conjugate gradients: non-finite values at iteration " +
                                              std::to_string(it));
    rep.iterations = it;
    r_norm = std::sqrt(dot(r, r));
    if (r_norm <= options.tolerance * b_norm) break;
    z = precondition ? (*precondition)(r) : r;
    const double rz_next = dot(r, z);
    xpay(p, z, rz_next / rz);
    rz = rz_next;
  }
  // Report the true residual rather than the recursively updated one.
  V true_r = b;
  axpy(true_r, -1.0, apply(x));
  rep.relative_residual = std::sqrt(dot(true_r, true_r)) / b_norm;
  rep.converged = rep.relative_residual <= options.tolerance;
  if (report) *report = rep;
  return x;
}

ContinuousFilter regularize(const ContinuousFilter& f, const SpatialRegularizer& reg) {
  ContinuousFilter out = f;
  for (std::size_t d = 0; d < f.size(); ++d)
    for (std::size_t c = 0; c < f[d].channels.size(); ++c)
      out[d].channels[c] = crop_centered(convolve(convolve(f[d].channels[c], reg.coeffs), reg.coeffs), f[d].K);
  return out;
}

// Normal-equation pieces of the data term for a fixed projection.
struct DataTerm {
  std::vector<double> alpha;
  std::vector<Sample> z;                  // projected samples
  std::vector<Eigen::MatrixXcd> labels;   // at the joint bandwidth
  int K = 0;

  DataTerm(const SampleMemory& memory, const ProjectionMatrix& projection) : alpha(memory.weights()) {
    for (const auto& x : memory.samples()) z.push_back(project(x, projection));
    K = max_bandwidth(z.front());
    for (const auto& y : memory.labels()) labels.push_back(fit_block(y, K));
  }

  Eigen::MatrixXcd score_of(std::size_t j, const ContinuousFilter& f) const {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
    for (std::size_t d = 0; d < f.size(); ++d) {
      Eigen::MatrixXcd layer = Eigen::MatrixXcd::Zero(f[d].side(), f[d].side());
      for (std::size_t c = 0; c < f[d].channels.size(); ++c)
        layer.array() += f[d].channels[c].array() * z[j][d].channels[c].array();
      add_centered(s, layer);
    }
    return s;
  }

  // out += alpha_j A_j^H s
  void adjoint_add(std::size_t j, const Eigen::MatrixXcd& s, ContinuousFilter& out) const {
    for (std::size_t d = 0; d < out.size(); ++d) {
      const Eigen::MatrixXcd sd = crop_centered(s, out[d].K);
      for (std::size_t c = 0; c < out[d].channels.size(); ++c)
        out[d].channels[c].array() += alpha[j] * z[j][d].channels[c].array().conjugate() * sd.array();
    }
  }
};

void check_layout(const SampleMemory& memory, const ProjectionMatrix& projection, const ContinuousFilter& f) {
  if (memory.empty()) throw Error(ErrorCategory::data, "filter solve needs at least one sample in memory");
  const Sample& x = memory.samples().front();
  if (x.size() != projection.layers.size() || x.size() != f.size())
    throw Error(ErrorCategory::data, "memory, projection and filter disagree on layer count");
  for (std::size_t d = 0; d < x.size(); ++d)
    if (projection.layers[d].rows() != x[d].channel_count() ||
        projection.layers[d].cols() != f[d].channel_count() || f[d].K != x[d].K)
      throw Error(ErrorCategory::data, "layer " + std::to_string(d) + " has inconsistent dimensions");
}

Eigen::MatrixXd seeded_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

std::vector<int> resolve_dims(const Sample& x, const std::vector<int>& requested) {
  std::vector<int> dims;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const int C = x[d].channel_count();
    const int want = d < requested.size() && requested[d] > 0 ? requested[d] : C;
    if (want > C)
      throw Error(ErrorCategory::config, "output dimension " + std::to_string(want) + " exceeds " +
                                             std::to_string(C) + " channels in layer " + std::to_string(d));
    dims.push_back(want);
  }
  return dims;
}

}  // namespace

ContinuousFilter solve_filter_cg(const SampleMemory& memory, const ProjectionMatrix& projection,
                                 const SpatialRegularizer& reg, const ContinuousFilter& initial,
                                 const CgOptions& options, CgReport* report) {
  check_layout(memory, projection, initial);
  const DataTerm data(memory, projection);

  std::function<ContinuousFilter(const ContinuousFilter&)> apply = [&](const ContinuousFilter& f) {
    ContinuousFilter out = regularize(f, reg);
    for (std::size_t j = 0; j < data.z.size(); ++j) data.adjoint_add(j, data.score_of(j, f), out);
    return out;
  };

  ContinuousFilter b = zero_filter(projection, memory.samples().front());
  for (std::size_t j = 0; j < data.z.size(); ++j) data.adjoint_add(j, data.labels[j], b);

  // Jacobi: diagonal of the data term plus the constant diagonal of W^H W.
  const double reg_diag = reg.coeffs.squaredNorm();
  ContinuousFilter inv_diag = zero_filter(projection, memory.samples().front());
  for (std::size_t d = 0; d < inv_diag.size(); ++d)
    for (std::size_t c = 0; c < inv_diag[d].channels.size(); ++c) {
      Eigen::ArrayXXd diag = Eigen::ArrayXXd::Constant(inv_diag[d].side(), inv_diag[d].side(), reg_diag);
      for (std::size_t j = 0; j < data.z.size(); ++j) diag += data.alpha[j] * data.z[j][d].channels[c].array().abs2();
      inv_diag[d].channels[c] = diag.inverse().cast<std::complex<double>>().matrix();
    }
  std::function<ContinuousFilter(const ContinuousFilter&)> precondition = [&](const ContinuousFilter& r) {
    ContinuousFilter out = r;
    for (std::size_t d = 0; d < out.size(); ++d)
      for (std::size_t c = 0; c < out[d].channels.size(); ++c)
        out[d].channels[c].array() *= inv_diag[d].channels[c].array();
    return out;
  };

  return conjugate_gradient<ContinuousFilter>(apply, options.preconditioned ? &precondition : nullptr, b,
                                              initial, options, report);
}

ProjectionMatrix pca_projection(const Sample& sample, const std::vector<int>& output_dims) {
  const std::vector<int> dims = resolve_dims(sample, output_dims);
  ProjectionMatrix P;
  for (std::size_t d = 0; d < sample.size(); ++d) {
    const int C = sample[d].channel_count();
    Eigen::MatrixXd cov(C, C);
    for (int a = 0; a < C; ++a)
      for (int b = a; b < C; ++b)
        cov(a, b) = cov(b, a) =
            (sample[d].channels[a].array() * sample[d].channels[b].array().conjugate()).sum().real();
    if (!cov.allFinite()) throw Error(ErrorCategory::numeric, "non-finite channel covariance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::MatrixXd Pd(C, dims[d]);
    for (int k = 0; k < dims[d]; ++k) {
      Eigen::VectorXd v = eig.eigenvectors().col(C - 1 - k);
      Eigen::Index arg;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      Pd.col(k) = v;
    }
    if (!(eig.eigenvalues()(C - 1) > 0.0))
      throw Error(ErrorCategory::numeric, "layer " + std::to_string(d) + " has no channel energy");
    P.layers.push_back(std::move(Pd));
  }
  return P;
}

namespace {

GnResult run_gn(const SampleMemory& memory, const SpatialRegularizer& reg, const GnOptions& options,
                ProjectionMatrix P) {
  const Sample& first = memory.samples().front();
  GnResult result;
  const CgOptions cg{options.cg_iterations, options.tolerance, true};
  ContinuousFilter f = solve_filter_cg(memory, P, reg, zero_filter(P, first), cg);
  double E = eco_objective_fourier(f, P, memory, reg, options.lambda);
  if (!std::isfinite(E)) throw Error(ErrorCategory::numeric, "non-finite objective after the initial solve");
  result.objective_trace.push_back(E);

  const std::vector<double> alpha = memory.weights();
  const std::vector<Sample>& xs = memory.samples();
  for (int outer = 0; outer < options.outer_iterations; ++outer) {
    const DataTerm data(memory, P);
    const ContinuousFilter f0 = f;

    // B p: the score change from perturbing P by p with the filter held at f0.
    auto b_apply = [&](std::size_t j, const std::vector<Eigen::MatrixXd>& p) {
      Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2 * data.K + 1, 2 * data.K + 1);
      for (std::size_t d = 0; d < f0.size(); ++d) {
        Eigen::MatrixXcd layer = Eigen::MatrixXcd::Zero(f0[d].side(), f0[d].side());
        for (Eigen::Index cp = 0; cp < p[d].cols(); ++cp) {
          Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(f0[d].side(), f0[d].side());
          for (Eigen::Index c = 0; c < p[d].rows(); ++c)
            if (p[d](c, cp) != 0.0) proj += p[d](c, cp) * xs[j][d].channels[c];
          layer.array() += f0[d].channels[cp].array() * proj.array();
        }
        add_centered(s, layer);
      }
      return s;
    };
    // out += alpha_j Re(B_j^H s)
    auto b_adjoint_add = [&](std::size_t j, const Eigen::MatrixXcd& s, std::vector<Eigen::MatrixXd>& out) {
      for (std::size_t d = 0; d < f0.size(); ++d) {
        const Eigen::MatrixXcd sd = crop_centered(s, f0[d].K);
        for (Eigen::Index cp = 0; cp < out[d].cols(); ++cp) {
          const Eigen::ArrayXXcd g = f0[d].channels[cp].array().conjugate() * sd.array();
          for (Eigen::Index c = 0; c < out[d].rows(); ++c)
            out[d](c, cp) += alpha[j] * (xs[j][d].channels[c].array().conjugate() * g).sum().real();
        }
      }
    };
    auto zero_p = [&] {
      std::vector<Eigen::MatrixXd> p;
      for (const auto& Pd : P.layers) p.push_back(Eigen::MatrixXd::Zero(Pd.rows(), Pd.cols()));
      return p;
    };

    std::function<Joint(const Joint&)> apply = [&](const Joint& v) {
      Joint out{regularize(v.f, reg), zero_p()};
      for (std::size_t d = 0; d < out.p.size(); ++d) out.p[d] = options.lambda * v.p[d];
      for (std::size_t j = 0; j < xs.size(); ++j) {
        const Eigen::MatrixXcd s = data.score_of(j, v.f) + b_apply(j, v.p);
        data.adjoint_add(j, s, out.f);
        b_adjoint_add(j, s, out.p);
      }
      return out;
    };
    Joint b{zero_filter(P, first), zero_p()};
    for (std::size_t d = 0; d < b.p.size(); ++d) b.p[d] = -options.lambda * P.layers[d];
    for (std::size_t j = 0; j < xs.size(); ++j) {
      data.adjoint_add(j, data.labels[j], b.f);
      b_adjoint_add(j, data.labels[j], b.p);
    }
    const Joint step = conjugate_gradient<Joint>(apply, nullptr, b, Joint{f0, zero_p()}, cg, nullptr);

    // Backtrack on the true objective so the trace never increases.
    bool accepted = false;
    for (double s = 1.0; s >= 1.0 / 1024.0; s *= 0.5) {
      ContinuousFilter f_try = f0;
      ContinuousFilter df = step.f;
      axpy(df, -1.0, f0);
      axpy(f_try, s, df);
      ProjectionMatrix P_try = P;
      for (std::size_t d = 0; d < P.layers.size(); ++d) P_try.layers[d] += s * step.p[d];
      const double E_try = eco_objective_fourier(f_try, P_try, memory, reg, options.lambda);
      if (!std::isfinite(E_try)) throw Error(ErrorCategory::numeric, "non-finite objective in Gauss-Newton step");
      if (E_try <= E) {
        f = std::move(f_try);
        P = std::move(P_try);
        E = E_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) log::debug("Gauss-Newton step rejected at outer iteration " + std::to_string(outer));
    result.objective_trace.push_back(E);
  }
  result.filter = std::move(f);
  result.projection = std::move(P);
  return result;
}

}  // namespace

GnResult learn_joint_gn(const SampleMemory& memory, const SpatialRegularizer& reg, const GnOptions& options) {
  if (memory.empty()) throw Error(ErrorCategory::data, "joint learning needs a first sample");
  const Sample& first = memory.samples().front();
  const std::vector<int> dims = resolve_dims(first, options.output_dims);
  bool full = true;
  for (std::size_t d = 0; d < first.size(); ++d) full = full && dims[d] == first[d].channel_count();

  if (options.freeze_projection) {
    GnResult result;
    result.projection = full ? ProjectionMatrix::identity(first) : pca_projection(first, dims);
    const CgOptions cg{options.cg_iterations * std::max(1, options.outer_iterations), options.tolerance, true};
    result.filter = solve_filter_cg(memory, result.projection, reg, zero_filter(result.projection, first), cg);
    result.objective_trace.push_back(
        eco_objective_fourier(result.filter, result.projection, memory, reg, options.lambda));
    return result;
  }

  std::mt19937_64 rng(options.seed);
  auto random_projection = [&] {
    ProjectionMatrix P;
    for (std::size_t d = 0; d < first.size(); ++d)
      P.layers.push_back(seeded_orthonormal(first[d].channel_count(), dims[d], rng));
    return P;
  };

  ProjectionMatrix P0;
  bool reinitialized = false;
  try {
    P0 = pca_projection(first, dims);
  } catch (const Error& e) {
    log::warn(std::string("projection initialization failed, using a seeded orthonormal start: ") + e.what());
    P0 = random_projection();
    reinitialized = true;
  }
  try {
    GnResult r = run_gn(memory, reg, options, P0);
    r.reinitialized = reinitialized;
    return r;
  } catch (const Error& e) {
    if (reinitialized || e.category() != ErrorCategory::numeric) throw;
    log::warn(std::string("Gauss-Newton failed, retrying from a seeded orthonormal projection: ") + e.what());
  }
  GnResult r = run_gn(memory, reg, options, random_projection());
  r.reinitialized = true;
  return r;
}

}  // namespace thermotrack::eco
