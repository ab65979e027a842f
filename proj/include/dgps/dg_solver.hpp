#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgps/common.hpp"
#include "dgps/dense.hpp"
#include "dgps/fem.hpp"
#include "dgps/legendre.hpp"
#include "dgps/operators.hpp"
#include "dgps/temporal_basis.hpp"

namespace dgps {

/// Coefficients u_0, ..., u_p of a space-time function in the temporal
/// eigenbasis, one spatial vector per block.
struct BlockVector {
  std::vector<Vector> blocks;

  BlockVector() = default;
  BlockVector(std::size_t count, std::size_t spatial_dim)
      : blocks(count, Vector(spatial_dim, 0.0)) {}

  static BlockVector random(std::size_t count, std::size_t spatial_dim, SplitMix64& rng) {
    BlockVector v;
    for (std::size_t j = 0; j < count; ++j) v.blocks.push_back(rng.vector(spatial_dim));
    return v;
  }

  /// Entries uniform in [0, 1); used for manufactured exact solutions.
  static BlockVector random_unit(std::size_t count, std::size_t spatial_dim, SplitMix64& rng) {
    BlockVector v(count, spatial_dim);
    for (auto& b : v.blocks)
      for (double& x : b) x = rng.uniform();
    return v;
  }

  std::size_t count() const { return blocks.size(); }
  std::size_t spatial_dim() const { return blocks.empty() ? 0 : blocks[0].size(); }
  Vector& operator[](std::size_t j) { return blocks[j]; }
  const Vector& operator[](std::size_t j) const { return blocks[j]; }
};

inline void check_conforming(const BlockVector& x, const BlockVector& y) {
  require(x.count() == y.count() && x.spatial_dim() == y.spatial_dim(),
          "BlockVector: dimension mismatch");
}

inline double dot(const BlockVector& x, const BlockVector& y) {
  check_conforming(x, y);
  double s = 0.0;
  for (std::size_t j = 0; j < x.count(); ++j) s += dot(x[j], y[j]);
  return s;
}

/// y += a * x
inline void axpy(double a, const BlockVector& x, BlockVector& y) {
  check_conforming(x, y);
  for (std::size_t j = 0; j < x.count(); ++j) axpy(a, x[j], y[j]);
}

inline void scale(double a, BlockVector& x) {
  for (auto& b : x.blocks) scale(a, b);
}

inline double norm2(const BlockVector& x) { return std::sqrt(dot(x, x)); }

/// Solver modes inside one time-step: `a_mode` for A^{-1} in L and P^T,
/// `h_mode` for the shifted solves in H^{-1}.
struct DgModes {
  SolverMode a_mode = SolverMode::exact();
  SolverMode h_mode = SolverMode::exact();
};

/// The linear algebra of one DG time-step of length tau:
///   B u = f,  L = P^T B,  preconditioner H.
class DgStepOperator {
 public:
  DgStepOperator(TemporalBasis basis, SpatialPair pair, double tau, DgModes modes = {},
                 int threads = 1)
      : basis_(std::move(basis)),
        pair_(std::move(pair)),
        tau_(tau),
        modes_(modes),
        threads_(threads) {
    require(tau > 0.0 && std::isfinite(tau), "DgStepOperator: tau must be positive");
    const std::size_t n = basis_.size();
    require(basis_.lambda.size() == n && basis_.Q.rows() == n && basis_.Q.cols() == n,
            "DgStepOperator: inconsistent basis");
    b_ = DenseMatrix(n, n);
    c_ = DenseMatrix(n, n);
    std::vector<Vector> coeff(n), deriv(n);
    for (std::size_t k = 0; k < n; ++k) {
      coeff[k] = basis_.coefficients(k);
      deriv[k] = legendre::differentiate(coeff[k]);
    }
    auto inner = [n](const Vector& x, const Vector& y) {
      double s = 0.0;
      for (std::size_t m = 0; m < n; ++m) s += x[m] * y[m] * legendre::gram(static_cast<int>(m));
      return s;
    };
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        b_(j, k) = inner(deriv[k], coeff[j]) + basis_.q_minus[k] * basis_.q_minus[j];
        c_(j, k) = 0.5 * inner(coeff[k], coeff[j]);
      }
    a_solver_ = pair_.a_solver(modes_.a_mode);
    for (std::size_t j = 0; j < n; ++j) shifted_.push_back(pair_.shifted_solver(mu(j), modes_.h_mode));
  }

  const TemporalBasis& basis() const { return basis_; }
  const SpatialPair& pair() const { return pair_; }
  double tau() const { return tau_; }
  const DgModes& modes() const { return modes_; }
  int threads() const { return threads_; }
  const DenseMatrix& b_coeffs() const { return b_; }
  const DenseMatrix& c_coeffs() const { return c_; }
  std::size_t blocks() const { return basis_.size(); }
  std::size_t spatial_dim() const { return pair_.size(); }
  const SpdSolver& a_solver() const { return *a_solver_; }
  const SpdSolver& shifted_solver(std::size_t j) const { return *shifted_[j]; }

  /// Shift of block j: tau sqrt(lambda_j) / 2.
  double mu(std::size_t j) const { return 0.5 * tau_ * std::sqrt(basis_.lambda[j]); }

  BlockVector zeros() const { return BlockVector(blocks(), spatial_dim()); }

  /// (B u)_j = sum_k (b_jk M + tau c_jk A) u_k
  BlockVector apply_B(const BlockVector& u) const {
    check(u);
    const std::size_t n = blocks();
    std::vector<Vector> mu_k(n), au_k(n);
    parallel_for(n, threads_, [&](std::size_t k) {
      mu_k[k] = pair_.M.multiply(u[k]);
      au_k[k] = pair_.A.multiply(u[k]);
    });
    BlockVector out = zeros();
    parallel_for(n, threads_, [&](std::size_t j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (b_(j, k) != 0.0) axpy(b_(j, k), mu_k[k], out[j]);
        if (c_(j, k) != 0.0) axpy(tau_ * c_(j, k), au_k[k], out[j]);
      }
    });
    return out;
  }

  /// g_k = M A^{-1} (sum_j K(k, j) f_j) + (tau / 2) f_k
  BlockVector apply_Pt(const BlockVector& f) const {
    check(f);
    const std::size_t n = blocks();
    BlockVector out = zeros();
    parallel_for(n, threads_, [&](std::size_t k) {
      Vector s(spatial_dim(), 0.0);
      for (std::size_t j = 0; j < n; ++j) axpy(basis_.K(k, j), f[j], s);
      out[k] = pair_.M.multiply(a_solver_->solve(s));
      axpy(0.5 * tau_, f[k], out[k]);
    });
    return out;
  }

  /// (L u)_j = M A^{-1} M u_j + (tau^2 lambda_j / 4) A u_j
  ///           + (tau / 2)(phi_j(1) z_+ + phi_j(-1) z_-),  z_pm = sum_i phi_i(pm 1) M u_i
  BlockVector apply_L(const BlockVector& u) const {
    check(u);
    const std::size_t n = blocks();
    std::vector<Vector> w(n);
    BlockVector out = zeros();
    parallel_for(n, threads_, [&](std::size_t j) {
      w[j] = pair_.M.multiply(u[j]);
      out[j] = pair_.M.multiply(a_solver_->solve(w[j]));
      axpy(0.25 * tau_ * tau_ * basis_.lambda[j], pair_.A.multiply(u[j]), out[j]);
    });
    Vector z_plus(spatial_dim(), 0.0), z_minus(spatial_dim(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      axpy(basis_.q_plus[j], w[j], z_plus);
      axpy(basis_.q_minus[j], w[j], z_minus);
    }
    parallel_for(n, threads_, [&](std::size_t j) {
      axpy(0.5 * tau_ * basis_.q_plus[j], z_plus, out[j]);
      axpy(0.5 * tau_ * basis_.q_minus[j], z_minus, out[j]);
    });
    return out;
  }

  /// Block j: S_j^{-1} A S_j^{-1} r_j with S_j = M + mu_j A.
  BlockVector apply_Hinv(const BlockVector& r) const {
    check(r);
    BlockVector out = zeros();
    parallel_for(blocks(), threads_, [&](std::size_t j) {
      const Vector y = shifted_[j]->solve(r[j]);
      out[j] = shifted_[j]->solve(pair_.A.multiply(y));
    });
    return out;
  }

  /// Block j: S_j A^{-1} S_j u_j.
  BlockVector apply_H(const BlockVector& u) const {
    check(u);
    BlockVector out = zeros();
    parallel_for(blocks(), threads_, [&](std::size_t j) {
      const Vector s = shifted_apply(j, u[j]);
      out[j] = shifted_apply(j, a_solver_->solve(s));
    });
    return out;
  }

  /// Block-diagonal part of L: M A^{-1} M + (tau^2 lambda_j / 4) A.
  BlockVector apply_D(const BlockVector& u) const {
    check(u);
    BlockVector out = zeros();
    parallel_for(blocks(), threads_, [&](std::size_t j) {
      out[j] = pair_.M.multiply(a_solver_->solve(pair_.M.multiply(u[j])));
      axpy(0.25 * tau_ * tau_ * basis_.lambda[j], pair_.A.multiply(u[j]), out[j]);
    });
    return out;
  }

  /// Optimal test function P u = A^{-1} M (I u)' + (tau / 2) u.
  BlockVector apply_P(const BlockVector& u) const {
    check(u);
    const std::size_t n = blocks();
    BlockVector out = zeros();
    parallel_for(n, threads_, [&](std::size_t j) {
      Vector s(spatial_dim(), 0.0);
      for (std::size_t k = 0; k < n; ++k) axpy(basis_.K(k, j), u[k], s);
      out[j] = a_solver_->solve(pair_.M.multiply(s));
      axpy(0.5 * tau_, u[j], out[j]);
    });
    return out;
  }

  /// (int_{-1}^{1} ||v(s)||_A^2 ds)^{1/2}
  double x_norm(const BlockVector& v) const {
    check(v);
    const std::size_t n = blocks();
    std::vector<Vector> av(n);
    for (std::size_t j = 0; j < n; ++j) av[j] = pair_.A.multiply(v[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) s += 2.0 * c_(j, k) * dot(v[j], av[k]);
    return std::sqrt(std::max(0.0, s));
  }

  /// u(1) = sum_j phi_j(1) u_j
  Vector end_value(const BlockVector& u) const { return combine(u, basis_.q_plus); }
  /// u(-1) = sum_j phi_j(-1) u_j
  Vector start_value(const BlockVector& u) const { return combine(u, basis_.q_minus); }

  /// u(s) for s in [-1, 1].
  Vector value_at(const BlockVector& u, double s) const { return combine(u, basis_.eval_all(s)); }

  std::string describe() const {
    return "p=" + std::to_string(basis_.p) + " tau=" + std::to_string(tau_) +
           " A^-1: " + a_solver_->description() +
           " | H^-1 blocks: " + shifted_[0]->description();
  }

 private:
  void check(const BlockVector& u) const {
    require(u.count() == blocks() && u.spatial_dim() == spatial_dim(),
            "DgStepOperator: block vector does not conform");
  }

  Vector shifted_apply(std::size_t j, std::span<const double> x) const {
    Vector y = pair_.M.multiply(x);
    axpy(mu(j), pair_.A.multiply(x), y);
    return y;
  }

  Vector combine(const BlockVector& u, std::span<const double> weights) const {
    check(u);
    Vector out(spatial_dim(), 0.0);
    for (std::size_t j = 0; j < blocks(); ++j) axpy(weights[j], u[j], out);
    return out;
  }

  TemporalBasis basis_;
  SpatialPair pair_;
  double tau_;
  DgModes modes_;
  int threads_;
  DenseMatrix b_;
  DenseMatrix c_;
  SolverPtr a_solver_;
  std::vector<SolverPtr> shifted_;
};

// ---------------------------------------------------------------------------

struct TridiagonalExtremes {
  double min = 0.0;
  double max = 0.0;
};

/// Extreme eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.
inline TridiagonalExtremes tridiagonal_extremes(std::span<const double> diag,
                                                std::span<const double> off) {
  const std::size_t n = diag.size();
  require(n >= 1 && off.size() + 1 >= n, "tridiagonal_extremes: bad sizes");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(off[i - 1]);
    if (i + 1 < n) radius += std::abs(off[i]);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  // Number of eigenvalues strictly below x.
  auto count_below = [&](double x) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double o = i > 0 ? off[i - 1] : 0.0;
      d = diag[i] - x - (i > 0 ? o * o / d : 0.0);
      if (d == 0.0) d = -1e-300;
      if (d < 0.0) ++count;
    }
    return count;
  };
  auto bisect = [&](std::size_t index) {
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(std::abs(a), std::abs(b)); ++it) {
      const double m = 0.5 * (a + b);
      if (count_below(m) > index) b = m;
      else a = m;
    }
    return 0.5 * (a + b);
  };
  return {bisect(0), bisect(n - 1)};
}

// ---------------------------------------------------------------------------

enum class StopCriterion { relative_preconditioned_residual, true_energy_error };

inline std::string to_string(StopCriterion c) {
  return c == StopCriterion::true_energy_error ? "true_energy_error"
                                               : "relative_preconditioned_residual";
}

struct PcgControls {
  double tol = 1e-6;
  int maxit = 200;
  StopCriterion criterion = StopCriterion::relative_preconditioned_residual;
};

struct PcgReport {
  int iterations = 0;
  bool converged = false;
  StopCriterion criterion = StopCriterion::relative_preconditioned_residual;
  /// sqrt(r^T H^{-1} r) relative to its initial value, from iteration 0.
  std::vector<double> residual_history;
  /// ||u* - u_k||_L relative to ||u*||_L, from iteration 0 (exact solution given).
  std::vector<double> energy_error_history;
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  double kappa_estimate = 1.0;
};

struct PcgResult {
  BlockVector u;
  PcgReport report;
};

/// Preconditioned conjugate gradients for L u = g with preconditioner H,
/// from the zero initial guess. The energy error uses e^T r = e^T L e.
inline PcgResult pcg(const DgStepOperator& op, const BlockVector& g, const PcgControls& controls,
                     const BlockVector* exact = nullptr) {
  require(controls.tol > 0.0 && controls.maxit >= 0, "pcg: invalid controls");
  if (controls.criterion == StopCriterion::true_energy_error)
    require(exact != nullptr, "pcg: true energy criterion needs the exact solution");
  PcgResult result{op.zeros(), {}};
  PcgReport& rep = result.report;
  rep.criterion = controls.criterion;

  BlockVector r = g;
  BlockVector z = op.apply_Hinv(r);
  double rz = dot(r, z);
  const double rz0 = rz;
  const double energy0 = exact ? dot(*exact, g) : 0.0;
  if (norm2(g) == 0.0) {
    rep.residual_history.push_back(0.0);
    if (exact) rep.energy_error_history.push_back(0.0);
    rep.converged = true;
    return result;
  }
  if (!(rz0 > 0.0)) throw NumericalError("pcg: preconditioner not positive definite at iteration 0");
  rep.residual_history.push_back(1.0);
  if (exact) rep.energy_error_history.push_back(1.0);

  auto energy_error = [&]() {
    BlockVector e = *exact;
    axpy(-1.0, result.u, e);
    return std::sqrt(std::max(0.0, dot(e, r)) / energy0);
  };

  BlockVector p = z;
  std::vector<double> alphas, betas;
  for (int it = 0; it < controls.maxit; ++it) {
    const BlockVector q = op.apply_L(p);
    const double pq = dot(p, q);
    if (!(pq > 0.0))
      throw NumericalError("pcg: non-positive curvature at iteration " + std::to_string(it + 1) +
                           " (operator or preconditioner not SPD)");
    const double alpha = rz / pq;
    axpy(alpha, p, result.u);
    axpy(-alpha, q, r);
    alphas.push_back(alpha);
    rep.iterations = it + 1;

    z = op.apply_Hinv(r);
    const double rz_next = dot(r, z);
    if (rz_next < 0.0)
      throw NumericalError("pcg: preconditioner not positive definite at iteration " +
                           std::to_string(it + 1));
    rep.residual_history.push_back(std::sqrt(std::max(0.0, rz_next) / rz0));
    if (exact) rep.energy_error_history.push_back(energy_error());

    const double measure = controls.criterion == StopCriterion::true_energy_error
                               ? rep.energy_error_history.back()
                               : rep.residual_history.back();
    if (measure <= controls.tol || rz_next <= 0.0) {
      rep.converged = true;
      break;
    }
    const double beta = rz_next / rz;
    betas.push_back(beta);
    rz = rz_next;
    for (std::size_t j = 0; j < p.count(); ++j)
      for (std::size_t i = 0; i < p[j].size(); ++i) p[j][i] = z[j][i] + beta * p[j][i];
  }

  if (!alphas.empty()) {
    const std::size_t k = alphas.size();
    Vector diag(k), off(k > 1 ? k - 1 : 0);
    for (std::size_t i = 0; i < k; ++i) {
      diag[i] = 1.0 / alphas[i] + (i > 0 ? betas[i - 1] / alphas[i - 1] : 0.0);
      if (i + 1 < k) off[i] = std::sqrt(betas[i]) / alphas[i];
    }
    const auto ext = tridiagonal_extremes(diag, off);
    rep.ritz_min = ext.min;
    rep.ritz_max = ext.max;
    rep.kappa_estimate = ext.max / ext.min;
  }
  return result;
}

// ---------------------------------------------------------------------------

struct ConditionEstimate {
  double kappa = 1.0;
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

/// Extreme eigenvalues of H^{-1} L by Lanczos in the H inner product with
/// full reorthogonalisation, started from H^{-1} r for a random r. Ritz values
/// come from the projected matrix T = V^T L V (built a row per step), so they
/// stay inside the spectrum even after the Krylov space has (numerically)
/// become invariant. T is tridiagonal up to rounding; its extremes are taken
/// from the tridiagonal part by bisection unless the remainder is not
/// negligible, in which case T is diagonalised in full.
inline ConditionEstimate estimate_condition(const DgStepOperator& op, int max_lanczos,
                                            std::uint64_t seed, double rel_change = 1e-8) {
  require(max_lanczos >= 1, "estimate_condition: need at least one Lanczos step");
  const std::size_t dim = op.blocks() * op.spatial_dim();
  const int steps =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(max_lanczos), dim));
  SplitMix64 rng(seed);
  ConditionEstimate est;
  est.seed = seed;

  // v: H-orthonormal basis; hv = H v; lv = L v; t: rows of V^T L V.
  std::vector<BlockVector> v, hv, lv;
  std::vector<Vector> t;
  double off_mass = 0.0;
  BlockVector next = op.apply_Hinv(BlockVector::random(op.blocks(), op.spatial_dim(), rng));
  double prev_min = 0.0, prev_max = 0.0;
  for (int k = 0; k < steps; ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < v.size(); ++i) axpy(-dot(next, hv[i]), v[i], next);
    BlockVector hnext = op.apply_H(next);
    const double norm = std::sqrt(std::max(0.0, dot(next, hnext)));
    const double reference = v.empty() ? norm : std::sqrt(std::abs(dot(lv.back(), v.back())));
    if (!(norm > 1e-10 * reference)) {
      est.converged = true;  // invariant subspace
      break;
    }
    scale(1.0 / norm, next);
    scale(1.0 / norm, hnext);
    lv.push_back(op.apply_L(next));
    v.push_back(next);
    hv.push_back(std::move(hnext));

    const std::size_t m = v.size();
    Vector row(m);
    for (std::size_t i = 0; i < m; ++i) row[i] = 0.5 * (dot(v[i], lv[m - 1]) + dot(v[m - 1], lv[i]));
    for (std::size_t i = 0; i + 2 < m; ++i) off_mass += 2.0 * row[i] * row[i];
    t.push_back(std::move(row));

    Vector diag(m), sub(m - 1);
    for (std::size_t i = 0; i < m; ++i) diag[i] = t[i][i];
    for (std::size_t i = 0; i + 1 < m; ++i) sub[i] = t[i + 1][i];
    const TridiagonalExtremes ext = tridiagonal_extremes(diag, sub);
    est.ritz_max = ext.max;
    est.ritz_min = ext.min;
    if (std::sqrt(off_mass) > 1e-12 * std::abs(ext.max)) {
      DenseMatrix full(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) full(i, j) = full(j, i) = t[i][j];
      const SymEigen eig = sym_eigen(full);
      est.ritz_max = eig.values.front();
      est.ritz_min = eig.values.back();
    }
    est.iterations = k + 1;
    if (k >= 2 && std::abs(est.ritz_min - prev_min) <= rel_change * std::abs(est.ritz_min) &&
        std::abs(est.ritz_max - prev_max) <= rel_change * std::abs(est.ritz_max)) {
      est.converged = true;
      break;
    }
    prev_min = est.ritz_min;
    prev_max = est.ritz_max;
    next = op.apply_Hinv(lv.back());
  }
  est.kappa = est.ritz_max / est.ritz_min;
  return est;
}

// ---------------------------------------------------------------------------

/// Spatial load functional at time t, or empty for a zero source.
using TimeLoad = std::function<Vector(double)>;

struct StepRhs {
  BlockVector f;
  BlockVector g;
};

/// f_k = (tau/2) sum_q w_q phi_k(s_q) load(t(s_q)) + phi_k(-1) M u_prev with a
/// (p+3)-point Gauss rule and t(s) = t_start + tau (s + 1) / 2; g = P^T f.
inline StepRhs assemble_rhs(const DgStepOperator& op, const TimeLoad& source,
                            std::span<const double> u_prev, double t_start = 0.0) {
  require(u_prev.size() == op.spatial_dim(), "assemble_rhs: u_prev has the wrong size");
  const TemporalBasis& basis = op.basis();
  BlockVector f = op.zeros();
  if (source) {
    const auto rule = legendre::gauss_rule(basis.p + 3);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = rule.nodes[q];
      const Vector load = source(t_start + 0.5 * op.tau() * (s + 1.0));
      require(load.size() == op.spatial_dim(), "assemble_rhs: load has the wrong size");
      const Vector phi = basis.eval_all(s);
      for (std::size_t k = 0; k < op.blocks(); ++k)
        axpy(0.5 * op.tau() * rule.weights[q] * phi[k], load, f[k]);
    }
  }
  const Vector mu = op.pair().M.multiply(u_prev);
  for (std::size_t k = 0; k < op.blocks(); ++k) axpy(basis.q_minus[k], mu, f[k]);
  BlockVector g = op.apply_Pt(f);
  return {std::move(f), std::move(g)};
}

struct StepResult {
  BlockVector u;
  Vector u_end;
  PcgReport report;
};

inline StepResult timestep_solve(const DgStepOperator& op, const TimeLoad& source,
                                 std::span<const double> u_prev, double t_start,
                                 const PcgControls& controls) {
  const StepRhs rhs = assemble_rhs(op, source, u_prev, t_start);
  PcgResult solved = pcg(op, rhs.g, controls);
  Vector end = op.end_value(solved.u);
  return {std::move(solved.u), std::move(end), std::move(solved.report)};
}

// ---------------------------------------------------------------------------

enum class HeatMode { direct, multigrid };

inline std::string to_string(HeatMode m) { return m == HeatMode::direct ? "D" : "MG"; }

/// (D): exact solves everywhere. (MG): 5 V-cycles for A^{-1} in L and P^T,
/// 1 V-cycle per shifted solve in H^{-1}.
inline DgModes heat_modes(HeatMode mode, int a_cycles = 5, int h_cycles = 1) {
  if (mode == HeatMode::direct) return {};
  return {SolverMode::vcycles(a_cycles), SolverMode::vcycles(h_cycles)};
}

enum class InitialDatum { interpolation, projection };

inline std::string to_string(InitialDatum d) {
  return d == InitialDatum::interpolation ? "interpolation" : "l2_projection";
}

struct HeatRun {
  int p = 1;
  int steps = 1;
  HeatMode mode = HeatMode::direct;
  PcgControls controls{1e-6, 200, StopCriterion::relative_preconditioned_residual};
  int threads = 1;
  InitialDatum initial = InitialDatum::interpolation;
  int a_cycles = 5;  ///< (MG) only
  int h_cycles = 1;  ///< (MG) only
};

struct HeatReport {
  double tau = 0.0;
  std::vector<int> iterations;
  double mean_iterations = 0.0;
  double final_error = 0.0;
  Vector final_solution;
  std::string description;
};

/// Marches the heat problem with uniform steps on a prepared discretisation
/// and reports the final L^2 error against the series solution.
inline HeatReport solve_heat(const HeatProblem& problem, const Discretization& disc,
                             const HeatRun& run) {
  require(run.steps >= 1, "solve_heat: need at least one step");
  require(run.p >= 0, "solve_heat: negative degree");
  require(problem.T_final > 0.0, "solve_heat: final time must be positive");
  HeatReport rep;
  rep.tau = problem.T_final / run.steps;
  const DgStepOperator op(build_basis(run.p), disc.pair, rep.tau,
                          heat_modes(run.mode, run.a_cycles, run.h_cycles), run.threads);
  rep.description = op.describe() + " | u0: " + to_string(run.initial);
  Vector u = run.initial == InitialDatum::interpolation
                 ? interpolate(disc.level(), problem.u0)
                 : l2_projection(disc.level(), disc.pair.M, problem.u0);
  for (int n = 0; n < run.steps; ++n) {
    StepResult step = timestep_solve(op, {}, u, n * rep.tau, run.controls);
    if (!step.report.converged)
      throw NumericalError("solve_heat: PCG did not converge in step " + std::to_string(n + 1));
    rep.iterations.push_back(step.report.iterations);
    u = std::move(step.u_end);
  }
  double total = 0.0;
  for (int it : rep.iterations) total += it;
  rep.mean_iterations = total / static_cast<double>(rep.iterations.size());
  rep.final_error = l2_error(disc.level(), u, exact_heat_solution(problem, problem.T_final));
  rep.final_solution = std::move(u);
  return rep;
}

}  // namespace dgps
