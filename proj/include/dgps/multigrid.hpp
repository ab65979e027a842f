#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dgps/common.hpp"
#include "dgps/operators.hpp"

namespace dgps {

/// Nested mass/stiffness matrices from coarsest (index 0) to finest, with
/// prolongation[l] mapping level l-1 to level l (prolongation[0] is empty).
struct MgLevels {
  std::vector<SparseMatrix> mass;
  std::vector<SparseMatrix> stiffness;
  std::vector<SparseMatrix> prolongation;

  std::size_t depth() const { return mass.size(); }
};

/// Geometric V-cycle for alpha M + beta A. Each level does one symmetric
/// Gauss-Seidel sweep (forward then backward) before and after the
/// coarse-grid correction; the coarsest level is solved exactly.
class MgSolver final : public SpdSolver {
 public:
  MgSolver(std::shared_ptr<const MgLevels> levels, double alpha, double beta, int cycles)
      : levels_(std::move(levels)), alpha_(alpha), beta_(beta), cycles_(cycles) {
    require(levels_ != nullptr && levels_->depth() >= 2,
            "MgSolver: hierarchy needs at least two levels");
    require(cycles >= 1, "MgSolver: need at least one cycle");
    const std::size_t depth = levels_->depth();
    for (std::size_t l = 0; l < depth; ++l) {
      ops_.push_back(SparseMatrix::combine(alpha, levels_->mass[l], beta, levels_->stiffness[l]));
      const SparseMatrix& s = ops_.back();
      std::vector<std::size_t> diag(s.rows());
      for (std::size_t i = 0; i < s.rows(); ++i) {
        const auto& off = s.row_offsets();
        const auto& col = s.col_indices();
        const auto it = std::lower_bound(col.begin() + static_cast<std::ptrdiff_t>(off[i]),
                                         col.begin() + static_cast<std::ptrdiff_t>(off[i + 1]), i);
        require(it != col.begin() + static_cast<std::ptrdiff_t>(off[i + 1]) && *it == i,
                "MgSolver: missing diagonal entry");
        diag[i] = static_cast<std::size_t>(it - col.begin());
      }
      diag_pos_.push_back(std::move(diag));
      restriction_.push_back(l == 0 ? SparseMatrix() : levels_->prolongation[l].transposed());
    }
    coarse_ = std::make_unique<CholeskySolver>(ops_[0]);
  }

  const SparseMatrix& matrix() const override { return ops_.back(); }
  SolverMode mode() const override { return SolverMode::vcycles(cycles_); }
  std::string description() const override {
    return std::to_string(cycles_) + " V-cycle(s), " + std::to_string(ops_.size()) +
           " levels, symmetric Gauss-Seidel 1+1";
  }
  int cycles() const { return cycles_; }

  /// cycles_ V-cycles from the zero vector.
  void solve_into(std::span<const double> b, std::span<double> x) const override {
    require(b.size() == matrix().rows() && x.size() == b.size(), "MgSolver: dimension mismatch");
    std::fill(x.begin(), x.end(), 0.0);
    for (int c = 0; c < cycles_; ++c) cycle(b, x);
  }

  Vector vcycle_solve(std::span<const double> b) const { return solve(b); }

  /// One V-cycle on the finest level, updating x in place.
  void cycle(std::span<const double> b, std::span<double> x) const {
    vcycle(ops_.size() - 1, b, x);
  }

  /// Largest observed per-cycle reduction of the energy error, b = 0,
  /// over `trials` random starts with `cycles_per_trial` cycles each.
  double contraction_factor(int trials, std::uint64_t seed, int cycles_per_trial = 8) const {
    require(trials >= 1, "contraction_factor: need at least one trial");
    const SparseMatrix& s = matrix();
    const Vector zero(s.rows(), 0.0);
    SplitMix64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      Vector e = rng.vector(s.rows());
      double energy = std::sqrt(s.form(e, e));
      for (int c = 0; c < cycles_per_trial && energy > 1e-280; ++c) {
        cycle(zero, e);
        const double next = std::sqrt(s.form(e, e));
        worst = std::max(worst, next / energy);
        energy = next;
      }
    }
    return worst;
  }

 private:
  void smooth(std::size_t l, std::span<const double> b, std::span<double> x) const {
    const SparseMatrix& s = ops_[l];
    const auto& off = s.row_offsets();
    const auto& col = s.col_indices();
    const auto& val = s.values();
    const auto& diag = diag_pos_[l];
    const std::size_t n = s.rows();
    auto relax = [&](std::size_t i) {
      double r = b[i];
      for (std::size_t k = off[i]; k < off[i + 1]; ++k)
        if (k != diag[i]) r -= val[k] * x[col[k]];
      x[i] = r / val[diag[i]];
    };
    for (std::size_t i = 0; i < n; ++i) relax(i);
    for (std::size_t i = n; i-- > 0;) relax(i);
  }

  void vcycle(std::size_t l, std::span<const double> b, std::span<double> x) const {
    if (l == 0) {
      coarse_->solve_into(b, x);
      return;
    }
    smooth(l, b, x);
    Vector r = ops_[l].multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const Vector rc = restriction_[l].multiply(r);
    Vector ec(rc.size(), 0.0);
    vcycle(l - 1, rc, ec);
    const Vector correction = levels_->prolongation[l].multiply(ec);
    axpy(1.0, correction, x);
    smooth(l, b, x);
  }

  std::shared_ptr<const MgLevels> levels_;
  double alpha_;
  double beta_;
  int cycles_;
  std::vector<SparseMatrix> ops_;
  std::vector<std::vector<std::size_t>> diag_pos_;
  std::vector<SparseMatrix> restriction_;
  std::unique_ptr<CholeskySolver> coarse_;
};

/// Conjugate gradients preconditioned by one V-cycle, iterated until the
/// relative residual drops below the tolerance. Stands in for a direct
/// solver where a factorisation would not fit in memory.
class NearExactSolver final : public SpdSolver {
 public:
  NearExactSolver(std::shared_ptr<const MgLevels> levels, double alpha, double beta,
                  double tolerance, int maxit = 500)
      : mg_(std::move(levels), alpha, beta, 1), tolerance_(tolerance), maxit_(maxit) {
    require(tolerance > 0.0, "NearExactSolver: tolerance must be positive");
  }

  const SparseMatrix& matrix() const override { return mg_.matrix(); }
  SolverMode mode() const override { return SolverMode::iterative(tolerance_); }
  std::string description() const override {
    return "near-exact: CG + 1 V-cycle to relative residual " + std::to_string(tolerance_);
  }

  void solve_into(std::span<const double> b, std::span<double> x) const override {
    const SparseMatrix& s = matrix();
    require(b.size() == s.rows() && x.size() == b.size(), "NearExactSolver: dimension mismatch");
    std::fill(x.begin(), x.end(), 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return;
    Vector r(b.begin(), b.end());
    Vector z = mg_.solve(r);
    Vector p = z;
    double rz = dot(r, z);
    for (int it = 0; it < maxit_; ++it) {
      const Vector q = s.multiply(p);
      const double pq = dot(p, q);
      if (!(pq > 0.0))
        throw NumericalError("NearExactSolver: breakdown at iteration " + std::to_string(it));
      const double a = rz / pq;
      axpy(a, p, x);
      axpy(-a, q, r);
      if (norm2(r) <= tolerance_ * bnorm) return;
      z = mg_.solve(r);
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    throw NumericalError("NearExactSolver: no convergence in " + std::to_string(maxit_) +
                         " iterations");
  }

 private:
  MgSolver mg_;
  double tolerance_;
  int maxit_;
};

}  // namespace dgps
