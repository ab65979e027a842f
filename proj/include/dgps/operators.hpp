#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dgps/common.hpp"

namespace dgps {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix with sorted column indices.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Builds from (row, col, value) entries; duplicates are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries) {
    for (const Triplet& t : entries)
      require(t.row < rows && t.col < cols, "SparseMatrix::from_triplets: index out of range");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_offsets_.assign(rows + 1, 0);
    for (std::size_t i = 0; i < entries.size();) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < entries.size() && entries[j].row == entries[i].row &&
             entries[j].col == entries[i].col)
        sum += entries[j++].value;
      m.col_indices_.push_back(entries[i].col);
      m.values_.push_back(sum);
      ++m.row_offsets_[entries[i].row + 1];
      i = j;
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
    return m;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  static SparseMatrix diagonal(std::span<const double> d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return from_triplets(d.size(), d.size(), std::move(t));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const {
    const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    return (it != end && *it == j) ? values_[static_cast<std::size_t>(it - col_indices_.begin())]
                                   : 0.0;
  }

  void multiply_into(std::span<const double> x, std::span<double> y) const {
    require(x.size() == cols_ && y.size() == rows_, "spmv: dimension mismatch");
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        s += values_[k] * x[col_indices_[k]];
      y[i] = s;
    }
  }

  Vector multiply(std::span<const double> x) const {
    Vector y(rows_);
    multiply_into(x, y);
    return y;
  }

  /// x^T (this) y
  double form(std::span<const double> x, std::span<const double> y) const {
    return dot(x, multiply(y));
  }

  SparseMatrix transposed() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        t.push_back({col_indices_[k], i, values_[k]});
    return from_triplets(cols_, rows_, std::move(t));
  }

  /// alpha * a + beta * b over the union of both patterns.
  static SparseMatrix combine(double alpha, const SparseMatrix& a, double beta,
                              const SparseMatrix& b) {
    require(a.rows_ == b.rows_ && a.cols_ == b.cols_, "SparseMatrix::combine: shapes differ");
    std::vector<Triplet> t;
    t.reserve(a.nonzeros() + b.nonzeros());
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = a.row_offsets_[i]; k < a.row_offsets_[i + 1]; ++k)
        t.push_back({i, a.col_indices_[k], alpha * a.values_[k]});
      for (std::size_t k = b.row_offsets_[i]; k < b.row_offsets_[i + 1]; ++k)
        t.push_back({i, b.col_indices_[k], beta * b.values_[k]});
    }
    return from_triplets(a.rows_, a.cols_, std::move(t));
  }

  /// a * b (used for Galerkin triple products in tests and diagnostics).
  static SparseMatrix product(const SparseMatrix& a, const SparseMatrix& b) {
    require(a.cols_ == b.rows_, "SparseMatrix::product: inner dimensions differ");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = a.row_offsets_[i]; k < a.row_offsets_[i + 1]; ++k) {
        const std::size_t m = a.col_indices_[k];
        for (std::size_t l = b.row_offsets_[m]; l < b.row_offsets_[m + 1]; ++l)
          t.push_back({i, b.col_indices_[l], a.values_[k] * b.values_[l]});
      }
    return from_triplets(a.rows_, b.cols_, std::move(t));
  }

  Vector diagonal_values() const {
    Vector d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
  }

  /// Largest |i - j| over stored entries.
  std::size_t bandwidth() const {
    std::size_t bw = 0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        const std::size_t j = col_indices_[k];
        bw = std::max(bw, i > j ? i - j : j - i);
      }
    return bw;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// |a_ij - a_ji| <= rel_tol * max|a| for all stored entries.
  bool is_symmetric(double rel_tol = 1e-14) const {
    if (rows_ != cols_) return false;
    const double bound = rel_tol * max_abs();
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (std::abs(values_[k] - at(col_indices_[k], i)) > bound) return false;
    return true;
  }

  /// MatrixMarket coordinate output. Symmetric matrices store the lower triangle.
  void write_matrix_market(std::ostream& out, bool symmetric) const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (!symmetric || col_indices_[k] <= i) ++count;
    out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general")
        << "\n";
    out << rows_ << " " << cols_ << " " << count << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (!symmetric || col_indices_[k] <= i)
          out << i + 1 << " " << col_indices_[k] + 1 << " " << values_[k] << "\n";
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

inline Vector spmv(const SparseMatrix& a, std::span<const double> x) { return a.multiply(x); }

// ---------------------------------------------------------------------------

/// Cholesky factor of a symmetric banded matrix, stored row by row:
/// row i keeps L(i, i - bw) ... L(i, i).
class BandedCholesky {
 public:
  BandedCholesky() = default;

  explicit BandedCholesky(const SparseMatrix& a) : n_(a.rows()), bw_(a.bandwidth()) {
    require(a.rows() == a.cols(), "BandedCholesky: matrix not square");
    const std::size_t width = bw_ + 1;
    band_.assign(n_ * width, 0.0);
    const auto& off = a.row_offsets();
    const auto& col = a.col_indices();
    const auto& val = a.values();
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = off[i]; k < off[i + 1]; ++k)
        if (col[k] <= i) band_[i * width + (col[k] + bw_ - i)] = val[k];

    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      double* li = &band_[i * width + (first + bw_ - i)];
      for (std::size_t j = first; j <= i; ++j) {
        const std::size_t jfirst = j > bw_ ? j - bw_ : 0;
        const std::size_t start = std::max(first, jfirst);
        const double* lik = &band_[i * width + (start + bw_ - i)];
        const double* ljk = &band_[j * width + (start + bw_ - j)];
        double s = li[j - first];
        for (std::size_t k = 0; k < j - start; ++k) s -= lik[k] * ljk[k];
        if (j < i) {
          li[j - first] = s / band_[j * width + bw_];
        } else {
          if (!(s > 0.0))
            throw NumericalError("BandedCholesky: non-positive pivot " + std::to_string(s) +
                                 " at index " + std::to_string(i));
          li[j - first] = std::sqrt(s);
        }
      }
    }
  }

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  void solve_in_place(std::span<double> x) const {
    require(x.size() == n_, "BandedCholesky::solve: dimension mismatch");
    const std::size_t width = bw_ + 1;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      const double* li = &band_[i * width + (first + bw_ - i)];
      double s = x[i];
      for (std::size_t k = first; k < i; ++k) s -= li[k - first] * x[k];
      x[i] = s / band_[i * width + bw_];
    }
    for (std::size_t i = n_; i-- > 0;) {
      x[i] /= band_[i * width + bw_];
      const std::size_t first = i > bw_ ? i - bw_ : 0;
      const double* li = &band_[i * width + (first + bw_ - i)];
      const double xi = x[i];
      for (std::size_t k = first; k < i; ++k) x[k] -= li[k - first] * xi;
    }
  }

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  Vector band_;
};

// ---------------------------------------------------------------------------

struct SolverMode {
  enum class Kind { exact, iterative, vcycles };
  Kind kind = Kind::exact;
  double tolerance = 0.0;
  int cycles = 0;

  static SolverMode exact() { return {}; }
  static SolverMode iterative(double tol) { return {Kind::iterative, tol, 0}; }
  static SolverMode vcycles(int n) {
    require(n >= 1, "SolverMode::vcycles: need at least one cycle");
    return {Kind::vcycles, 0.0, n};
  }

  std::string describe() const {
    std::ostringstream s;
    switch (kind) {
      case Kind::exact: return "exact";
      case Kind::iterative: s << "iterative(" << tolerance << ")"; return s.str();
      case Kind::vcycles: s << "vcycles(" << cycles << ")"; return s.str();
    }
    return "unknown";
  }
};

/// Approximate or exact inverse of one SPD matrix.
class SpdSolver {
 public:
  virtual ~SpdSolver() = default;
  virtual const SparseMatrix& matrix() const = 0;
  virtual SolverMode mode() const = 0;
  virtual std::string description() const = 0;
  virtual void solve_into(std::span<const double> b, std::span<double> x) const = 0;

  Vector solve(std::span<const double> b) const {
    Vector x(b.size());
    solve_into(b, x);
    return x;
  }
};

using SolverPtr = std::shared_ptr<const SpdSolver>;

class CholeskySolver final : public SpdSolver {
 public:
  explicit CholeskySolver(SparseMatrix a) : a_(std::move(a)), factor_(a_) {}

  const SparseMatrix& matrix() const override { return a_; }
  SolverMode mode() const override { return SolverMode::exact(); }
  std::string description() const override {
    return "banded Cholesky (n = " + std::to_string(a_.rows()) +
           ", bandwidth = " + std::to_string(factor_.bandwidth()) + ")";
  }
  void solve_into(std::span<const double> b, std::span<double> x) const override {
    require(b.size() == a_.rows() && x.size() == b.size(), "CholeskySolver: dimension mismatch");
    std::copy(b.begin(), b.end(), x.begin());
    factor_.solve_in_place(x);
  }

 private:
  SparseMatrix a_;
  BandedCholesky factor_;
};

/// Builds a solver for alpha * M + beta * A in the requested mode.
using SolverFactory =
    std::function<SolverPtr(double alpha, double beta, const SolverMode& mode)>;

/// Mass and stiffness matrices of a spatial discretisation together with
/// the means of inverting A and the shifted operators M + mu A.
struct SpatialPair {
  SparseMatrix M;
  SparseMatrix A;
  SolverFactory factory;

  std::size_t size() const { return M.rows(); }

  SolverPtr a_solver(const SolverMode& mode = SolverMode::exact()) const {
    return factory(0.0, 1.0, mode);
  }
  SolverPtr shifted_solver(double mu, const SolverMode& mode = SolverMode::exact()) const {
    require(mu >= 0.0, "shifted_solver: negative shift");
    return factory(1.0, mu, mode);
  }
};

/// Smallest sampled Rayleigh quotient x^T A x / x^T x.
inline double min_rayleigh_quotient(const SparseMatrix& a, int samples, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double q = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vector x = rng.vector(a.cols());
    q = std::min(q, a.form(x, x) / dot(x, x));
  }
  return q;
}

/// Factory that only offers exact solves by banded Cholesky.
inline SolverFactory cholesky_factory(const SparseMatrix& m, const SparseMatrix& a) {
  return [m, a](double alpha, double beta, const SolverMode& mode) -> SolverPtr {
    require(mode.kind == SolverMode::Kind::exact,
            "cholesky_factory: only exact solves are available for this pair");
    return std::make_shared<CholeskySolver>(SparseMatrix::combine(alpha, m, beta, a));
  };
}

inline SpatialPair make_pair(SparseMatrix m, SparseMatrix a, SolverFactory factory = {}) {
  require(m.rows() == m.cols() && a.rows() == a.cols() && m.rows() == a.rows(),
          "make_pair: M and A must be square of equal size");
#ifndef NDEBUG
  if (!(min_rayleigh_quotient(m, 8, 1) > 0.0) || !(min_rayleigh_quotient(a, 8, 2) > 0.0))
    throw ValidationError("make_pair: M or A is not positive definite");
#endif
  if (!factory) factory = cholesky_factory(m, a);
  return {std::move(m), std::move(a), std::move(factory)};
}

// ---------------------------------------------------------------------------

/// sqrt(v^T M A^{-1} M v), the dual norm of ||.||_A under the M pairing.
inline double negative_norm(const SpatialPair& pair, const SpdSolver& a_solver,
                            std::span<const double> v) {
  require(v.size() == pair.size(), "negative_norm: dimension mismatch");
  const Vector w = pair.M.multiply(v);
  return std::sqrt(std::max(0.0, dot(w, a_solver.solve(w))));
}

inline double negative_norm(const SpatialPair& pair, std::span<const double> v) {
  return negative_norm(pair, *pair.a_solver(), v);
}

struct RatioRange {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::uint64_t seed = 0;
};

/// Extremes over random v of
///   v^T (M A^{-1} M + mu A) v / v^T (M + sqrt(mu) A) A^{-1} (M + sqrt(mu) A) v.
inline RatioRange pearson_wathen_ratio(const SpatialPair& pair, double mu, int samples,
                                       std::uint64_t seed) {
  require(mu >= 0.0, "pearson_wathen_ratio: mu must be nonnegative");
  require(samples >= 1, "pearson_wathen_ratio: need at least one sample");
  const SolverPtr solver = pair.a_solver();
  const double root = std::sqrt(mu);
  SplitMix64 rng(seed);
  RatioRange range{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity(), seed};
  for (int s = 0; s < samples; ++s) {
    const Vector v = rng.vector(pair.size());
    const Vector mv = pair.M.multiply(v);
    const Vector av = pair.A.multiply(v);
    const double numerator = dot(mv, solver->solve(mv)) + mu * dot(v, av);
    Vector shifted = mv;
    axpy(root, av, shifted);
    const double denominator = dot(shifted, solver->solve(shifted));
    const double ratio = numerator / denominator;
    range.min_ratio = std::min(range.min_ratio, ratio);
    range.max_ratio = std::max(range.max_ratio, ratio);
  }
  return range;
}

}  // namespace dgps
