#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dgps/common.hpp"
#include "dgps/dense.hpp"
#include "dgps/legendre.hpp"

namespace dgps {

// ---------------------------------------------------------------------------
// Reconstruction operator on Legendre coefficients.

/// Legendre coefficients (length p+2) of the reconstruction I v of a
/// degree-p polynomial v with coefficients `v` (length p+1):
///   I v = v - v(-1) (-1)^p (L_p - L_{p+1}) / 2.
/// I v(-1) = 0, I v(1) = v(1), and moments against P_{p-1} are preserved.
inline Vector reconstruct(std::span<const double> v) {
  require(!v.empty(), "reconstruct: empty coefficient vector");
  const std::size_t p = v.size() - 1;
  Vector out(v.begin(), v.end());
  out.push_back(0.0);
  double at_minus_one = 0.0;
  for (std::size_t k = 0; k <= p; ++k) at_minus_one += (k % 2 == 0 ? v[k] : -v[k]);
  const double sign = (p % 2 == 0) ? 1.0 : -1.0;
  out[p] -= at_minus_one * sign * 0.5;
  out[p + 1] += at_minus_one * sign * 0.5;
  return out;
}

/// Legendre coefficients (length p+1) of (I v)'.
inline Vector reconstruct_derivative(std::span<const double> v) {
  Vector d = legendre::differentiate(reconstruct(v));
  d.pop_back();  // degree p+1 polynomial has a degree-p derivative
  return d;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver.

struct SymEigen {
  DenseMatrix vectors;  ///< columns are eigenvectors
  Vector values;        ///< sorted decreasing
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Eigenvalues sorted
/// decreasing (stable for ties); each eigenvector's first entry with
/// magnitude above 1e-12 is made positive.
inline SymEigen sym_eigen(const DenseMatrix& input) {
  const std::size_t n = input.rows();
  require(n == input.cols(), "sym_eigen: matrix not square");
  require(n >= 1, "sym_eigen: empty matrix");
  DenseMatrix a = input;
  DenseMatrix v = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      require(std::abs(a(i, j) - a(j, i)) <= 1e-12 * (1.0 + std::abs(a(i, j))),
              "sym_eigen: matrix not symmetric");

  const double scale_norm = a.frobenius();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  bool converged = scale_norm == 0.0 || off_norm() <= 1e-14 * scale_norm;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Entries negligible against both diagonals are dropped.
        if (std::abs(apq) <= 1e-18 * std::min(std::abs(app), std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= 1e-14 * scale_norm;
  }
  if (!converged) throw NumericalError("sym_eigen: Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEigen out{DenseMatrix(n, n), Vector(n)};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = a(src, src);
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(v(k, src)) > 1e-12) {
        sign = v(k, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, c) = sign * v(k, src);
  }
  return out;
}

// ---------------------------------------------------------------------------
// psi basis: (I psi_k)' = sqrt(k + 1/2) L_k.

struct PsiBasis {
  int p = 0;
  DenseMatrix Z;  ///< row k: Legendre coefficients of psi_k
  DenseMatrix T;  ///< Gram matrix of the psi_k, pentadiagonal
};

namespace detail {

// Valid for p >= 1; p = 1 uses psi_0 and the top-degree formula for psi_1.
inline PsiBasis psi_basis_unchecked(int p) {
  const auto n = static_cast<std::size_t>(p) + 1;
  PsiBasis psi{p, DenseMatrix(n, n), DenseMatrix(n, n)};
  psi.Z(0, 0) = psi.Z(0, 1) = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double s = 1.0 / std::sqrt(4.0 * k + 2.0);
    psi.Z(k, k + 1) = s;
    psi.Z(k, k - 1) = -s;
  }
  const double s = 1.0 / std::sqrt(4.0 * p + 2.0);
  psi.Z(n - 1, n - 1) = s;
  psi.Z(n - 1, n - 2) = -s;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = k; j < n && j <= k + 2; ++j) {
      double t = 0.0;
      for (std::size_t m = 0; m < n; ++m) t += psi.Z(k, m) * legendre::gram(static_cast<int>(m)) * psi.Z(j, m);
      psi.T(k, j) = psi.T(j, k) = t;
    }
  return psi;
}

}  // namespace detail

inline PsiBasis build_psi(int p) {
  require(p >= 2, "build_psi: requires p >= 2 (use build_basis for p = 0, 1)");
  return detail::psi_basis_unchecked(p);
}

/// K* with (I L_k)' = sum_j K*[k][j] L_j, for k, j = 0..p.
inline DenseMatrix build_kstar(int p) {
  require(p >= 0, "build_kstar: negative degree");
  const auto n = static_cast<std::size_t>(p) + 1;
  DenseMatrix k = legendre::derivative_expansion(p);
  // K~ also carries the (zero) diagonal; subtract x y^T.
  for (std::size_t r = 0; r < n; ++r) {
    const double x = (r % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double y = ((c % 2 == 0) ? -1.0 : 1.0) * (c + 0.5);
      k(r, c) -= x * y;
    }
  }
  return k;
}

// ---------------------------------------------------------------------------

/// Temporal eigenbasis {phi_j, lambda_j} of degree p:
///   lambda_j int (I phi_j)'(I v)' = int phi_j v  for all v in P_p,
/// normalised so that int (I phi_j)'(I phi_k)' = delta_jk.
struct TemporalBasis {
  int p = 0;
  Vector lambda;       ///< decreasing, positive
  DenseMatrix Q;       ///< column j: Legendre coefficients of phi_j
  DenseMatrix K;       ///< (I phi_k)' = sum_j K(k, j) phi_j
  Vector q_plus;       ///< phi_j(1)
  Vector q_minus;      ///< phi_j(-1)

  std::size_t size() const { return static_cast<std::size_t>(p) + 1; }

  /// Legendre coefficients of phi_j.
  Vector coefficients(std::size_t j) const {
    Vector c(size());
    for (std::size_t k = 0; k < size(); ++k) c[k] = Q(k, j);
    return c;
  }

  double eval(std::size_t j, double s) const { return legendre::eval_series(coefficients(j), s); }

  /// phi_0(s), ..., phi_p(s).
  Vector eval_all(double s) const {
    const Vector l = legendre::eval_all(p, s);
    Vector out(size(), 0.0);
    for (std::size_t k = 0; k < size(); ++k)
      for (std::size_t j = 0; j < size(); ++j) out[j] += Q(k, j) * l[k];
    return out;
  }
};

inline TemporalBasis build_basis(int p) {
  require(p >= 0, "build_basis: negative degree");
  TemporalBasis basis;
  basis.p = p;
  const std::size_t n = basis.size();
  if (p == 0) {
    // phi_0 = sqrt(2) L_0: I phi_0 = phi_0 (1 + s) / 2, so (I phi_0)' = 1/sqrt(2).
    basis.lambda = {4.0};
    basis.Q = DenseMatrix(1, 1, std::sqrt(2.0));
    basis.K = DenseMatrix(1, 1, 0.5);
  } else {
    const PsiBasis psi = detail::psi_basis_unchecked(p);
    const SymEigen eig = sym_eigen(psi.T);
    basis.lambda = eig.values;
    for (std::size_t j = 0; j < n; ++j)
      if (!(basis.lambda[j] > 0.0))
        throw NumericalError("build_basis: non-positive eigenvalue at p = " + std::to_string(p));
    basis.Q = psi.Z.transposed() * eig.vectors;
    Vector d_sqrt(n), d_inv_sqrt(n);
    for (std::size_t j = 0; j < n; ++j) {
      d_sqrt[j] = std::sqrt(legendre::gram(static_cast<int>(j)));
      d_inv_sqrt[j] = 1.0 / d_sqrt[j];
    }
    const DenseMatrix middle = scale_cols(scale_rows(build_kstar(p), d_inv_sqrt), d_sqrt);
    basis.K = eig.vectors.transposed() * middle * eig.vectors;
  }
  basis.q_plus.assign(n, 0.0);
  basis.q_minus.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      basis.q_plus[j] += basis.Q(k, j);
      basis.q_minus[j] += (k % 2 == 0 ? 1.0 : -1.0) * basis.Q(k, j);
    }
  return basis;
}

// ---------------------------------------------------------------------------

struct EigenvalueDecayReport {
  std::vector<int> degrees;
  double sup_upper_scaled = 0.0;  ///< sup over p, j of lambda_j (j+1)^2
  double inf_lower_scaled = 0.0;  ///< inf over p of lambda_p (p+1)^4
  Vector upper_scaled_per_p;      ///< max_j lambda_j (j+1)^2 for each p
  Vector lower_scaled_per_p;      ///< lambda_p (p+1)^4 for each p
  Vector bulk_slopes;             ///< slope of log lambda_j vs log(j+1), j in [p/8, p/2]
  Vector tail_slopes;             ///< same, j in [p/4, p] (crosses into the steep tail)
  double smallest_slope = 0.0;    ///< slope of log lambda_p vs log(p+1) over the list
};

namespace detail {

inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace detail

inline EigenvalueDecayReport verify_eigenvalue_decay(const std::vector<int>& degrees) {
  require(!degrees.empty(), "verify_eigenvalue_decay: empty degree list");
  EigenvalueDecayReport report;
  report.degrees = degrees;
  report.inf_lower_scaled = std::numeric_limits<double>::infinity();
  Vector log_p, log_min;
  for (int p : degrees) {
    const TemporalBasis basis = build_basis(p);
    double upper = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j)
      upper = std::max(upper, basis.lambda[j] * (j + 1.0) * (j + 1.0));
    const double lower = basis.lambda.back() * std::pow(p + 1.0, 4);
    report.upper_scaled_per_p.push_back(upper);
    report.lower_scaled_per_p.push_back(lower);
    report.sup_upper_scaled = std::max(report.sup_upper_scaled, upper);
    report.inf_lower_scaled = std::min(report.inf_lower_scaled, lower);

    auto slope_over = [&](int first, int last) {
      Vector lx, ly;
      for (int j = std::max(1, first); j <= last; ++j) {
        lx.push_back(std::log(j + 1.0));
        ly.push_back(std::log(basis.lambda[j]));
      }
      return lx.size() >= 2 ? detail::least_squares_slope(lx, ly) : 0.0;
    };
    report.bulk_slopes.push_back(slope_over(p / 8, p / 2));
    report.tail_slopes.push_back(slope_over(p / 4, p));
    log_p.push_back(std::log(p + 1.0));
    log_min.push_back(std::log(basis.lambda.back()));
  }
  report.smallest_slope = log_p.size() >= 2 ? detail::least_squares_slope(log_p, log_min) : 0.0;
  return report;
}

}  // namespace dgps
