#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "dgps/common.hpp"
#include "dgps/dense.hpp"

namespace dgps::legendre {

/// L_k(s) by the three-term recurrence (k+1) L_{k+1} = (2k+1) s L_k - k L_{k-1}.
inline double eval(int k, double s) {
  require(k >= 0, "legendre::eval: negative degree");
  if (std::abs(s) > 1.0 + 1e-12)
    throw ValidationError("legendre::eval: point " + std::to_string(s) + " outside [-1, 1]");
  if (s == 1.0) return 1.0;
  if (s == -1.0) return (k % 2 == 0) ? 1.0 : -1.0;
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = s;
  for (int n = 1; n < k; ++n) {
    const double next = ((2.0 * n + 1.0) * s * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Values L_0(s), ..., L_n(s).
inline Vector eval_all(int n, double s) {
  require(n >= 0, "legendre::eval_all: negative degree");
  Vector v(static_cast<std::size_t>(n) + 1);
  v[0] = 1.0;
  if (n >= 1) v[1] = s;
  for (int k = 1; k < n; ++k)
    v[k + 1] = ((2.0 * k + 1.0) * s * v[k] - k * v[k - 1]) / (k + 1.0);
  return v;
}

/// Evaluates sum_k coeffs[k] L_k(s).
inline double eval_series(std::span<const double> coeffs, double s) {
  if (coeffs.empty()) return 0.0;
  const Vector values = eval_all(static_cast<int>(coeffs.size()) - 1, s);
  return dot(coeffs, values);
}

/// ||L_k||^2 on (-1, 1).
inline double gram(int k) { return 2.0 / (2.0 * k + 1.0); }

/// Row k holds the Legendre coefficients of L_k'. Lower triangular with
/// entries (1 - (-1)^(k-j)) (j + 1/2) for j < k.
inline DenseMatrix derivative_expansion(int p) {
  require(p >= 0, "legendre::derivative_expansion: negative degree");
  const auto n = static_cast<std::size_t>(p) + 1;
  DenseMatrix d(n, n);
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t j = (k % 2 == 0) ? 1 : 0; j < k; j += 2) d(k, j) = 2.0 * (j + 0.5);
  return d;
}

/// Coefficients of v' given the Legendre coefficients of v (same length).
inline Vector differentiate(std::span<const double> coeffs) {
  const std::size_t n = coeffs.size();
  Vector out(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    if (coeffs[k] == 0.0) continue;
    for (std::size_t j = (k % 2 == 0) ? 1 : 0; j < k; j += 2) out[j] += coeffs[k] * 2.0 * (j + 0.5);
  }
  return out;
}

struct Workspace {
  int pmax = 0;
  Vector gram_diag;
  DenseMatrix deriv_matrix;
};

inline Workspace make_workspace(int pmax) {
  require(pmax >= 0, "legendre::make_workspace: negative degree");
  Workspace ws{pmax, Vector(static_cast<std::size_t>(pmax) + 1), derivative_expansion(pmax)};
  for (int k = 0; k <= pmax; ++k) ws.gram_diag[k] = gram(k);
  return ws;
}

struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// n-point Gauss-Legendre rule on (-1, 1). Nodes by Newton iteration on L_n
/// from Chebyshev-type initial guesses; the rule is symmetrised exactly.
inline QuadratureRule gauss_rule(int n) {
  require(n >= 1, "legendre::gauss_rule: need at least one point");
  QuadratureRule rule{Vector(n), Vector(n)};
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      // L_n(x) and L_n'(x) via the recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      derivative = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / derivative;
      x -= dx;
      if (std::abs(dx) <= 1e-15) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericalError("legendre::gauss_rule: Newton did not converge for n = " +
                           std::to_string(n));
    // Weight from the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 1; k < n; ++k) {
      const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    derivative = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    // Nodes ascending: mirror pairs at i and n-1-i.
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace dgps::legendre
