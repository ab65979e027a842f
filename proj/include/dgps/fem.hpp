#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dgps/common.hpp"
#include "dgps/legendre.hpp"
#include "dgps/multigrid.hpp"
#include "dgps/operators.hpp"

namespace dgps {

/// f(x, y); one-dimensional problems ignore y.
using SpatialFunction = std::function<double(double, double)>;

/// Uniform mesh of (0,1) or (0,1)^2 with h = 2^-k. Interior nodes are
/// numbered lexicographically, x fastest.
struct MeshLevel {
  int dim = 1;
  int k = 2;

  std::size_t intervals() const { return std::size_t{1} << k; }
  std::size_t per_dim() const { return intervals() - 1; }
  double h() const { return 1.0 / static_cast<double>(intervals()); }
  std::size_t size() const { return dim == 1 ? per_dim() : per_dim() * per_dim(); }

  /// Dof index of grid node (i, j), or -1 on the boundary.
  std::ptrdiff_t dof(std::size_t i, std::size_t j = 1) const {
    const std::size_t n = intervals();
    if (i == 0 || i >= n) return -1;
    if (dim == 1) return static_cast<std::ptrdiff_t>(i - 1);
    if (j == 0 || j >= n) return -1;
    return static_cast<std::ptrdiff_t>((j - 1) * per_dim() + (i - 1));
  }

  std::array<double, 2> point(std::size_t dof_index) const {
    if (dim == 1) return {h() * static_cast<double>(dof_index + 1), 0.0};
    return {h() * static_cast<double>(dof_index % per_dim() + 1),
            h() * static_cast<double>(dof_index / per_dim() + 1)};
  }
};

namespace detail {

struct Element {
  std::array<std::array<double, 2>, 3> vertex{};  // unused third vertex in 1D
  std::array<std::ptrdiff_t, 3> dofs{-1, -1, -1};
};

/// Elements in a fixed order. In 2D each square is split along the diagonal
/// of positive slope.
inline void for_each_element(const MeshLevel& level, const std::function<void(const Element&)>& f) {
  const std::size_t n = level.intervals();
  const double h = level.h();
  if (level.dim == 1) {
    for (std::size_t e = 0; e < n; ++e) {
      Element el;
      el.vertex[0] = {h * static_cast<double>(e), 0.0};
      el.vertex[1] = {h * static_cast<double>(e + 1), 0.0};
      el.dofs = {level.dof(e), level.dof(e + 1), -1};
      f(el);
    }
    return;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double x0 = h * static_cast<double>(i), y0 = h * static_cast<double>(j);
      Element lower;
      lower.vertex = {{{x0, y0}, {x0 + h, y0}, {x0 + h, y0 + h}}};
      lower.dofs = {level.dof(i, j), level.dof(i + 1, j), level.dof(i + 1, j + 1)};
      f(lower);
      Element upper;
      upper.vertex = {{{x0, y0}, {x0 + h, y0 + h}, {x0, y0 + h}}};
      upper.dofs = {level.dof(i, j), level.dof(i + 1, j + 1), level.dof(i, j + 1)};
      f(upper);
    }
}

struct RulePoint {
  std::array<double, 3> bary;  // in 1D only bary[0], bary[1]
  double weight;               // fraction of the element measure
};

/// Gauss rule on an interval in barycentric form.
inline std::vector<RulePoint> interval_rule(int points) {
  const auto g = legendre::gauss_rule(points);
  std::vector<RulePoint> rule;
  for (int q = 0; q < points; ++q) {
    const double t = 0.5 * (g.nodes[q] + 1.0);
    rule.push_back({{1.0 - t, t, 0.0}, 0.5 * g.weights[q]});
  }
  return rule;
}

/// Seven-point rule on a triangle, exact for polynomials of degree 5.
inline std::vector<RulePoint> triangle_rule() {
  const double r = std::sqrt(15.0);
  const double a1 = (6.0 - r) / 21.0, w1 = (155.0 - r) / 1200.0;
  const double a2 = (6.0 + r) / 21.0, w2 = (155.0 + r) / 1200.0;
  std::vector<RulePoint> rule{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 9.0 / 40.0}};
  for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    rule.push_back({{b, a, a}, w});
    rule.push_back({{a, b, a}, w});
    rule.push_back({{a, a, b}, w});
  }
  return rule;
}

inline double measure(const MeshLevel& level) {
  return level.dim == 1 ? level.h() : 0.5 * level.h() * level.h();
}

inline std::array<double, 2> map_point(const Element& el, const RulePoint& q, int dim) {
  std::array<double, 2> x{0.0, 0.0};
  const int nv = dim == 1 ? 2 : 3;
  for (int v = 0; v < nv; ++v) {
    x[0] += q.bary[v] * el.vertex[v][0];
    x[1] += q.bary[v] * el.vertex[v][1];
  }
  return x;
}

}  // namespace detail

/// Consistent mass and stiffness matrices of P1 elements on one level.
inline std::pair<SparseMatrix, SparseMatrix> assemble_level(const MeshLevel& level) {
  const std::size_t n = level.size();
  std::vector<Triplet> mass, stiff;
  const double h = level.h();
  detail::for_each_element(level, [&](const detail::Element& el) {
    if (level.dim == 1) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          if (el.dofs[a] < 0 || el.dofs[b] < 0) continue;
          const auto ia = static_cast<std::size_t>(el.dofs[a]);
          const auto ib = static_cast<std::size_t>(el.dofs[b]);
          mass.push_back({ia, ib, h / 6.0 * (a == b ? 2.0 : 1.0)});
          stiff.push_back({ia, ib, (a == b ? 1.0 : -1.0) / h});
        }
      return;
    }
    const auto& v = el.vertex;
    const double det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) -
                       (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    const double area = 0.5 * std::abs(det);
    std::array<std::array<double, 2>, 3> grad;
    for (int a = 0; a < 3; ++a) {
      const auto& p = v[(a + 1) % 3];
      const auto& q = v[(a + 2) % 3];
      grad[a] = {(p[1] - q[1]) / det, (q[0] - p[0]) / det};
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (el.dofs[a] < 0 || el.dofs[b] < 0) continue;
        const auto ia = static_cast<std::size_t>(el.dofs[a]);
        const auto ib = static_cast<std::size_t>(el.dofs[b]);
        mass.push_back({ia, ib, area / 12.0 * (a == b ? 2.0 : 1.0)});
        const double k = area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
        if (k != 0.0) stiff.push_back({ia, ib, k});
      }
  });
  return {SparseMatrix::from_triplets(n, n, std::move(mass)),
          SparseMatrix::from_triplets(n, n, std::move(stiff))};
}

/// Linear interpolation from the level with k - 1 to `fine`.
inline SparseMatrix prolongation(const MeshLevel& fine) {
  require(fine.k >= 2, "prolongation: fine level must have k >= 2");
  const MeshLevel coarse{fine.dim, fine.k - 1};
  std::vector<Triplet> t;
  const std::size_t n = fine.intervals();
  auto add = [&](std::size_t row, std::ptrdiff_t col, double w) {
    if (col >= 0) t.push_back({row, static_cast<std::size_t>(col), w});
  };
  if (fine.dim == 1) {
    for (std::size_t i = 1; i < n; ++i) {
      const auto row = static_cast<std::size_t>(fine.dof(i));
      if (i % 2 == 0) {
        add(row, coarse.dof(i / 2), 1.0);
      } else {
        add(row, coarse.dof((i - 1) / 2), 0.5);
        add(row, coarse.dof((i + 1) / 2), 0.5);
      }
    }
  } else {
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t i = 1; i < n; ++i) {
        const auto row = static_cast<std::size_t>(fine.dof(i, j));
        const bool ei = i % 2 == 0, ej = j % 2 == 0;
        if (ei && ej) {
          add(row, coarse.dof(i / 2, j / 2), 1.0);
        } else if (!ei && ej) {
          add(row, coarse.dof((i - 1) / 2, j / 2), 0.5);
          add(row, coarse.dof((i + 1) / 2, j / 2), 0.5);
        } else if (ei && !ej) {
          add(row, coarse.dof(i / 2, (j - 1) / 2), 0.5);
          add(row, coarse.dof(i / 2, (j + 1) / 2), 0.5);
        } else {
          // midpoint of a coarse diagonal edge
          add(row, coarse.dof((i - 1) / 2, (j - 1) / 2), 0.5);
          add(row, coarse.dof((i + 1) / 2, (j + 1) / 2), 0.5);
        }
      }
  }
  return SparseMatrix::from_triplets(fine.size(), coarse.size(), std::move(t));
}

/// Levels k = 2, ..., kmax with their matrices and prolongations.
struct MeshHierarchy {
  int dim = 1;
  std::vector<MeshLevel> levels;
  std::shared_ptr<const MgLevels> mg;

  const MeshLevel& finest() const { return levels.back(); }
};

inline constexpr int kCoarsestLevel = 2;
/// Above this 2D level exact solves fall back to the near-exact solver.
inline constexpr int kMaxDirect2d = 8;
inline constexpr double kNearExactTolerance = 1e-13;

inline std::shared_ptr<const MeshHierarchy> build_hierarchy(int dim, int k) {
  require(dim == 1 || dim == 2, "build_hierarchy: dim must be 1 or 2");
  if (dim == 1)
    require(k >= 2 && k <= 20, "build_hierarchy: 1D needs 2 <= k <= 20, got " + std::to_string(k));
  else
    require(k >= 2 && k <= 10, "build_hierarchy: 2D needs 2 <= k <= 10, got " + std::to_string(k));
  auto mesh = std::make_shared<MeshHierarchy>();
  auto mg = std::make_shared<MgLevels>();
  mesh->dim = dim;
  for (int l = kCoarsestLevel; l <= k; ++l) {
    const MeshLevel level{dim, l};
    mesh->levels.push_back(level);
    auto [m, a] = assemble_level(level);
    mg->mass.push_back(std::move(m));
    mg->stiffness.push_back(std::move(a));
    mg->prolongation.push_back(l == kCoarsestLevel ? SparseMatrix() : prolongation(level));
  }
  mesh->mg = std::move(mg);
  return mesh;
}

/// Solver factory over a hierarchy: banded Cholesky for exact solves (or the
/// near-exact CG + multigrid solver on large 2D meshes), V-cycles otherwise.
inline SolverFactory hierarchy_factory(std::shared_ptr<const MeshHierarchy> mesh) {
  return [mesh](double alpha, double beta, const SolverMode& mode) -> SolverPtr {
    const auto& mg = mesh->mg;
    switch (mode.kind) {
      case SolverMode::Kind::exact:
        if (mesh->dim == 2 && mesh->finest().k > kMaxDirect2d)
          return std::make_shared<NearExactSolver>(mg, alpha, beta, kNearExactTolerance);
        return std::make_shared<CholeskySolver>(
            SparseMatrix::combine(alpha, mg->mass.back(), beta, mg->stiffness.back()));
      case SolverMode::Kind::iterative:
        return std::make_shared<NearExactSolver>(mg, alpha, beta, mode.tolerance);
      case SolverMode::Kind::vcycles:
        return std::make_shared<MgSolver>(mg, alpha, beta, mode.cycles);
    }
    throw ValidationError("hierarchy_factory: unknown solver mode");
  };
}

struct Discretization {
  std::shared_ptr<const MeshHierarchy> mesh;
  SpatialPair pair;

  const MeshLevel& level() const { return mesh->finest(); }
};

inline Discretization discretize(int dim, int k) {
  auto mesh = build_hierarchy(dim, k);
  SpatialPair pair = make_pair(mesh->mg->mass.back(), mesh->mg->stiffness.back(),
                               hierarchy_factory(mesh));
  return {std::move(mesh), std::move(pair)};
}

inline SpatialPair assemble_1d(int k) { return discretize(1, k).pair; }
inline SpatialPair assemble_2d(int k) {
  require(k >= 2 && k <= 10, "assemble_2d: needs 2 <= k <= 10");
  return discretize(2, k).pair;
}

// ---------------------------------------------------------------------------

/// Entries int g * hat_i, per-element quadrature: 3-point Gauss in 1D, the
/// 7-point degree-5 rule in 2D.
inline Vector load_vector(const MeshLevel& level, const SpatialFunction& g) {
  Vector b(level.size(), 0.0);
  const auto rule = level.dim == 1 ? detail::interval_rule(3) : detail::triangle_rule();
  const double measure = detail::measure(level);
  const int nv = level.dim == 1 ? 2 : 3;
  detail::for_each_element(level, [&](const detail::Element& el) {
    for (const auto& q : rule) {
      const auto x = detail::map_point(el, q, level.dim);
      const double gw = g(x[0], x[1]) * q.weight * measure;
      for (int v = 0; v < nv; ++v)
        if (el.dofs[v] >= 0) b[static_cast<std::size_t>(el.dofs[v])] += gw * q.bary[v];
    }
  });
  return b;
}

/// Nodal interpolant.
inline Vector interpolate(const MeshLevel& level, const SpatialFunction& f) {
  Vector c(level.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto x = level.point(i);
    c[i] = f(x[0], x[1]);
  }
  return c;
}

/// ||u_h - reference||_{L^2} with a rule of degree 5 on every element.
inline double l2_error(const MeshLevel& level, std::span<const double> coeffs,
                       const SpatialFunction& reference) {
  require(coeffs.size() == level.size(), "l2_error: dimension mismatch");
  const auto rule = level.dim == 1 ? detail::interval_rule(3) : detail::triangle_rule();
  const double measure = detail::measure(level);
  const int nv = level.dim == 1 ? 2 : 3;
  double sum = 0.0;
  detail::for_each_element(level, [&](const detail::Element& el) {
    double local = 0.0;
    for (const auto& q : rule) {
      const auto x = detail::map_point(el, q, level.dim);
      double uh = 0.0;
      for (int v = 0; v < nv; ++v)
        if (el.dofs[v] >= 0) uh += q.bary[v] * coeffs[static_cast<std::size_t>(el.dofs[v])];
      const double d = uh - reference(x[0], x[1]);
      local += q.weight * d * d;
    }
    sum += local * measure;
  });
  return std::sqrt(sum);
}

/// Conjugate gradients with Jacobi preconditioning, for well-conditioned
/// matrices such as M.
inline Vector jacobi_cg(const SparseMatrix& a, std::span<const double> b, double tol,
                        int maxit = 1000) {
  const Vector d = a.diagonal_values();
  Vector x(b.size(), 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return x;
  Vector r(b.begin(), b.end());
  Vector z(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / d[i];
  Vector p = z;
  double rz = dot(r, z);
  for (int it = 0; it < maxit; ++it) {
    const Vector q = a.multiply(p);
    const double alpha = rz / dot(p, q);
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    if (norm2(r) <= tol * bnorm) return x;
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / d[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  throw NumericalError("jacobi_cg: no convergence in " + std::to_string(maxit) + " iterations");
}

/// L^2 projection: M c = load(f).
inline Vector l2_projection(const MeshLevel& level, const SparseMatrix& mass,
                            const SpatialFunction& f) {
  return jacobi_cg(mass, load_vector(level, f), 1e-14);
}

// ---------------------------------------------------------------------------

/// Heat equation on (0,1)^2 with u0 = x(1-x) sin(pi y), zero source and
/// homogeneous Dirichlet data.
struct HeatProblem {
  double T_final = 0.1;
  SpatialFunction u0 = [](double x, double y) {
    return x * (1.0 - x) * std::sin(std::numbers::pi * y);
  };
  std::string u0_description = "x(1-x) sin(pi y)";
  int series_truncation = 41;  ///< cap on the odd mode index
};

/// Sine coefficient of x(1-x): 8 / (n pi)^3 for odd n, zero for even n.
inline double heat_mode_coefficient(int n) {
  if (n % 2 == 0) return 0.0;
  const double npi = n * std::numbers::pi;
  return 8.0 / (npi * npi * npi);
}

/// Largest odd mode index used at time t: the first whose term falls below
/// 1e-14, capped at the problem's truncation.
inline int heat_series_terms(const HeatProblem& problem, double t) {
  int n = 1;
  while (n < problem.series_truncation) {
    const double term = heat_mode_coefficient(n) *
                        std::exp(-(n * n + 1.0) * std::numbers::pi * std::numbers::pi * t);
    if (term < 1e-14) break;
    n += 2;
  }
  return n;
}

inline SpatialFunction exact_heat_solution(const HeatProblem& problem, double t) {
  require(t >= 0.0, "exact_heat_solution: negative time");
  const int terms = heat_series_terms(problem, t);
  std::vector<double> amp;
  for (int n = 1; n <= terms; n += 2)
    amp.push_back(heat_mode_coefficient(n) *
                  std::exp(-(n * n + 1.0) * std::numbers::pi * std::numbers::pi * t));
  return [amp](double x, double y) {
    double s = 0.0;
    for (std::size_t m = 0; m < amp.size(); ++m)
      s += amp[m] * std::sin((2.0 * m + 1.0) * std::numbers::pi * x);
    return s * std::sin(std::numbers::pi * y);
  };
}

}  // namespace dgps
