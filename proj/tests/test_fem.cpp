#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dgps/fem.hpp"
#include "oracles.hpp"

namespace dgps {
namespace {

constexpr double kPi = std::numbers::pi;

// Hat function of interior grid node (i, j) on a level, evaluated pointwise.
// In 2D the positive-slope diagonal split makes the hat piecewise linear in
// (x, y) with the support hexagon {|dx| <= 1, |dy| <= 1, |dx - dy| <= 1}.
double hat(const MeshLevel& level, std::size_t dof_index, double x, double y) {
  const auto c = level.point(dof_index);
  const double dx = (x - c[0]) / level.h();
  if (level.dim == 1) return std::max(0.0, 1.0 - std::abs(dx));
  const double dy = (y - c[1]) / level.h();
  if (dx >= 0 && dy >= 0) return std::max(0.0, 1.0 - std::max(dx, dy));
  if (dx <= 0 && dy <= 0) return std::max(0.0, 1.0 - std::max(-dx, -dy));
  return std::max(0.0, 1.0 - std::abs(dx) - std::abs(dy));
}

TEST(Assemble1d, DimensionsAndStencils) {
  const auto pair = assemble_1d(5);
  EXPECT_EQ(pair.size(), 31u);
  const double h = 1.0 / 32;
  EXPECT_DOUBLE_EQ(pair.M.at(10, 10), 4.0 * h / 6.0);
  EXPECT_DOUBLE_EQ(pair.M.at(10, 11), h / 6.0);
  EXPECT_DOUBLE_EQ(pair.A.at(10, 10), 2.0 / h);
  EXPECT_DOUBLE_EQ(pair.A.at(10, 9), -1.0 / h);
  EXPECT_EQ(pair.A.at(10, 12), 0.0);
  // Row sums away from the boundary: integral of a hat = h.
  for (std::size_t i = 1; i + 1 < pair.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < pair.size(); ++j) s += pair.M.at(i, j);
    EXPECT_NEAR(s, h, 1e-15);
  }
  // Linear functions are in the interior kernel of A.
  Vector lin(pair.size());
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 3.0 + 2.0 * (i + 1) * h;
  const Vector r = pair.A.multiply(lin);
  for (std::size_t i = 1; i + 1 < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-12);
}

TEST(Assemble1d, RangeValidation) {
  EXPECT_THROW(assemble_1d(1), ValidationError);
  EXPECT_THROW(assemble_1d(21), ValidationError);
  EXPECT_THROW(assemble_2d(11), ValidationError);
  EXPECT_THROW(build_hierarchy(3, 4), ValidationError);
}

TEST(Assemble2d, StencilsForDiagonalSplit) {
  const auto disc = discretize(2, 4);
  const auto& pair = disc.pair;
  const auto& level = disc.level();
  EXPECT_EQ(pair.size(), 225u);
  const double h = level.h();
  const auto c = static_cast<std::size_t>(level.dof(7, 7));
  EXPECT_DOUBLE_EQ(pair.A.at(c, c), 4.0);
  for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    const auto nb = static_cast<std::size_t>(level.dof(7 + di, 7 + dj));
    EXPECT_DOUBLE_EQ(pair.A.at(c, nb), -1.0);
    EXPECT_DOUBLE_EQ(pair.M.at(c, nb), h * h / 12.0);
  }
  const auto ne = static_cast<std::size_t>(level.dof(8, 8));
  const auto sw = static_cast<std::size_t>(level.dof(6, 6));
  const auto nw = static_cast<std::size_t>(level.dof(6, 8));
  EXPECT_EQ(pair.A.at(c, ne), 0.0);
  EXPECT_DOUBLE_EQ(pair.M.at(c, ne), h * h / 12.0);
  EXPECT_DOUBLE_EQ(pair.M.at(c, sw), h * h / 12.0);
  EXPECT_EQ(pair.M.at(c, nw), 0.0);
  EXPECT_DOUBLE_EQ(pair.M.at(c, c), h * h / 2.0);
  EXPECT_TRUE(pair.M.is_symmetric());
  EXPECT_TRUE(pair.A.is_symmetric());
}

TEST(Assemble2d, InteriorRowSums) {
  const auto disc = discretize(2, 4);
  const auto& level = disc.level();
  const double h = level.h();
  for (std::size_t i = 2; i <= 14; ++i)
    for (std::size_t j = 2; j <= 14; ++j) {
      const auto row = static_cast<std::size_t>(level.dof(i, j));
      double ms = 0.0, as = 0.0;
      for (std::size_t col = 0; col < level.size(); ++col) {
        ms += disc.pair.M.at(row, col);
        as += disc.pair.A.at(row, col);
      }
      EXPECT_NEAR(ms, h * h, 1e-15);
      EXPECT_NEAR(as, 0.0, 1e-13);
    }
}

TEST(Assemble2d, MassMatchesQuadratureOfHats) {
  const MeshLevel level{2, 2};
  const auto [m, a] = assemble_level(level);
  // Oracle: edge-midpoint rule on a nested subgrid, where hats are linear and
  // their products quadratic.
  const int sub = 16;
  const double hs = 1.0 / (4 * sub);
  auto integrate_product = [&](std::size_t p, std::size_t q) {
    double s = 0.0;
    for (int ci = 0; ci < 4 * sub; ++ci)
      for (int cj = 0; cj < 4 * sub; ++cj)
        for (int tri = 0; tri < 2; ++tri) {
          const double x0 = ci * hs, y0 = cj * hs;
          const std::array<std::array<double, 2>, 3> v =
              tri == 0 ? std::array<std::array<double, 2>, 3>{{{x0, y0}, {x0 + hs, y0}, {x0 + hs, y0 + hs}}}
                       : std::array<std::array<double, 2>, 3>{{{x0, y0}, {x0 + hs, y0 + hs}, {x0, y0 + hs}}};
          // edge-midpoint rule, exact for quadratics
          for (int e = 0; e < 3; ++e) {
            const double x = 0.5 * (v[e][0] + v[(e + 1) % 3][0]);
            const double y = 0.5 * (v[e][1] + v[(e + 1) % 3][1]);
            s += hs * hs / 6.0 * hat(level, p, x, y) * hat(level, q, x, y);
          }
        }
    return s;
  };
  for (std::size_t p = 0; p < level.size(); ++p)
    for (std::size_t q = p; q < level.size(); ++q)
      EXPECT_NEAR(m.at(p, q), integrate_product(p, q), 1e-14) << p << "," << q;
}

TEST(Assemble2d, SpaceTimeDofCounts) {
  EXPECT_EQ(3 * (MeshLevel{2, 6}.size()), 11907u);
  EXPECT_EQ(5 * (MeshLevel{2, 9}.size()), 1305605u);
  EXPECT_EQ(3 * (MeshLevel{2, 10}.size()), 3139587u);
}

TEST(Prolongation, ReproducesCoarseHats) {
  for (int dim : {1, 2}) {
    const MeshLevel fine{dim, 4}, coarse{dim, 3};
    const SparseMatrix p = prolongation(fine);
    ASSERT_EQ(p.rows(), fine.size());
    ASSERT_EQ(p.cols(), coarse.size());
    for (std::size_t c = 0; c < coarse.size(); c += 3) {
      Vector e(coarse.size(), 0.0);
      e[c] = 1.0;
      const Vector v = p.multiply(e);
      for (std::size_t f = 0; f < fine.size(); ++f) {
        const auto x = fine.point(f);
        EXPECT_NEAR(v[f], hat(coarse, c, x[0], x[1]), 1e-15);
      }
    }
    // Constant-one interior field: interpolation of sum of coarse hats.
    const Vector ones = p.multiply(Vector(coarse.size(), 1.0));
    for (std::size_t f = 0; f < fine.size(); ++f) {
      const auto x = fine.point(f);
      double expected = 0.0;
      for (std::size_t c = 0; c < coarse.size(); ++c) expected += hat(coarse, c, x[0], x[1]);
      EXPECT_NEAR(ones[f], expected, 1e-15);
    }
  }
}

TEST(Prolongation, GalerkinConsistency) {
  for (int dim : {1, 2}) {
    const auto mesh = build_hierarchy(dim, dim == 1 ? 7 : 5);
    const auto& mg = *mesh->mg;
    for (std::size_t l = 1; l < mg.depth(); ++l) {
      const SparseMatrix& p = mg.prolongation[l];
      const SparseMatrix pt = p.transposed();
      for (const auto* pair : {&mg.stiffness, &mg.mass}) {
        const SparseMatrix galerkin = SparseMatrix::product(pt, SparseMatrix::product((*pair)[l], p));
        const SparseMatrix& coarse = (*pair)[l - 1];
        const double scale = coarse.max_abs();
        for (std::size_t i = 0; i < coarse.rows(); ++i)
          for (std::size_t j = 0; j < coarse.cols(); ++j)
            ASSERT_NEAR(galerkin.at(i, j), coarse.at(i, j), 1e-10 * scale);
      }
    }
  }
}

TEST(Hierarchy, LevelsAndSizes) {
  const auto mesh = build_hierarchy(2, 5);
  ASSERT_EQ(mesh->levels.size(), 4u);
  EXPECT_EQ(mesh->levels.front().k, 2);
  EXPECT_EQ(mesh->finest().k, 5);
  for (std::size_t l = 0; l < mesh->levels.size(); ++l) {
    const std::size_t n = (std::size_t{1} << mesh->levels[l].k) - 1;
    EXPECT_EQ(mesh->mg->mass[l].rows(), n * n);
  }
}

TEST(LoadVector, ZeroAndConstant) {
  for (int dim : {1, 2}) {
    const MeshLevel level{dim, 4};
    const Vector zero = load_vector(level, [](double, double) { return 0.0; });
    EXPECT_EQ(zero, Vector(level.size(), 0.0));
    const Vector one = load_vector(level, [](double, double) { return 1.0; });
    const double expected = dim == 1 ? level.h() : level.h() * level.h();
    for (double v : one) EXPECT_NEAR(v, expected, 1e-15);
  }
}

TEST(LoadVector, HatGivesMassColumn) {
  for (int dim : {1, 2}) {
    const MeshLevel level{dim, 3};
    const auto [m, a] = assemble_level(level);
    for (std::size_t j = 0; j < level.size(); j += 5) {
      const Vector b = load_vector(level, [&](double x, double y) { return hat(level, j, x, y); });
      for (std::size_t i = 0; i < level.size(); ++i) EXPECT_NEAR(b[i], m.at(i, j), 1e-15);
    }
  }
}

TEST(LoadVector, ExactForQuadratics) {
  // g = x^2 in 1D: int x^2 hat_i = h^3 (i^2 + 1/6) with x_i = i h.
  const MeshLevel level{1, 4};
  const Vector b = load_vector(level, [](double x, double) { return x * x; });
  const double h = level.h();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    EXPECT_NEAR(b[i], h * h * h * (n * n + 1.0 / 6.0), 1e-16);
  }
}

TEST(HeatSeries, Oracles) {
  const HeatProblem problem;
  EXPECT_NEAR(heat_mode_coefficient(1), 8.0 / (kPi * kPi * kPi), 1e-16);
  EXPECT_EQ(heat_mode_coefficient(2), 0.0);
  // Sine coefficient by quadrature: 2 int_0^1 x(1-x) sin(pi x) dx.
  const double b1 = oracle::integrate(20, [](double s) {
    const double x = 0.5 * (s + 1.0);
    return x * (1.0 - x) * std::sin(kPi * x);
  });
  EXPECT_NEAR(heat_mode_coefficient(1), b1, 1e-14);
  const auto u0 = exact_heat_solution(problem, 0.0);
  EXPECT_NEAR(u0(0.5, 0.5), 0.25, 1e-4);
  const auto ut = exact_heat_solution(problem, problem.T_final);
  for (double s : {0.0, 0.3, 1.0}) {
    EXPECT_NEAR(ut(0.0, s), 0.0, 1e-15);
    EXPECT_NEAR(ut(s, 0.0), 0.0, 1e-15);
    EXPECT_NEAR(ut(1.0, s), 0.0, 1e-15);
    EXPECT_NEAR(ut(s, 1.0), 0.0, 1e-15);
  }
  // At t = T the exponential leaves one or two modes above 1e-14.
  EXPECT_LE(heat_series_terms(problem, problem.T_final), 9);
  EXPECT_EQ(heat_series_terms(problem, 0.0), 41);
  // Single-mode check: u(x, y, t) = b_1 exp(-2 pi^2 t) sin(pi x) sin(pi y) + higher modes.
  const double t = 0.05;
  const auto u = exact_heat_solution(problem, t);
  double expected = 0.0;
  for (int n = 1; n <= 41; n += 2)
    expected += 8.0 / std::pow(n * kPi, 3) * std::exp(-(n * n + 1.0) * kPi * kPi * t) *
                std::sin(n * kPi * 0.3) * std::sin(kPi * 0.6);
  EXPECT_NEAR(u(0.3, 0.6), expected, 1e-14);
}

TEST(L2Error, ClosedForms) {
  const HeatProblem problem;
  const MeshLevel level{2, 5};
  EXPECT_NEAR(l2_error(level, Vector(level.size(), 0.0), problem.u0), std::sqrt(1.0 / 60.0), 1e-7);
  // Reference equal to the P1 field itself.
  SplitMix64 rng(12);
  const Vector c = rng.vector(level.size());
  const auto field = [&](double x, double y) {
    double v = 0.0;
    const std::size_t n = level.intervals();
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x * n), n - 1);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(y * n), n - 1);
    for (std::size_t a = i; a <= i + 1; ++a)
      for (std::size_t b = j; b <= j + 1; ++b) {
        const auto d = level.dof(a, b);
        if (d >= 0) v += c[static_cast<std::size_t>(d)] * hat(level, static_cast<std::size_t>(d), x, y);
      }
    return v;
  };
  EXPECT_LE(l2_error(level, c, field), 1e-12);
}

TEST(L2Error, SecondOrderInterpolation) {
  const HeatProblem problem;
  for (int dim : {1, 2}) {
    const auto reference = exact_heat_solution(problem, 0.02);
    const auto ref1d = [&](double x, double) { return reference(x, 0.5); };
    std::vector<double> errors;
    for (int k = 3; k <= 6; ++k) {
      const MeshLevel level{dim, k};
      const SpatialFunction f = dim == 1 ? SpatialFunction(ref1d) : SpatialFunction(reference);
      errors.push_back(l2_error(level, interpolate(level, f), f));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double slope = std::log2(errors[i - 1] / errors[i]);
      EXPECT_GE(slope, 1.9) << "dim=" << dim;
      EXPECT_LE(slope, 2.1) << "dim=" << dim;
    }
  }
}

TEST(L2Projection, ReproducesP1Fields) {
  const auto disc = discretize(2, 4);
  const auto& level = disc.level();
  const std::size_t j = level.size() / 2;
  const Vector c = l2_projection(level, disc.pair.M, [&](double x, double y) { return hat(level, j, x, y); });
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], i == j ? 1.0 : 0.0, 1e-12);
}

TEST(SolverFactory, ModesAndDescriptions) {
  const auto disc = discretize(2, 5);
  EXPECT_NE(disc.pair.a_solver()->description().find("Cholesky"), std::string::npos);
  EXPECT_EQ(disc.pair.shifted_solver(0.1, SolverMode::vcycles(2))->mode().cycles, 2);
  const auto near = disc.pair.shifted_solver(0.1, SolverMode::iterative(1e-13));
  SplitMix64 rng(4);
  const Vector b = rng.vector(disc.pair.size());
  const Vector x = near->solve(b);
  Vector r = near->matrix().multiply(x);
  axpy(-1.0, b, r);
  EXPECT_LE(norm2(r), 1e-13 * norm2(b));
}

}  // namespace
}  // namespace dgps
