#include <gtest/gtest.h>

#include <cmath>

#include "dgps/legendre.hpp"

namespace dgps {
namespace {

TEST(LegendreEval, EndpointsAndClosedForms) {
  EXPECT_DOUBLE_EQ(legendre::eval(5, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(legendre::eval(5, -1.0), -1.0);
  EXPECT_DOUBLE_EQ(legendre::eval(4, -1.0), 1.0);
  EXPECT_DOUBLE_EQ(legendre::eval(2, 0.0), -0.5);
  for (double s : {-0.9, -0.3, 0.1, 0.77}) {
    EXPECT_NEAR(legendre::eval(3, s), 0.5 * (5 * s * s * s - 3 * s), 1e-15);
    EXPECT_NEAR(legendre::eval(4, s), (35 * std::pow(s, 4) - 30 * s * s + 3) / 8.0, 1e-15);
  }
}

TEST(LegendreEval, RejectsPointsOutsideInterval) {
  EXPECT_THROW(legendre::eval(3, 1.0 + 1e-9), ValidationError);
  EXPECT_NO_THROW(legendre::eval(3, 1.0 + 1e-13));
  EXPECT_THROW(legendre::eval(-1, 0.0), ValidationError);
}

TEST(LegendreDerivative, LowRows) {
  const DenseMatrix d = legendre::derivative_expansion(4);
  EXPECT_EQ(d(1, 0), 1.0);
  EXPECT_EQ(d(1, 1), 0.0);
  EXPECT_EQ(d(2, 0), 0.0);
  EXPECT_EQ(d(2, 1), 3.0);
  EXPECT_EQ(d(2, 2), 0.0);
  // L_3' = 15/2 s^2 - 3/2 = L_0 + 5 L_2.
  EXPECT_EQ(d(3, 0), 1.0);
  EXPECT_EQ(d(3, 2), 5.0);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(d(0, j), 0.0);
}

TEST(LegendreDerivative, MatchesFiniteDifferences) {
  const int kmax = 16;
  const DenseMatrix d = legendre::derivative_expansion(kmax);
  const double step = 1e-5;
  for (int k = 0; k <= kmax; ++k) {
    for (int i = 1; i <= 20; ++i) {
      const double s = -1.0 + 2.0 * i / 21.0;
      const double fd = (legendre::eval(k, s + step) - legendre::eval(k, s - step)) / (2 * step);
      const double series = legendre::eval_series(d.row(k), s);
      EXPECT_NEAR(series, fd, 1e-6) << "k=" << k << " s=" << s;
    }
  }
}

TEST(LegendreDerivative, RowParityOppositeToDegree) {
  const DenseMatrix d = legendre::derivative_expansion(12);
  for (std::size_t k = 0; k <= 12; ++k)
    for (std::size_t j = 0; j <= 12; ++j)
      if ((k + j) % 2 == 0 || j >= k) {
        EXPECT_EQ(d(k, j), 0.0);
      }
}

// ||(L_p - L_{p+1})'||^2 = 2 (p+1)^2.
TEST(LegendreDerivative, RadauDifferenceNormIdentity) {
  for (int p = 0; p <= 64; ++p) {
    const DenseMatrix d = legendre::derivative_expansion(p + 1);
    double norm_sq = 0.0;
    for (int j = 0; j <= p + 1; ++j) {
      const double c = d(p, j) - d(p + 1, j);
      norm_sq += c * c * legendre::gram(j);
    }
    const double expected = 2.0 * (p + 1.0) * (p + 1.0);
    EXPECT_NEAR(norm_sq / expected, 1.0, 1e-10) << "p=" << p;
  }
}

TEST(LegendreWorkspace, GramDiagonal) {
  const auto ws = legendre::make_workspace(6);
  ASSERT_EQ(ws.gram_diag.size(), 7u);
  for (int k = 0; k <= 6; ++k) EXPECT_DOUBLE_EQ(ws.gram_diag[k], 2.0 / (2 * k + 1));
}

TEST(GaussRule, SmallRules) {
  const auto one = legendre::gauss_rule(1);
  EXPECT_EQ(one.nodes[0], 0.0);
  EXPECT_DOUBLE_EQ(one.weights[0], 2.0);
  const auto two = legendre::gauss_rule(2);
  EXPECT_NEAR(two.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(two.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(two.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(two.weights[1], 1.0, 1e-15);
  EXPECT_THROW(legendre::gauss_rule(0), ValidationError);
}

TEST(GaussRule, ExactForMonomials) {
  for (int n : {3, 7, 20, 65}) {
    const auto rule = legendre::gauss_rule(n);
    for (int m = 0; m <= 2 * n - 1; ++m) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += rule.weights[i] * std::pow(rule.nodes[i], m);
      const double exact = (m % 2 == 0) ? 2.0 / (m + 1) : 0.0;
      EXPECT_NEAR(q, exact, 1e-13) << "n=" << n << " m=" << m;
    }
  }
}

TEST(GaussRule, LegendreOrthogonality) {
  const auto four = legendre::gauss_rule(4);
  double l3l3 = 0.0;
  for (int i = 0; i < 4; ++i) l3l3 += four.weights[i] * std::pow(legendre::eval(3, four.nodes[i]), 2);
  EXPECT_NEAR(l3l3, 2.0 / 7.0, 1e-14);

  const auto rule = legendre::gauss_rule(33);
  for (int k = 0; k <= 32; ++k)
    for (int j = 0; j <= 32; ++j) {
      double q = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        q += rule.weights[i] * legendre::eval(k, rule.nodes[i]) * legendre::eval(j, rule.nodes[i]);
      EXPECT_NEAR(q, k == j ? legendre::gram(k) : 0.0, 1e-13) << k << "," << j;
    }
}

}  // namespace
}  // namespace dgps
