#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "dgps/temporal_basis.hpp"
#include "oracles.hpp"

namespace dgps {
namespace {

using oracle::integrate;
using oracle::legendre_derivative_at;
using oracle::poly_at;
using oracle::poly_derivative_at;
using oracle::reconstruction_derivative_at;

TEST(SymEigen, IdentityAndDiagonal) {
  const auto id = sym_eigen(DenseMatrix::identity(4));
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(id.values[j], 1.0);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(id.vectors(k, j), k == j ? 1.0 : 0.0);
  }
  DenseMatrix d(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const auto e = sym_eigen(d);
  EXPECT_EQ(e.values[0], 3.0);
  EXPECT_EQ(e.values[1], 1.0);
  EXPECT_EQ(e.vectors(0, 0), 0.0);
  EXPECT_EQ(e.vectors(1, 0), 1.0);
  EXPECT_EQ(e.vectors(0, 1), 1.0);
}

TEST(SymEigen, TwoByTwo) {
  DenseMatrix m(2, 2, 1.0);
  m(0, 0) = m(1, 1) = 2.0;
  const auto e = sym_eigen(m);
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  EXPECT_NEAR(e.vectors(0, 0), std::sqrt(0.5), 1e-14);
  EXPECT_GT(e.vectors(0, 1), 0.0);  // sign convention
}

TEST(SymEigen, RandomSymmetricResidualAndOrthogonality) {
  SplitMix64 rng(7);
  const std::size_t n = 40;
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.symmetric();
  const auto e = sym_eigen(m);
  for (std::size_t j = 0; j + 1 < n; ++j) EXPECT_GE(e.values[j], e.values[j + 1]);
  const DenseMatrix vtv = e.vectors.transposed() * e.vectors;
  const DenseMatrix mv = m * e.vectors;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-12);
      EXPECT_NEAR(mv(i, j), e.vectors(i, j) * e.values[j], 1e-12);
    }
}

TEST(SymEigen, RejectsNonSymmetric) {
  DenseMatrix m(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(sym_eigen(m), ValidationError);
}

TEST(PsiBasis, DefinitionAndGram) {
  const PsiBasis psi = build_psi(2);
  EXPECT_NEAR(psi.Z(2, 2), 1.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(psi.Z(2, 1), -1.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(psi.Z(2, 0), 0.0, 0.0);
  // T[0][0] = int psi_0^2 by quadrature.
  const double t00 = integrate(4, [&](double s) { return std::pow(poly_at(psi.Z.row(0), s), 2); });
  EXPECT_NEAR(t00, 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(psi.T(0, 0), t00, 1e-14);
  EXPECT_THROW(build_psi(1), ValidationError);
}

TEST(PsiBasis, PentadiagonalSymmetric) {
  const PsiBasis psi = build_psi(8);
  EXPECT_EQ(psi.T(0, 5), 0.0);
  for (std::size_t k = 0; k <= 8; ++k)
    for (std::size_t j = 0; j <= 8; ++j) {
      EXPECT_EQ(psi.T(k, j), psi.T(j, k));
      if (k > j + 2 || j > k + 2) {
        EXPECT_EQ(psi.T(k, j), 0.0);
      }
    }
}

TEST(PsiBasis, ReconstructionDerivativeIsScaledLegendre) {
  for (int p : {1, 2, 3, 7, 16}) {
    const PsiBasis psi = detail::psi_basis_unchecked(p);
    for (int k = 0; k <= p; ++k) {
      const Vector d = reconstruct_derivative(psi.Z.row(k));
      for (int j = 0; j <= p; ++j)
        EXPECT_NEAR(d[j], j == k ? std::sqrt(k + 0.5) : 0.0, 1e-12) << "p=" << p << " k=" << k;
      // Pointwise oracle at a few interior points.
      for (double s : {-0.8, -0.1, 0.45}) {
        EXPECT_NEAR(reconstruction_derivative_at(psi.Z.row(k), s),
                    std::sqrt(k + 0.5) * legendre::eval(k, s), 1e-11);
      }
    }
  }
}

TEST(KStar, FirstRowMatchesIntegrationByParts) {
  // int (I L_0)' L_j = int L_0' L_j + L_0(-1) L_j(-1) = (-1)^j.
  for (int p : {0, 2, 5}) {
    const DenseMatrix ks = build_kstar(p);
    for (int j = 0; j <= p; ++j) {
      const Vector e0 = [&] { Vector v(p + 1, 0.0); v[0] = 1.0; return v; }();
      const double projected =
          integrate(p + 2, [&](double s) { return reconstruction_derivative_at(e0, s) * legendre::eval(j, s); }) /
          legendre::gram(j);
      EXPECT_NEAR(ks(0, j), projected, 1e-12) << "p=" << p << " j=" << j;
    }
  }
}

TEST(KStar, ReproducesDerivativeWhenValueAtMinusOneVanishes) {
  // v = L_1 + L_0 has v(-1) = 0, so I v = v and (I v)' = L_0.
  const DenseMatrix ks = build_kstar(3);
  for (std::size_t j = 0; j <= 3; ++j) EXPECT_NEAR(ks(0, j) + ks(1, j), j == 0 ? 1.0 : 0.0, 1e-14);
}

TEST(KStar, IntegrationByPartsIdentityAtDegreeTwo) {
  const int p = 2;
  const DenseMatrix ks = build_kstar(p);
  // For v = L_k, w = L_m: int (I v)' w = gram_m K*[k][m] must equal int v' w + v(-1) w(-1).
  for (int k = 0; k <= p; ++k)
    for (int m = 0; m <= p; ++m) {
      const double lhs = legendre::gram(m) * ks(k, m);
      const double rhs =
          integrate(p + 2, [&](double s) { return legendre_derivative_at(k, s) * legendre::eval(m, s); }) +
          legendre::eval(k, -1.0) * legendre::eval(m, -1.0);
      EXPECT_NEAR(lhs, rhs, 1e-13);
    }
}

TEST(TemporalBasis, DegreeZeroByHand) {
  const TemporalBasis b = build_basis(0);
  EXPECT_EQ(b.lambda[0], 4.0);
  EXPECT_NEAR(b.Q(0, 0), std::sqrt(2.0), 1e-15);
  const Vector c = b.coefficients(0);
  const double norm = integrate(2, [&](double s) { return std::pow(reconstruction_derivative_at(c, s), 2); });
  EXPECT_NEAR(norm, 1.0, 1e-14);
  EXPECT_NEAR(integrate(2, [&](double s) { return std::pow(poly_at(c, s), 2); }), b.lambda[0], 1e-14);
  // (I phi_0)' = K phi_0.
  EXPECT_NEAR(reconstruction_derivative_at(c, 0.3), b.K(0, 0) * poly_at(c, 0.3), 1e-14);
  EXPECT_NEAR(b.q_plus[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(b.q_minus[0], std::sqrt(2.0), 1e-15);
}

// Eigenvalues computed independently with numpy.linalg.eigh on T = Z D Z^T.
TEST(TemporalBasis, LowDegreeEigenvalues) {
  const TemporalBasis b1 = build_basis(1);
  EXPECT_NEAR(b1.lambda[0], 1.47683362, 1e-8);
  EXPECT_NEAR(b1.lambda[1], 0.30094415, 1e-8);
  const TemporalBasis b2 = build_basis(2);
  EXPECT_NEAR(b2.lambda[0], 1.62522243, 1e-8);
  EXPECT_NEAR(b2.lambda[1], 0.13175429, 1e-8);
  EXPECT_NEAR(b2.lambda[2], 0.08302328, 1e-8);
}

class BasisProperties : public ::testing::TestWithParam<int> {};

TEST_P(BasisProperties, QuadratureInvariants) {
  const int p = GetParam();
  const TemporalBasis b = build_basis(p);
  const std::size_t n = b.size();
  const auto rule = legendre::gauss_rule(p + 3);
  const std::size_t nq = rule.nodes.size();

  // Tabulate phi_j, (I phi_j)', psi_k, (I psi_k)' at the quadrature nodes.
  auto tabulate = [&](auto&& f) {
    std::vector<Vector> t(n, Vector(nq));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nq; ++i) t[j][i] = f(j, rule.nodes[i]);
    return t;
  };
  std::vector<Vector> coeffs(n);
  for (std::size_t j = 0; j < n; ++j) coeffs[j] = b.coefficients(j);
  const auto phi = tabulate([&](std::size_t j, double s) { return poly_at(coeffs[j], s); });
  const auto dphi = tabulate([&](std::size_t j, double s) { return reconstruction_derivative_at(coeffs[j], s); });
  auto inner = [&](const Vector& f, const Vector& g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nq; ++i) sum += rule.weights[i] * f[i] * g[i];
    return sum;
  };

  for (std::size_t j = 0; j + 1 < n; ++j) EXPECT_GE(b.lambda[j], b.lambda[j + 1]);
  EXPECT_GT(b.lambda.back(), 0.0);

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(inner(dphi[j], dphi[k]), j == k ? 1.0 : 0.0, 1e-10) << "orthonormality j=" << j << " k=" << k;
      EXPECT_NEAR(inner(phi[j], phi[k]), j == k ? b.lambda[j] : 0.0, 1e-9) << "L2 Gram j=" << j << " k=" << k;
    }
    // (I phi_j)' = sum_m K[j][m] phi_m, measured in L2.
    Vector defect = dphi[j];
    for (std::size_t m = 0; m < n; ++m) axpy(-b.K(j, m), phi[m], defect);
    EXPECT_LE(std::sqrt(inner(defect, defect)), 1e-10) << "K relation j=" << j;

    // Reconstruction endpoint and moment properties.
    const Vector iv = reconstruct(coeffs[j]);
    EXPECT_NEAR(legendre::eval_series(iv, 1.0), poly_at(coeffs[j], 1.0), 1e-12);
    EXPECT_NEAR(legendre::eval_series(iv, -1.0), 0.0, 1e-12);
    Vector iv_at(nq);
    for (std::size_t i = 0; i < nq; ++i) iv_at[i] = legendre::eval_series(iv, rule.nodes[i]);
    for (int m = 0; m < p; ++m) {
      Vector lm(nq);
      for (std::size_t i = 0; i < nq; ++i) lm[i] = legendre::eval(m, rule.nodes[i]);
      EXPECT_NEAR(inner(iv_at, lm), inner(phi[j], lm), 1e-10);
    }

    double qp = 0.0, qm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      qp += b.Q(k, j);
      qm += (k % 2 == 0 ? 1.0 : -1.0) * b.Q(k, j);
    }
    EXPECT_DOUBLE_EQ(b.q_plus[j], qp);
    EXPECT_DOUBLE_EQ(b.q_minus[j], qm);
  }

  // Eigen relation against the psi basis: lambda_j int (I phi_j)'(I psi)' = int phi_j psi.
  if (p >= 1) {
    const PsiBasis psi = detail::psi_basis_unchecked(p);
    const auto psi_at = tabulate([&](std::size_t k, double s) { return poly_at(psi.Z.row(k), s); });
    const auto dpsi = tabulate([&](std::size_t k, double s) { return reconstruction_derivative_at(psi.Z.row(k), s); });
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        EXPECT_NEAR(b.lambda[j] * inner(dphi[j], dpsi[k]), inner(phi[j], psi_at[k]), 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Degrees, BasisProperties, ::testing::Values(0, 1, 2, 3, 4, 5, 8, 13, 24, 40, 64));

TEST(TemporalBasis, BitReproducible) {
  const TemporalBasis a = build_basis(9);
  const TemporalBasis b = build_basis(9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.lambda[i], b.lambda[i]);
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_EQ(a.Q(i, j), b.Q(i, j));
      EXPECT_EQ(a.K(i, j), b.K(i, j));
    }
  }
}

TEST(EigenvalueDecay, ScaledExtremesBounded) {
  const auto report = verify_eigenvalue_decay({2, 4, 8, 16, 32, 64, 128, 256});
  EXPECT_LT(report.sup_upper_scaled, 6.0);
  EXPECT_GT(report.inf_lower_scaled, 1.0);
  // The largest eigenvalue is p-independent to within one percent.
  for (double u : report.upper_scaled_per_p) EXPECT_NEAR(u / report.upper_scaled_per_p.back(), 1.0, 0.01);
  EXPECT_NEAR(report.smallest_slope, -4.0, 0.3);
  EXPECT_NEAR(report.bulk_slopes.back(), -2.0, 0.3);
  // Fitting across [p/4, p] picks up the steep tail of the spectrum.
  EXPECT_LT(report.tail_slopes.back(), -3.0);
  const auto again = verify_eigenvalue_decay({2, 4, 8, 16, 32, 64, 128, 256});
  EXPECT_EQ(report.sup_upper_scaled, again.sup_upper_scaled);
  EXPECT_THROW(verify_eigenvalue_decay({}), ValidationError);
}

}  // namespace
}  // namespace dgps
