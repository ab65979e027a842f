#pragma once
// Self-contained property suites at small sizes, run by `dgps selftest`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dg_solver.hpp"

namespace dgps {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelftestOptions {
  std::uint64_t seed = 1;
  /// Added to every entry of the reconstruction matrix K (negative control).
  double perturb_k = 0.0;
};

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline TemporalBasis selftest_basis(int p, const SelftestOptions& opt) {
  TemporalBasis b = build_basis(p);
  if (opt.perturb_k != 0.0)
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) b.K(i, j) += opt.perturb_k;
  return b;
}

inline SuiteResult suite_legendre(const SelftestOptions&) {
  double worst = 0.0;
  for (int p = 0; p <= 64; ++p) {
    Vector c(static_cast<std::size_t>(p) + 2, 0.0);
    c[static_cast<std::size_t>(p)] = 1.0;
    c[static_cast<std::size_t>(p) + 1] = -1.0;
    const Vector d = legendre::differentiate(c);
    double sq = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) sq += d[k] * d[k] * legendre::gram(static_cast<int>(k));
    const double expected = 2.0 * (p + 1.0) * (p + 1.0);
    worst = std::max(worst, std::abs(sq - expected) / expected);
  }
  return {"legendre: |(L_p - L_{p+1})'|^2 = 2(p+1)^2, p <= 64", worst <= 1e-10,
          "max rel err " + sci(worst), 0.0};
}

inline SuiteResult suite_temporal_basis(const SelftestOptions&) {
  double worst = 0.0;
  bool ordered = true;
  for (int p : {1, 2, 5, 16, 40}) {
    const TemporalBasis b = build_basis(p);
    for (std::size_t j = 0; j < b.size(); ++j) {
      ordered = ordered && b.lambda[j] > 0.0 && (j == 0 || b.lambda[j] < b.lambda[j - 1]);
      const Vector dj = reconstruct_derivative(b.coefficients(j));
      for (std::size_t k = 0; k < b.size(); ++k) {
        const Vector dk = reconstruct_derivative(b.coefficients(k));
        double g = 0.0;
        for (std::size_t m = 0; m < dj.size(); ++m) g += dj[m] * dk[m] * legendre::gram(static_cast<int>(m));
        worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
      }
    }
  }
  return {"temporal basis: orthonormal reconstructions, decreasing positive lambda",
          ordered && worst <= 1e-10, "max Gram deviation " + sci(worst), 0.0};
}

inline SuiteResult suite_pearson_wathen(const SelftestOptions& opt) {
  SplitMix64 rng(opt.seed);
  double lo = 1.0, hi = 0.0, zero_shift = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + rng.next() % 20;
    auto random_spd = [&] {
      std::vector<Triplet> t;
      DenseMatrix g(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.symmetric();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = i == j ? 0.5 : 0.0;
          for (std::size_t k = 0; k < n; ++k) s += g(i, k) * g(j, k);
          t.push_back({i, j, s});
        }
      return SparseMatrix::from_triplets(n, n, t);
    };
    const SparseMatrix m = random_spd(), a = random_spd();
    const SpatialPair pair = make_pair(m, a);
    for (double mu : {0.0, 1e-4, 1e-2, 1.0, 1e4}) {
      const RatioRange r = pearson_wathen_ratio(pair, mu, 40, rng.next());
      lo = std::min(lo, r.min_ratio);
      hi = std::max(hi, r.max_ratio);
      if (mu == 0.0) zero_shift = std::max({zero_shift, std::abs(r.min_ratio - 1.0), std::abs(r.max_ratio - 1.0)});
    }
  }
  const bool ok = lo >= 0.5 - 1e-10 && hi <= 1.0 + 1e-10 && zero_shift <= 1e-12;
  return {"operators: shifted negative-norm ratio in [1/2, 1]", ok,
          "range [" + sci(lo) + ", " + sci(hi) + "]", 0.0};
}

inline SuiteResult suite_dg_identities(const SelftestOptions& opt) {
  SplitMix64 rng(opt.seed + 1);
  double worst_l = 0.0, worst_p = 0.0, worst_c = 0.0;
  for (int k : {3, 4})
    for (int p = 0; p <= 6; ++p) {
      const auto pair = assemble_1d(k);
      const DgStepOperator op(selftest_basis(p, opt), pair, 0.1);
      for (int trial = 0; trial < 20; ++trial) {
        const BlockVector u = BlockVector::random(op.blocks(), pair.size(), rng);
        BlockVector d = op.apply_Pt(op.apply_B(u));
        const BlockVector lu = op.apply_L(u);
        axpy(-1.0, lu, d);
        worst_l = std::max(worst_l, norm2(d) / norm2(lu));
        const double l_norm = std::sqrt(dot(u, lu));
        worst_p = std::max(worst_p, std::abs(op.x_norm(op.apply_P(u)) - l_norm) / l_norm);
        const Vector e = op.end_value(u), s = op.start_value(u);
        double energy = 0.0;
        for (std::size_t i = 0; i < op.blocks(); ++i)
          for (std::size_t j = 0; j < op.blocks(); ++j)
            if (op.c_coeffs()(i, j) != 0.0) energy += op.c_coeffs()(i, j) * pair.A.form(u[i], u[j]);
        const double coercive = 0.5 * pair.M.form(e, e) + 0.5 * pair.M.form(s, s) + op.tau() * energy;
        worst_c = std::max(worst_c, std::abs(dot(u, op.apply_B(u)) - coercive) / coercive);
      }
    }
  const bool ok = worst_l <= 1e-11 && worst_p <= 1e-10 && worst_c <= 1e-10;
  return {"dg_solver: L = P^T B, |Pu|_X = |u|_L, coercivity", ok,
          "L " + sci(worst_l) + ", P " + sci(worst_p) + ", coercivity " + sci(worst_c), 0.0};
}

inline SuiteResult suite_spectral_bounds(const SelftestOptions& opt) {
  SplitMix64 rng(opt.seed + 2);
  double kmax = 0.0, lo = 1e300, hi = 0.0;
  for (int k : {4, 5})
    for (int p : {0, 1, 2, 4})
      for (double tau : {1e-8, 1e-3, 0.1, 10.0, 1e6}) {
        const DgStepOperator op(build_basis(p), assemble_1d(k), tau);
        kmax = std::max(kmax, estimate_condition(op, 200, opt.seed).kappa);
        for (int trial = 0; trial < 20; ++trial) {
          const BlockVector u = BlockVector::random(op.blocks(), op.spatial_dim(), rng);
          const double r = dot(u, op.apply_L(u)) / dot(u, op.apply_H(u));
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
      }
  const bool ok = kmax <= 4.0 + 1e-6 && lo >= 0.5 - 1e-10 && hi <= 2.0 + 1e-10;
  return {"dg_solver: kappa <= 4 and u'Lu/u'Hu in [1/2, 2] on the sampled grid", ok,
          "max kappa " + sci(kmax) + ", ratios [" + sci(lo) + ", " + sci(hi) + "]", 0.0};
}

inline SuiteResult suite_multigrid(const SelftestOptions& opt) {
  SplitMix64 rng(opt.seed + 3);
  const auto mesh = build_hierarchy(2, 5);
  double rho = 0.0, asym = 0.0;
  for (double beta : {1e-4, 0.05, 1.0}) {
    const MgSolver mg(mesh->mg, 1.0, beta, 1);
    rho = std::max(rho, mg.contraction_factor(3, opt.seed));
    const Vector u = rng.vector(mg.matrix().rows()), v = rng.vector(mg.matrix().rows());
    const double uv = dot(u, mg.solve(v)), vu = dot(v, mg.solve(u));
    asym = std::max(asym, std::abs(uv - vu) / std::abs(uv));
  }
  return {"multigrid: symmetric V-cycle, contraction < 1", rho < 1.0 && asym <= 1e-10,
          "contraction " + sci(rho) + ", asymmetry " + sci(asym), 0.0};
}

inline SuiteResult suite_pcg(const SelftestOptions& opt) {
  const auto disc = discretize(2, 4);
  bool ok = true;
  int solves = 0;
  for (int p : {1, 2, 4})
    for (SolverMode h : {SolverMode::exact(), SolverMode::vcycles(1)}) {
      const DgStepOperator op(build_basis(p), disc.pair, 0.1, {SolverMode::exact(), h});
      SplitMix64 rng(opt.seed + 4);
      const BlockVector ustar = BlockVector::random_unit(op.blocks(), op.spatial_dim(), rng);
      const auto res = pcg(op, op.apply_L(ustar), {1e-10, 200, StopCriterion::true_energy_error}, &ustar);
      const auto& e = res.report.energy_error_history;
      ok = ok && res.report.converged;
      for (std::size_t i = 1; i < e.size(); ++i)
        ok = ok && e[i] < e[i - 1] && e[i] <= 2.0 * std::pow(3.0, -static_cast<double>(i)) + 1e-14;
      ++solves;
    }
  return {"pcg: monotone energy error under the 2/3^k envelope", ok,
          std::to_string(solves) + " solves", 0.0};
}

}  // namespace detail

inline std::vector<SuiteResult> run_selftest(const SelftestOptions& opt = {}) {
  using Suite = SuiteResult (*)(const SelftestOptions&);
  const Suite suites[] = {detail::suite_legendre,      detail::suite_temporal_basis,
                          detail::suite_pearson_wathen, detail::suite_dg_identities,
                          detail::suite_spectral_bounds, detail::suite_multigrid,
                          detail::suite_pcg};
  std::vector<SuiteResult> out;
  for (Suite s : suites) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = s(opt);
    } catch (const Error& e) {
      r.name = "suite aborted";
      r.detail = e.what();
      r.passed = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dgps
