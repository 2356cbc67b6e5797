#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ym/experiments.hpp"

using namespace ym;
using doctest::Approx;

TEST_CASE("bisection solves a synthetic step classifier") {
  auto probe = [](double A) {
    return A > 1.0 / 3.0 ? OutcomeKind::Blowup : OutcomeKind::Dispersion;
  };
  Bracket br = bisect_critical(probe, 0.1, 0.9, 1e-6);
  CHECK(br.A_star() == Approx(1.0 / 3.0).epsilon(2e-6));
  CHECK(!br.limited);
  // bracket invariant holds through the whole history
  double lo = 0.1, hi = 0.9;
  for (size_t i = 2; i < br.history.size(); ++i) {
    const auto& [A, k] = br.history[i];
    CHECK(A > lo);
    CHECK(A < hi);
    (k == OutcomeKind::Blowup ? hi : lo) = A;
  }
  CHECK(br.A_lo == lo);
  CHECK(br.A_hi == hi);
}

TEST_CASE("bisection rejects an invalid initial bracket") {
  auto all_blowup = [](double) { return OutcomeKind::Blowup; };
  CHECK_THROWS_AS(bisect_critical(all_blowup, 0.1, 0.9, 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(bisect_critical(all_blowup, 0.9, 0.1, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("bisection stops with a flag when probes become Undetermined") {
  auto probe = [](double A) {
    if (std::fabs(A - 1.0 / 3.0) < 0.05) return OutcomeKind::Undetermined;
    return A > 1.0 / 3.0 ? OutcomeKind::Blowup : OutcomeKind::Dispersion;
  };
  Bracket br = bisect_critical(probe, 0.1, 0.9, 1e-9);
  CHECK(br.limited);
  CHECK(br.A_hi - br.A_lo > 1e-9);
  CHECK(br.A_lo < br.A_hi);
}

TEST_CASE("scaling fit recovers exact synthetic power laws") {
  ArrayXd eps(5), rho(5), t(5);
  for (int i = 0; i < 5; ++i) {
    eps(i) = std::pow(10.0, -3.0 - i);
    rho(i) = std::pow(eps(i), -0.8);
    t(i) = 2.0 * std::pow(eps(i), 0.2);
  }
  ScalingFit s = fit_scaling(eps, rho);
  CHECK(s.exponent == Approx(-0.8).epsilon(1e-3));
  CHECK(s.reliable);
  CHECK(s.residual < 1e-10);
  s = fit_scaling(eps, t);
  CHECK(s.exponent == Approx(0.2).epsilon(1e-3));
  CHECK(s.amplitude == Approx(2.0).epsilon(1e-3));
}

TEST_CASE("noisy fits are marked unreliable") {
  ArrayXd x(6), y(6);
  for (int i = 0; i < 6; ++i) {
    x(i) = std::pow(10.0, -i);
    y(i) = std::pow(x(i), -0.8) * (i % 2 == 0 ? 1.3 : 0.7);
  }
  ScalingFit s = fit_scaling(x, y);
  CHECK(!s.reliable);
  CHECK(!s.caveat.empty());
}

TEST_CASE("anomalous rate fit on synthetic scale histories") {
  auto series_for = [](double T, double p) {
    std::vector<DiagRow> s;
    for (double t = 0.0; t < T - 1e-4; t += (T - t) * 0.05 + 1e-5) {
      DiagRow r;
      r.t = t;
      r.lambda = std::pow(T - t, p);
      s.push_back(r);
    }
    return s;
  };
  ScalingFit a = anomalous_rate_fit(series_for(1.0, 1.1), Dimension{4});
  CHECK(a.exponent == Approx(0.1).epsilon(1e-3));
  CHECK(!a.caveat.empty());
  a = anomalous_rate_fit(series_for(1.0, 1.0), Dimension{5});
  CHECK(a.exponent == Approx(0.0).scale(1.0).epsilon(1e-3));
}

TEST_CASE("the excited profile solves the matching problem") {
  const SelfSimilarProfile& p = excited_profile();
  CHECK(p.b == Approx(kExcitedB).epsilon(1e-9));
  CHECK(p.c == Approx(kExcitedC).epsilon(1e-6));
  CHECK(p.W1 == 0.0);
  CHECK(p.residual < 1e-9);
  CHECK(p.table.curvature_at_origin() == Approx(2.0 * kExcitedB).epsilon(1e-4));
}

TEST_CASE("cone energy limit on synthetic series") {
  auto synthetic = [](double E_inf, double slope) {
    EvolutionResult res;
    res.outcome.kind = OutcomeKind::Blowup;
    res.outcome.T_estimate = 1.0;
    for (double dt = 1e-6; dt < 0.5; dt *= 1.2) {
      DiagRow r;
      r.t = 1.0 - dt;
      r.E_cone = E_inf + slope * dt;
      res.series.push_back(r);
    }
    std::reverse(res.series.begin(), res.series.end());
    return res;
  };
  ConeEnergyLimit c = cone_energy_limit(synthetic(0.0, 5.0), Dimension{5});
  CHECK(c.defined);
  CHECK(c.to_zero);
  CHECK(c.decade_ratio == Approx(0.1).epsilon(1e-3));
  CHECK(std::fabs(c.limit) < 1e-6);
  c = cone_energy_limit(synthetic(157.9, 5.0), Dimension{4});
  CHECK(c.defined);
  CHECK(!c.to_zero);
  CHECK(c.limit == Approx(157.9).epsilon(1e-3));
}

TEST_CASE("cone energy limit is trivial for a vacuum run") {
  EvolutionConfig cfg;
  cfg.A = 0.0;
  cfg.dr0 = 8.0 / 128.0;
  EvolutionResult res = classify_outcome(cfg);
  CHECK(res.outcome.kind == OutcomeKind::Dispersion);
  ConeEnergyLimit c = cone_energy_limit(res, cfg.d);
  CHECK(!c.defined);
  CHECK(c.limit == 0.0);
}

TEST_CASE("d=4 blowup concentrates the static solution's energy") {
  EvolutionConfig cfg;
  cfg.d = Dimension{4};
  cfg.A = 0.5;
  cfg.dr0 = 8.0 / 512.0;
  EvolutionResult res = classify_outcome(cfg);
  REQUIRE(res.outcome.kind == OutcomeKind::Blowup);
  ConeEnergyLimit c = cone_energy_limit(res, cfg.d);
  REQUIRE(c.defined);
  CHECK(!c.to_zero);
  CHECK(c.limit == Approx(16.0 * M_PI * M_PI).epsilon(0.10));
  CHECK(c.kinetic_fraction < 0.10);
  ScalingFit a = anomalous_rate_fit(res.series, cfg.d);
  CHECK(a.exponent > 0.03);
  CHECK(a.exponent < 0.25);
}

TEST_CASE("d=5 blowup concentrates no energy") {
  EvolutionConfig cfg;
  cfg.d = Dimension{5};
  cfg.A = 0.2;
  cfg.dr0 = 8.0 / 512.0;
  EvolutionResult res = classify_outcome(cfg);
  REQUIRE(res.outcome.kind == OutcomeKind::Blowup);
  ConeEnergyLimit c = cone_energy_limit(res, cfg.d);
  REQUIRE(c.defined);
  CHECK(c.to_zero);
  CHECK(c.decade_ratio < 0.15);
  CHECK(std::fabs(c.limit) < 0.01 * res.E0);
  // the d=5 rate is linear: the anomalous exponent vanishes
  ScalingFit a = anomalous_rate_fit(res.series, cfg.d);
  CHECK(std::fabs(a.exponent) < 0.05);
}

TEST_CASE("a generic supercritical run never approaches the excited profile") {
  EvolutionConfig cfg;
  cfg.d = Dimension{5};
  cfg.A = 0.2;
  cfg.dr0 = 8.0 / 512.0;
  DistanceSeries ds = attractor_comparison(cfg, excited_profile().table);
  CHECK(ds.outcome.kind == OutcomeKind::Blowup);
  CHECK(ds.min_dist > 0.3);
}

TEST_CASE("a contaminated subcritical sweep is rejected") {
  EvolutionConfig base;
  base.d = Dimension{5};
  base.dr0 = 8.0 / 512.0;
  // 0.2 is far above critical: A = 0.2 - 1e-3 still blows up
  CHECK_THROWS_AS(subcritical_sweep({1e-3}, base, 0.2), std::runtime_error);
  CHECK_THROWS_AS(subcritical_sweep({}, base, 0.14), std::invalid_argument);
  CHECK_THROWS_AS(subcritical_sweep({0.5}, base, 0.14), std::invalid_argument);
}
