#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ym/evolve.hpp"

using namespace ym;
using doctest::Approx;

namespace {

Level w0_level(double lambda, double dr, long n) {
  Level L;
  L.dr = dr;
  L.w.resize(n);
  L.wt = ArrayXd::Zero(n);
  for (long i = 0; i < n; ++i) L.w(i) = profile_w0(i * dr / lambda);
  return L;
}

}  // namespace

TEST_CASE("gaussian initial data matches its closed form") {
  EvolutionConfig cfg;
  cfg.A = 0.2;
  cfg.sigma = 10.0;
  cfg.R = 2.0;
  Level L = make_initial_data(cfg);
  CHECK(L.w(0) == 1.0);
  CHECK(L.wt.abs().maxCoeff() == 0.0);
  const long iR = (long)std::lround(cfg.R / cfg.dr0);
  CHECK(L.w(iR) == Approx(1.0 - cfg.A * cfg.R * cfg.R).epsilon(1e-12));
  // (1 - w)/r^2 -> A e^{-sigma R^2} as r -> 0
  const double r1 = L.r(1);
  CHECK((1.0 - L.w(1)) / (r1 * r1) ==
        Approx(cfg.A * std::exp(-cfg.sigma * cfg.R * cfg.R)).epsilon(1e-3));

  cfg.A = 0.0;
  Level V = make_initial_data(cfg);
  CHECK((V.w - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("config validation rejects bad parameters") {
  EvolutionConfig cfg;
  cfg.A = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.R = 10.0;  // >= r_max
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.cfl = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("vacuum stays vacuum") {
  EvolutionConfig cfg;
  cfg.A = 0.0;
  cfg.dr0 = 8.0 / 128.0;
  Evolution ev(cfg);
  for (int k = 0; k < 32; ++k) ev.advance_coarse();
  for (const Level& L : ev.hierarchy().levels()) {
    CHECK((L.w - 1.0).abs().maxCoeff() < 1e-14);
    CHECK(L.wt.abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("center value w(t,0) = 1 is preserved exactly") {
  EvolutionConfig cfg;
  cfg.A = 0.2;
  cfg.dr0 = 8.0 / 256.0;
  Evolution ev(cfg);
  for (int k = 0; k < 64 && !ev.stopped(); ++k) {
    ev.advance_coarse();
    CHECK(ev.hierarchy().levels()[0].w(0) == 1.0);
  }
}

TEST_CASE("extract_scale inverts the profile curvature") {
  CHECK(extract_scale(-3.2e6, Dimension{5}) == Approx(1e-3).epsilon(1e-12));
  CHECK(extract_scale(-4.0e8, Dimension{4}) == Approx(1e-4).epsilon(1e-12));
  CHECK(extract_scale(0.5, Dimension{5}) == 0.0);
  CHECK(extract_scale(0.0, Dimension{4}) == 0.0);
  CHECK_THROWS_AS(extract_scale(-1.0, Dimension{7}), std::invalid_argument);
}

TEST_CASE("center curvature recovers a sampled W0 core") {
  const double lam = 1e-3;
  Level L = w0_level(lam, lam / 256.0, 64);
  const double c = center_curvature(L);
  CHECK(c == Approx(-3.2 / (lam * lam)).epsilon(1e-6));
  CHECK(extract_scale(c, Dimension{5}) == Approx(lam).epsilon(1e-6));
}

TEST_CASE("profile distance vanishes on exact profile data") {
  const double lam = 0.25;
  std::vector<Level> levels{w0_level(lam, lam / 128.0, 2 * 128 + 1)};
  Profile w0;
  w0.kind = ProfileKind::W0_d5;
  CHECK(profile_distance(levels, w0, lam, 64) < 1e-7);

  Profile ws;
  ws.kind = ProfileKind::WS_d4;
  // sup |W0 - W_S| = max 0.4 x(1-x)/((1+0.6x)(1+x)) over x = eta^2 in [0,1]
  const double d = profile_distance(levels, ws, lam, 64);
  CHECK(d == Approx(0.05573).epsilon(1e-3));
}

TEST_CASE("profile distance reports unusable scales") {
  std::vector<Level> levels{w0_level(0.25, 0.25 / 8.0, 17)};
  Profile w0;
  w0.kind = ProfileKind::W0_d5;
  CHECK_THROWS_AS(profile_distance(levels, w0, 0.0, 64), std::runtime_error);
  // lambda resolved by only 8 cells of the finest grid but 64 demanded
  CHECK_THROWS_AS(profile_distance(levels, w0, 0.25 / 8.0, 64),
                  std::runtime_error);
  // lambda beyond the grid
  CHECK_THROWS_AS(profile_distance(levels, w0, 10.0, 64), std::runtime_error);
}

TEST_CASE("cumulative interpolation clamps and interpolates") {
  ArrayXd r(3), C(3);
  r << 1.0, 2.0, 4.0;
  C << 1.0, 3.0, 7.0;
  CHECK(interp_cumulative(r, C, 3.0) == Approx(5.0));
  CHECK(interp_cumulative(r, C, 9.0) == Approx(7.0));
  CHECK(interp_cumulative(r, C, 0.5) == Approx(0.5));
  CHECK(interp_cumulative(r, C, -1.0) == 0.0);
}

TEST_CASE("blowup-time fit recovers synthetic scale histories") {
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
  PowerLawFit f = estimate_blowup_time(series_for(1.0, 1.0), Dimension{5});
  CHECK(f.T == Approx(1.0).epsilon(1e-6));
  CHECK(f.p == Approx(1.0).epsilon(1e-4));
  f = estimate_blowup_time(series_for(2.0, 1.1), Dimension{4});
  CHECK(f.T == Approx(2.0).epsilon(1e-6));
  CHECK(f.p == Approx(1.1).epsilon(1e-3));

  std::vector<DiagRow> few(5);
  CHECK_THROWS_AS(estimate_blowup_time(few, Dimension{5}), std::runtime_error);
}

TEST_CASE("d=5 large amplitude blows up in a self-similar fashion") {
  EvolutionConfig cfg;
  cfg.d = Dimension{5};
  cfg.A = 0.2;
  Profile w0;
  w0.kind = ProfileKind::W0_d5;
  cfg.compare.push_back(w0);
  EvolutionResult res = classify_outcome(cfg);
  REQUIRE(res.outcome.kind == OutcomeKind::Blowup);
  CHECK(res.outcome.T_estimate == Approx(1.9308).epsilon(1e-3));
  CHECK(res.outcome.p > 0.95);
  CHECK(res.outcome.p < 1.05);
  // the collapsing core approaches W0
  double min_dist = 1e300;
  for (const DiagRow& r : res.series)
    if (!r.dist.empty() && std::isfinite(r.dist[0]))
      min_dist = std::min(min_dist, r.dist[0]);
  CHECK(min_dist < 0.01);
}

TEST_CASE("d=4 large amplitude blows up slower than self-similar") {
  EvolutionConfig cfg;
  cfg.d = Dimension{4};
  cfg.A = 0.5;
  EvolutionResult res = classify_outcome(cfg);
  REQUIRE(res.outcome.kind == OutcomeKind::Blowup);
  CHECK(res.outcome.p > 1.0);  // lambda decays faster than (T - t)
}

TEST_CASE("d=5 small amplitude disperses") {
  EvolutionConfig cfg;
  cfg.d = Dimension{5};
  cfg.A = 0.01;
  cfg.dr0 = 8.0 / 512.0;
  EvolutionResult res = classify_outcome(cfg);
  CHECK(res.outcome.kind == OutcomeKind::Dispersion);
}

TEST_CASE("budget exhaustion reports Undetermined") {
  EvolutionConfig cfg;
  cfg.A = 0.2;
  cfg.t_end = 0.5;  // stops long before the blowup at T ~ 1.93
  cfg.dr0 = 8.0 / 256.0;
  EvolutionResult res = classify_outcome(cfg);
  CHECK(res.outcome.kind == OutcomeKind::Undetermined);
}

TEST_CASE("energy ledger balances") {
  EvolutionConfig cfg;
  cfg.d = Dimension{5};
  cfg.A = 0.05;
  cfg.t_end = 4.0;
  Evolution ev(cfg);
  while (!ev.stopped() && ev.hierarchy().time() < 4.0) ev.advance_coarse();
  const auto& rows = ev.series();
  REQUIRE(rows.size() > 10);
  const double E0 = rows.front().E_total;
  REQUIRE(E0 > 0.0);
  double worst = 0.0;
  for (const DiagRow& r : rows)
    worst = std::max(worst, std::fabs(r.E_total + r.flux_out - E0) / E0);
  CHECK(worst < 1e-3);
}

TEST_CASE("solution self-converges at second order") {
  auto run = [](double dr0) {
    EvolutionConfig cfg;
    cfg.d = Dimension{5};
    cfg.A = 0.05;
    cfg.dr0 = dr0;
    cfg.t_end = 4.0;
    cfg.mesh.max_depth = 0;  // fixed grid isolates the discretization order
    Evolution ev(cfg);
    while (!ev.stopped() && ev.hierarchy().time() < 4.0 - 1e-12)
      ev.advance_coarse();
    return ev.hierarchy().levels()[0];
  };
  const double h = 8.0 / 256.0;
  Level a = run(h), b = run(h / 2.0), c = run(h / 4.0);
  double e1 = 0.0, e2 = 0.0;
  for (long i = 0; i < a.n(); ++i) {
    e1 = std::max(e1, std::fabs(a.w(i) - b.w(2 * i)));
    e2 = std::max(e2, std::fabs(b.w(2 * i) - c.w(4 * i)));
  }
  REQUIRE(e1 > 0.0);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.9);
}

TEST_CASE("the discrete scheme is covariant under exact rescaling") {
  const double s = 2.0;
  EvolutionConfig c1;
  c1.d = Dimension{5};
  c1.A = 0.2;
  c1.dr0 = 8.0 / 256.0;
  EvolutionConfig c2 = c1;
  c2.A = c1.A / (s * s);
  c2.sigma = c1.sigma / (s * s);
  c2.R = c1.R * s;
  c2.r_max = c1.r_max * s;
  c2.dr0 = c1.dr0 * s;
  Evolution e1(c1), e2(c2);
  for (int k = 0; k < 96; ++k) {
    e1.advance_coarse();
    e2.advance_coarse();
  }
  const auto &l1 = e1.hierarchy().levels(), &l2 = e2.hierarchy().levels();
  REQUIRE(l1.size() == l2.size());
  CHECK(e2.hierarchy().time() == s * e1.hierarchy().time());
  for (size_t k = 0; k < l1.size(); ++k) {
    REQUIRE(l1[k].n() == l2[k].n());
    CHECK(l1[k].i_lo == l2[k].i_lo);
    for (long i = 0; i < l1[k].n(); ++i) {
      CHECK(l2[k].w(i) == l1[k].w(i));
      CHECK(l2[k].wt(i) == l1[k].wt(i) / s);
    }
  }
}

TEST_CASE("the outer boundary is transparent to an outgoing pulse") {
  auto run = [](double r_max) {
    EvolutionConfig cfg;
    cfg.d = Dimension{5};
    cfg.A = 0.05;
    cfg.R = 2.0;
    cfg.r_max = r_max;
    cfg.dr0 = 8.0 / 512.0;
    Evolution ev(cfg);
    while (ev.hierarchy().time() < 7.0 - 1e-12 && !ev.stopped())
      ev.advance_coarse();
    return ev.hierarchy().levels();
  };
  auto small = run(8.0), big = run(16.0);
  double worst = 0.0;
  for (double r = 0.0; r <= 5.0; r += 0.05)
    worst = std::max(worst, std::fabs(sample_w(small, r) - sample_w(big, r)));
  CHECK(worst < 1e-3);
}
