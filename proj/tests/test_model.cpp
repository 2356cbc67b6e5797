#include "ym/model.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace ym;

namespace {

const Dimension d4{4}, d5{5};

// Independent high-order finite-difference second derivative at 0 for
// even functions: f''(0) ~ (-f(2h) + 16 f(h) - 15 f(0)) ... use the
// standard 5-point central stencil with parity.
template <class F>
double fd_curvature_at_zero(F f, double h) {
  return (-2.0 * f(2 * h) + 32.0 * f(h) - 30.0 * f(0.0)) / (12.0 * h * h);
}

// Recursive unit-sphere volume: vol(S^1) = 2 pi, vol(S^2) = 4 pi,
// vol(S^n) = 2 pi / (n - 1) * vol(S^{n-2}).
double sphere_vol(int n) {
  if (n == 0) return 2.0;
  if (n == 1) return 2.0 * M_PI;
  return 2.0 * M_PI / (n - 1) * sphere_vol(n - 2);
}

ArrayXd loggrid(double lo, double hi, long n) {
  ArrayXd r(n + 1);
  r(0) = 0.0;
  for (long i = 0; i < n; ++i)
    r(i + 1) = lo * std::pow(hi / lo, (double)i / (n - 1));
  return r;
}

}  // namespace

TEST_CASE("pde_rhs vacuum branches are static") {
  CHECK(pde_rhs(0.0, 0.0, 1.0, 2.0, d5) == 0.0);
  CHECK(pde_rhs(0.0, 0.0, -1.0, 1.0, d4) == 0.0);
  CHECK_THROWS_AS(pde_rhs(0.0, 0.0, 1.0, 0.0, d5), std::domain_error);
}

TEST_CASE("W_S with exact derivatives is static in d=4") {
  const double r = 0.5;
  CHECK(std::abs(pde_rhs(profile_ws_second_deriv(r), profile_ws_deriv(r),
                         profile_ws(r), r, d4)) < 1e-14);
  // and at random radii
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double rr = dist(rng);
    CHECK(std::abs(pde_rhs(profile_ws_second_deriv(rr), profile_ws_deriv(rr),
                           profile_ws(rr), rr, d4)) < 1e-12);
  }
}

TEST_CASE("closed-form profile values") {
  CHECK(profile_w0(0.0) == 1.0);
  CHECK(profile_w0(1.0) == 0.0);
  CHECK(profile_w0(2.0) == doctest::Approx(-15.0 / 17.0).epsilon(1e-14));
  CHECK(profile_ws(0.0) == 1.0);
  CHECK(profile_ws(1.0) == 0.0);
  CHECK(profile_ws(std::sqrt(3.0)) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("analytic derivatives match finite differences") {
  for (double e : {0.2, 0.7, 1.3}) {
    const double h = 1e-5;
    CHECK(profile_w0_deriv(e) ==
          doctest::Approx((profile_w0(e + h) - profile_w0(e - h)) / (2 * h))
              .epsilon(1e-8));
    CHECK(profile_ws_second_deriv(e) ==
          doctest::Approx((profile_ws(e + h) - 2 * profile_ws(e) +
                           profile_ws(e - h)) /
                          (h * h))
              .epsilon(1e-5));
  }
}

TEST_CASE("profile curvature at origin") {
  Profile w0{ProfileKind::W0_d5, {}, {}, {}};
  Profile ws{ProfileKind::WS_d4, {}, {}, {}};
  CHECK(w0.curvature_at_origin() == doctest::Approx(-3.2).epsilon(1e-14));
  CHECK(ws.curvature_at_origin() == doctest::Approx(-4.0).epsilon(1e-14));
  // oracle: finite differences of the closed forms
  CHECK(fd_curvature_at_zero(profile_w0, 1e-3) ==
        doctest::Approx(-3.2).epsilon(1e-8));
  CHECK(fd_curvature_at_zero(profile_ws, 1e-3) ==
        doctest::Approx(-4.0).epsilon(1e-8));

  // numeric profile tabulated from W0
  const long n = 201;
  Profile num;
  num.kind = ProfileKind::Numeric;
  num.eta.resize(n);
  num.w.resize(n);
  num.wp.resize(n);
  for (long i = 0; i < n; ++i) {
    const double e = (double)i / (n - 1);
    num.eta(i) = e;
    num.w(i) = profile_w0(e);
    num.wp(i) = profile_w0_deriv(e);
  }
  CHECK(num.curvature_at_origin() == doctest::Approx(-3.2).epsilon(1e-3));
  CHECK(num.value(0.37) == doctest::Approx(profile_w0(0.37)).epsilon(1e-8));

  Profile tiny;
  tiny.kind = ProfileKind::Numeric;
  tiny.eta = ArrayXd::LinSpaced(3, 0.0, 1.0);
  tiny.w = tiny.eta;
  tiny.wp = tiny.eta;
  CHECK_THROWS(tiny.curvature_at_origin());
}

TEST_CASE("energy density point values") {
  CHECK(energy_density(1.0, 0.0, 0.0, 3.0, d5) == 0.0);
  CHECK(energy_density(0.0, 0.0, 0.0, 1.0, d5) ==
        doctest::Approx(1.5).epsilon(1e-15));
  CHECK(energy_density(0.0, 0.0, 0.0, 1.0, d4) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(energy_density(0.0, 0.0, 0.0, 0.0, d5), std::domain_error);
}

TEST_CASE("energy density is nonnegative") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double r = 0.01 + std::abs(dist(rng));
    CHECK(energy_density(dist(rng), dist(rng), dist(rng), r, d5) >= 0.0);
    CHECK(energy_density(dist(rng), dist(rng), dist(rng), r, d4) >= 0.0);
  }
}

TEST_CASE("center density equals the small-r limit") {
  const double q = -2.7;  // w_rr at the origin
  for (auto d : {d4, d5}) {
    const double r = 1e-4;
    const double w = 1.0 + 0.5 * q * r * r;
    const double wr = q * r;
    CHECK(energy_density(w, 0.0, wr, r, d) ==
          doctest::Approx(energy_density_center(q, d)).epsilon(1e-6));
  }
}

TEST_CASE("c(d) coefficient") {
  CHECK(cd_coefficient(d4) ==
        doctest::Approx(6.0 * M_PI * M_PI).epsilon(1e-13));
  CHECK(cd_coefficient(d5) ==
        doctest::Approx(32.0 * M_PI * M_PI / 3.0).epsilon(1e-13));
  for (int d = 4; d <= 9; ++d)
    CHECK(cd_coefficient(Dimension{d}) ==
          doctest::Approx((d - 1) * sphere_vol(d - 1)).epsilon(1e-12));
  CHECK(cd_coefficient(d4) * (8.0 / 3.0) ==
        doctest::Approx(16.0 * M_PI * M_PI).epsilon(1e-12));
}

TEST_CASE("light-cone energy of the shrunk static solution is 16 pi^2") {
  const double lam = 1e-3, t = 0.0, T = 1.0;
  ArrayXd r = loggrid(1e-7, T - t, 40000);
  const long n = r.size();
  ArrayXd w(n), wt(n), wr(n);
  for (long i = 0; i < n; ++i) {
    w(i) = profile_ws(r(i) / lam);
    wr(i) = profile_ws_deriv(r(i) / lam) / lam;
    wt(i) = 0.0;
  }
  const double E = lightcone_energy(r, w, wt, wr, t, T, d4);
  CHECK(E == doctest::Approx(16.0 * M_PI * M_PI).epsilon(2e-3));
  CHECK_THROWS_AS(lightcone_energy(r, w, wt, wr, 2.0, 1.0, d4),
                  std::invalid_argument);
}

TEST_CASE("vacuum has zero energy") {
  ArrayXd r = ArrayXd::LinSpaced(100, 0.0, 5.0);
  ArrayXd w = ArrayXd::Ones(100), z = ArrayXd::Zero(100);
  CHECK(total_energy(r, w, z, z, d5) == 0.0);
  CHECK(lightcone_energy(r, w, z, z, 0.0, 1.0, d5) == 0.0);
}

TEST_CASE("d=5 self-similar cone energy is proportional to T - t") {
  const double T = 1.0;
  auto cone_E = [&](double t) {
    const double lam = T - t;
    ArrayXd r = loggrid(1e-8, lam, 20000);
    const long n = r.size();
    ArrayXd w(n), wt(n), wr(n);
    for (long i = 0; i < n; ++i) {
      const double eta = r(i) / lam;
      w(i) = profile_w0(eta);
      wr(i) = profile_w0_deriv(eta) / lam;
      wt(i) = profile_w0_deriv(eta) * r(i) / (lam * lam);
    }
    return lightcone_energy(r, w, wt, wr, t, T, d5);
  };
  const double k1 = cone_E(0.0) / 1.0;
  const double k2 = cone_E(0.9) / 0.1;
  const double k3 = cone_E(0.99) / 0.01;
  CHECK(k2 == doctest::Approx(k1).epsilon(1e-3));
  CHECK(k3 == doctest::Approx(k1).epsilon(1e-3));
  CHECK(cone_E(0.99) < cone_E(0.0));
}

TEST_CASE("total energy of gaussian data is resolution-stable and scales") {
  auto gauss_energy = [&](double s, long n) {
    // data w(r) = 1 - A (r/s)^2 exp(-sigma (r/s - R)^2), domain [0, 8 s]
    const double A = 0.2, sig = 10.0, R = 2.0;
    ArrayXd r = ArrayXd::LinSpaced(n, 0.0, 8.0 * s);
    ArrayXd w(n), wt = ArrayXd::Zero(n), wr(n);
    for (long i = 0; i < n; ++i) {
      const double x = r(i) / s;
      const double g = std::exp(-sig * (x - R) * (x - R));
      w(i) = 1.0 - A * x * x * g;
      wr(i) = -A * g * (2.0 * x - 2.0 * sig * x * x * (x - R)) / s;
    }
    return total_energy(r, w, wt, wr, d5);
  };
  const double E1 = gauss_energy(1.0, 4001);
  const double E1f = gauss_energy(1.0, 8001);
  CHECK(E1 > 0.0);
  CHECK(E1f == doctest::Approx(E1).epsilon(1e-5));
  // (t, r) -> (t/s, r/s) rescaling changes the d=5 energy by the factor s
  const double E2 = gauss_energy(2.0, 8001);
  CHECK(E2 == doctest::Approx(2.0 * E1f).epsilon(1e-4));
}
