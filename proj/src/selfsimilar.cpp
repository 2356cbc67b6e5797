#include "ym/selfsimilar.hpp"

#include <algorithm>
#include <cmath>

namespace ym {

double SimilarityODE::second_deriv(double eta, double W, double Wp) const {
  const double one_m = 1.0 - eta * eta;
  const double lin = ((d.d - 3) / eta - 2.0 * eta) * Wp;
  const double nl = (d.d - 2) / (eta * eta) * W * (1.0 - W * W);
  return -(lin + nl) / one_m;
}

double SimilarityODE::residual(double eta, double W, double Wp,
                               double Wpp) const {
  return (1.0 - eta * eta) * Wpp + ((d.d - 3) / eta - 2.0 * eta) * Wp +
         (d.d - 2) / (eta * eta) * W * (1.0 - W * W);
}

SeriesPoint series_origin(const SimilarityODE& ode, double b, double eta0,
                          int n_terms) {
  // W = 1 + sum_{k>=1} a_k eta^{2k};   a_1 = b free, and for k >= 2
  // a_k = [(2k-2)(2k-1) a_{k-1} + (d-2)(3 s2_k + s3_k)] /
  //       [4k^2 + 2k(d-4) - 2(d-2)]
  // with s2, s3 the convolution sums of the series for u^2 and u^3.
  const int d = ode.d.d;
  std::vector<double> a(n_terms + 1, 0.0);
  a[1] = b;
  for (int k = 2; k <= n_terms; ++k) {
    double s2 = 0.0;
    for (int i = 1; i < k; ++i) s2 += a[i] * a[k - i];
    double s3 = 0.0;
    for (int i = 1; i < k; ++i)
      for (int j = 1; j < k - i; ++j) s3 += a[i] * a[j] * a[k - i - j];
    const double num = (2 * k - 2) * (2 * k - 1) * a[k - 1] +
                       (d - 2) * (3.0 * s2 + s3);
    const double den = 4.0 * k * k + 2.0 * k * (d - 4) - 2.0 * (d - 2);
    a[k] = num / den;
  }
  SeriesPoint out{1.0, 0.0, 0.0};
  for (int k = 1; k <= n_terms; ++k) {
    const double ep = std::pow(eta0, 2 * k);
    out.W += a[k] * ep;
    out.Wp += 2.0 * k * a[k] * ep / eta0;
    if (k == n_terms) out.truncation = std::abs(a[k] * ep);
  }
  return out;
}

namespace {

// Truncated polynomial product, result clipped to degree M.
std::vector<double> poly_mul(const std::vector<double>& p,
                             const std::vector<double>& q, int M) {
  std::vector<double> r(M + 1, 0.0);
  for (size_t i = 0; i < p.size(); ++i) {
    if ((int)i > M) break;
    for (size_t j = 0; j < q.size(); ++j) {
      if ((int)(i + j) > M) break;
      r[i + j] += p[i] * q[j];
    }
  }
  return r;
}

// Coefficient of s^m of P2 W'' + P1 W' + (d-2)(W - W^3), the ODE about
// eta = 1 + s multiplied by (1+s)^2, with
//   P2 = -s(2+s)(1+s)^2,  P1 = (d-3)(1+s) - 2(1+s)^3.
double cone_residual_coeff(const std::vector<double>& g, int d, int m) {
  const int M = (int)g.size() - 1;
  std::vector<double> P2 = {0.0, -2.0, -5.0, -4.0, -1.0};
  std::vector<double> P1 = {(double)(d - 5), (double)(d - 3) - 6.0, -6.0, -2.0};
  std::vector<double> Wp(M, 0.0), Wpp(std::max(M - 1, 1), 0.0);
  for (int k = 1; k <= M; ++k) Wp[k - 1] = k * g[k];
  for (int k = 2; k <= M; ++k) Wpp[k - 2] = k * (k - 1) * g[k];
  std::vector<double> r = poly_mul(P2, Wpp, M);
  std::vector<double> t1 = poly_mul(P1, Wp, M);
  std::vector<double> W3 = poly_mul(poly_mul(g, g, M), g, M);
  for (int i = 0; i <= M; ++i)
    r[i] += t1[i] + (d - 2) * (g[i] - W3[i]);
  return r[m];
}

}  // namespace

SeriesPoint series_lightcone(const SimilarityODE& ode, double W1, double c,
                             double eta1, int n_terms) {
  const int d = ode.d.d;
  const int M = n_terms;
  std::vector<double> g(M + 1, 0.0);
  g[0] = W1;
  for (int m = 0; m < M; ++m) {
    const double L = (m + 1.0) * (d - 5.0 - 2.0 * m);
    if (m == 0 && L == 0.0) {
      // d = 5: the recurrence cannot determine g1; the m = 0 residual is
      // the endpoint constraint (d-2) W1 (1 - W1^2) = 0.
      if (std::abs(W1 * (1.0 - W1 * W1)) > 1e-12)
        throw std::invalid_argument(
            "series_lightcone: d=5 requires W1 in {0, +1, -1}");
      g[1] = c;
      continue;
    }
    const double R0 = cone_residual_coeff(g, d, m);
    g[m + 1] = -R0 / L;
  }
  // Evaluate at s = -eta1 (inside the cone).
  const double s = -eta1;
  SeriesPoint out{0.0, 0.0, 0.0};
  for (int k = M; k >= 1; --k) {
    out.W = (out.W + g[k]) * s;
    out.Wp = (out.Wp + k * g[k]) * (k > 1 ? s : 1.0);
  }
  out.W += g[0];
  out.truncation = std::abs(g[M] * std::pow(s, M));
  return out;
}

namespace {

struct OdeState {
  long double W, Wp;
};

// Cash-Karp RK45 with adaptive step control; integrates the similarity ODE
// from eta_a to eta_b. Returns false if |W| exceeded the blow-off bound.
// If out_eta is non-null, the state is additionally reported exactly at the
// listed eta values (assumed monotone along the direction of integration).
bool integrate(const SimilarityODE& ode, double eta_a, double eta_b,
               OdeState& y, double tol, double blowoff,
               const std::vector<double>* out_eta = nullptr,
               std::vector<OdeState>* out_y = nullptr) {
  static const double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
  static const double b21 = 0.2;
  static const double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
  static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
  static const double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0,
                      b54 = 35.0 / 27.0;
  static const double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0,
                      b63 = 575.0 / 13824.0, b64 = 44275.0 / 110592.0,
                      b65 = 253.0 / 4096.0;
  static const double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0,
                      c4 = 125.0 / 594.0, c6 = 512.0 / 1771.0;
  static const double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                      d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                      d6 = c6 - 0.25;

  auto f = [&](long double eta, const OdeState& s) -> OdeState {
    const long double e2 = eta * eta;
    const long double lin = ((ode.d.d - 3) / eta - 2.0L * eta) * s.Wp;
    const long double nl =
        (ode.d.d - 2) / e2 * s.W * (1.0L - s.W * s.W);
    return {s.Wp, -(lin + nl) / (1.0L - e2)};
  };

  const double dir = eta_b > eta_a ? 1.0 : -1.0;
  double eta = eta_a;
  double h = dir * std::min({1e-3, 0.1 * std::abs(eta_b - eta_a),
                             0.1 * std::abs(eta_a)});
  size_t next_out = 0;

  for (int iter = 0; iter < 2000000; ++iter) {
    if (dir * (eta - eta_b) >= 0.0) break;
    double h_try = h;
    // Clamp to the next requested output point and to the interval end.
    double next_stop = eta_b;
    bool stop_is_output = false;
    if (out_eta && next_out < out_eta->size()) {
      const double eo = (*out_eta)[next_out];
      if (dir * (eo - eta) <= 0.0) {
        out_y->push_back(y);  // already at/past it (start point)
        ++next_out;
        continue;
      }
      if (dir * (eo - next_stop) <= 0.0) {
        next_stop = eo;
        stop_is_output = true;
      }
    }
    // The 1/eta^2 coefficients vary fast near the origin; keep the step a
    // fraction of the distance to eta = 0 or the embedded error estimate
    // can miss the local truncation error entirely.
    if (std::abs(h_try) > 0.25 * std::abs(eta))
      h_try = dir * 0.25 * std::abs(eta);
    bool clamped = false;
    if (dir * (eta + h_try - next_stop) > 0.0) {
      h_try = next_stop - eta;
      clamped = true;
    }

    const OdeState k1 = f(eta, y);
    OdeState s2{y.W + h_try * b21 * k1.W, y.Wp + h_try * b21 * k1.Wp};
    const OdeState k2 = f(eta + a2 * h_try, s2);
    OdeState s3{y.W + h_try * (b31 * k1.W + b32 * k2.W),
                y.Wp + h_try * (b31 * k1.Wp + b32 * k2.Wp)};
    const OdeState k3 = f(eta + a3 * h_try, s3);
    OdeState s4{y.W + h_try * (b41 * k1.W + b42 * k2.W + b43 * k3.W),
                y.Wp + h_try * (b41 * k1.Wp + b42 * k2.Wp + b43 * k3.Wp)};
    const OdeState k4 = f(eta + a4 * h_try, s4);
    OdeState s5{
        y.W + h_try * (b51 * k1.W + b52 * k2.W + b53 * k3.W + b54 * k4.W),
        y.Wp + h_try * (b51 * k1.Wp + b52 * k2.Wp + b53 * k3.Wp + b54 * k4.Wp)};
    const OdeState k5 = f(eta + a5 * h_try, s5);
    OdeState s6{y.W + h_try * (b61 * k1.W + b62 * k2.W + b63 * k3.W +
                               b64 * k4.W + b65 * k5.W),
                y.Wp + h_try * (b61 * k1.Wp + b62 * k2.Wp + b63 * k3.Wp +
                                b64 * k4.Wp + b65 * k5.Wp)};
    const OdeState k6 = f(eta + a6 * h_try, s6);

    const double W5 =
        y.W + h_try * (c1 * k1.W + c3 * k3.W + c4 * k4.W + c6 * k6.W);
    const double Wp5 =
        y.Wp + h_try * (c1 * k1.Wp + c3 * k3.Wp + c4 * k4.Wp + c6 * k6.Wp);
    const double eW = h_try * (d1 * k1.W + d3 * k3.W + d4 * k4.W +
                               d5 * k5.W + d6 * k6.W);
    const double eWp = h_try * (d1 * k1.Wp + d3 * k3.Wp + d4 * k4.Wp +
                                d5 * k5.Wp + d6 * k6.Wp);
    const double scale_W = tol * (1.0 + std::abs(y.W));
    const double scale_Wp = tol * (1.0 + std::abs(y.Wp));
    const double err = std::max(std::abs(eW) / scale_W,
                                std::abs(eWp) / scale_Wp);

    if (err <= 1.0 || std::abs(h_try) < 1e-15) {
      eta = clamped ? next_stop : eta + h_try;
      y = {W5, Wp5};
      if (!std::isfinite(y.W) || std::abs(y.W) > blowoff) return false;
      if (clamped && stop_is_output) {
        out_y->push_back(y);
        ++next_out;
      }
      h *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    } else {
      h = h_try * std::max(0.1, 0.9 * std::pow(err, -0.25));
      continue;
    }
  }
  return true;
}

}  // namespace

ShotResult shoot(const SimilarityODE& ode, double b, double c, double W1,
                 const ShootOptions& opt) {
  ShotResult out;
  SeriesPoint so = series_origin(ode, b, opt.eta0);
  OdeState yo{so.W, so.Wp};
  if (!integrate(ode, opt.eta0, opt.eta_match, yo, opt.tol, opt.blowoff)) {
    out.diverged = true;
    out.dW = out.dWp = opt.blowoff;
    return out;
  }
  SeriesPoint sc = series_lightcone(ode, W1, c, opt.eta1);
  OdeState yc{sc.W, sc.Wp};
  if (!integrate(ode, 1.0 - opt.eta1, opt.eta_match, yc, opt.tol,
                 opt.blowoff)) {
    out.diverged = true;
    out.dW = out.dWp = opt.blowoff;
    return out;
  }
  out.dW = yo.W - yc.W;
  out.dWp = yo.Wp - yc.Wp;
  return out;
}

namespace {

double defect_norm(const ShotResult& s) {
  return std::sqrt(s.dW * s.dW + s.dWp * s.dWp);
}

// Newton iteration on (b, xi) with finite-difference Jacobian. For d = 5,
// xi is the light-cone slope c at fixed branch value W1; for other d the
// slope is slaved to the endpoint value and xi is W1 itself.
bool newton_polish(const SimilarityODE& ode, bool xi_is_c, double W1_fixed,
                   double& b, double& xi, const ShootOptions& opt) {
  auto eval = [&](double bb, double xx) -> ShotResult {
    const double W1 = xi_is_c ? W1_fixed : xx;
    const double c = xi_is_c ? xx : 0.0;
    return shoot(ode, bb, c, W1, opt);
  };
  double best_b = b, best_xi = xi, best_n = 1e300;
  for (int it = 0; it < 60; ++it) {
    ShotResult F = eval(b, xi);
    if (F.diverged) break;
    const double n = defect_norm(F);
    if (n < best_n) {
      best_n = n;
      best_b = b;
      best_xi = xi;
    }
    if (n < 1e-11) return true;
    const double hb = 1e-7 * (1.0 + std::abs(b));
    const double hx = 1e-7 * (1.0 + std::abs(xi));
    ShotResult Fb = eval(b + hb, xi);
    ShotResult Fx = eval(b, xi + hx);
    if (Fb.diverged || Fx.diverged) return false;
    Eigen::Matrix2d J;
    J << (Fb.dW - F.dW) / hb, (Fx.dW - F.dW) / hx,
         (Fb.dWp - F.dWp) / hb, (Fx.dWp - F.dWp) / hx;
    Eigen::Vector2d rhs(F.dW, F.dWp);
    Eigen::Vector2d step = J.fullPivLu().solve(rhs);
    if (!step.allFinite()) return false;
    // Damp long steps to stay inside the basin.
    const double len = step.norm();
    if (len > 1.0) step *= 1.0 / len;
    b -= step(0);
    xi -= step(1);
    if (!std::isfinite(b) || !std::isfinite(xi)) break;
  }
  // Accept the best iterate if it sits at the integrator noise floor.
  if (best_n < 5e-10) {
    b = best_b;
    xi = best_xi;
    return true;
  }
  return false;
}

}  // namespace

std::vector<SelfSimilarProfile> find_profiles(const SimilarityODE& ode,
                                              double b_lo, double b_hi,
                                              const ShootOptions& opt) {
  const bool d5 = ode.d.d == 5;
  const int Nb = 240, Nx = 240;

  // Origin-side states at the match point for the b grid.
  std::vector<double> bs(Nb);
  std::vector<OdeState> yo(Nb);
  std::vector<bool> ok_o(Nb);
  for (int i = 0; i < Nb; ++i) {
    bs[i] = b_lo + (b_hi - b_lo) * (i + 0.5) / Nb;
    SeriesPoint s = series_origin(ode, bs[i], opt.eta0);
    OdeState y{s.W, s.Wp};
    ok_o[i] = integrate(ode, opt.eta0, opt.eta_match, y, opt.tol, opt.blowoff);
    yo[i] = y;
  }

  struct Branch {
    bool xi_is_c;
    double W1;
    double xi_lo, xi_hi;
  };
  std::vector<Branch> branches;
  if (d5) {
    branches.push_back({true, 0.0, -20.0, 5.0});
    branches.push_back({true, 1.0, -20.0, 5.0});
    branches.push_back({true, -1.0, -20.0, 5.0});
  } else {
    branches.push_back({false, 0.0, -1.2, 1.2});
  }

  std::vector<SelfSimilarProfile> roots;
  for (const Branch& br : branches) {
    std::vector<double> xs(Nx);
    std::vector<OdeState> yc(Nx);
    std::vector<bool> ok_c(Nx);
    for (int j = 0; j < Nx; ++j) {
      xs[j] = br.xi_lo + (br.xi_hi - br.xi_lo) * (j + 0.5) / Nx;
      const double W1 = br.xi_is_c ? br.W1 : xs[j];
      const double c = br.xi_is_c ? xs[j] : 0.0;
      SeriesPoint s = series_lightcone(ode, W1, c, opt.eta1);
      OdeState y{s.W, s.Wp};
      ok_c[j] =
          integrate(ode, 1.0 - opt.eta1, opt.eta_match, y, opt.tol,
                    opt.blowoff);
      yc[j] = y;
    }
    // Local minima of the defect over the (b, xi) grid seed the polish.
    auto dn = [&](int i, int j) -> double {
      if (!ok_o[i] || !ok_c[j]) return 1e300;
      const double a = yo[i].W - yc[j].W;
      const double b2 = yo[i].Wp - yc[j].Wp;
      return std::sqrt(a * a + b2 * b2);
    };
    for (int i = 0; i < Nb; ++i) {
      for (int j = 0; j < Nx; ++j) {
        const double v = dn(i, j);
        if (v > 2.0) continue;
        bool is_min = true;
        for (int di = -1; di <= 1 && is_min; ++di)
          for (int dj = -1; dj <= 1 && is_min; ++dj) {
            if (di == 0 && dj == 0) continue;
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || ii >= Nb || jj < 0 || jj >= Nx) continue;
            if (dn(ii, jj) < v) is_min = false;
          }
        if (!is_min) continue;
        double b = bs[i], xi = xs[j];
        if (!newton_polish(ode, br.xi_is_c, br.W1, b, xi, opt)) continue;
        if (b < b_lo || b >= b_hi) continue;
        const double W1 = br.xi_is_c ? br.W1 : xi;
        const double c = br.xi_is_c ? xi : 0.0;
        // Certify by re-integration at tightened tolerance.
        ShootOptions tight = opt;
        tight.tol = std::min(1e-13, opt.tol);
        ShotResult F = shoot(ode, b, c, W1, tight);
        if (F.diverged || defect_norm(F) > 1e-9) continue;
        bool dup = false;
        for (const auto& r : roots)
          if (std::abs(r.b - b) < 1e-6) dup = true;
        if (dup) continue;

        SelfSimilarProfile prof;
        prof.b = b;
        prof.W1 = W1;
        prof.residual = defect_norm(F);
        // Dense table by outward integration across [eta0, 1 - eta1].
        const int Ns = 512;
        std::vector<double> grid;
        for (int k = 0; k <= Ns; ++k) {
          const double e = (double)k / Ns;
          if (e > opt.eta0 && e < 1.0 - opt.eta1) grid.push_back(e);
        }
        SeriesPoint s0 = series_origin(ode, b, opt.eta0);
        OdeState y{s0.W, s0.Wp};
        std::vector<OdeState> ys;
        integrate(ode, opt.eta0, 1.0 - opt.eta1, y, opt.tol, opt.blowoff,
                  &grid, &ys);
        const long npts = (long)ys.size() + 2;
        prof.table.kind = ProfileKind::Numeric;
        prof.table.eta.resize(npts);
        prof.table.w.resize(npts);
        prof.table.wp.resize(npts);
        prof.table.eta(0) = 0.0;
        prof.table.w(0) = 1.0;
        prof.table.wp(0) = 0.0;
        for (size_t k = 0; k < ys.size(); ++k) {
          prof.table.eta(k + 1) = grid[k];
          prof.table.w(k + 1) = ys[k].W;
          prof.table.wp(k + 1) = ys[k].Wp;
        }
        // Light-cone slope from the certified endpoint state for the
        // non-d5 branches; for d5 it is the shot parameter itself.
        prof.c = br.xi_is_c ? c : y.Wp;
        prof.table.eta(npts - 1) = 1.0;
        prof.table.w(npts - 1) = W1;
        prof.table.wp(npts - 1) = prof.c;
        roots.push_back(std::move(prof));
      }
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const SelfSimilarProfile& a, const SelfSimilarProfile& x) {
              return std::abs(a.b) < std::abs(x.b);
            });
  return roots;
}

}  // namespace ym
