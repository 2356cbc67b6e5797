#include "ym/evolve.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ym {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// thrown from the substep hook to abort a subcycle mid-recursion
struct StopSignal {
  OutcomeKind kind;
  std::string reason;
};

double w_second_deriv_limit(Dimension d) {
  if (d.d == 4) return -4.0;   // W_S''(0)
  if (d.d == 5) return -3.2;   // W_0''(0)
  throw std::invalid_argument("extract_scale: profile curvature known for d=4,5 only");
}

const Level* finest_origin_level(const std::vector<Level>& levels) {
  const Level* f = nullptr;
  for (const Level& L : levels)
    if (L.i_lo == 0 && L.n() >= 3) f = &L;
  return f;
}

double cur_lambda(const std::vector<Level>& levels, Dimension d) {
  const Level* f = finest_origin_level(levels);
  if (!f) return 0.0;
  return extract_scale(center_curvature(*f), d);
}

// second-order first derivative on a nonuniform grid
ArrayXd radial_deriv(const ArrayXd& r, const ArrayXd& w) {
  const long n = r.size();
  ArrayXd wr(n);
  for (long i = 1; i + 1 < n; ++i) {
    const double h1 = r(i) - r(i - 1), h2 = r(i + 1) - r(i);
    wr(i) = -h2 / (h1 * (h1 + h2)) * w(i - 1) +
            (h2 - h1) / (h1 * h2) * w(i) +
            h1 / (h2 * (h1 + h2)) * w(i + 1);
  }
  if (n >= 3) {
    const double h1 = r(1) - r(0), h2 = r(2) - r(1);
    wr(0) = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * w(0) +
            (h1 + h2) / (h1 * h2) * w(1) - h1 / (h2 * (h1 + h2)) * w(2);
    const double g1 = r(n - 1) - r(n - 2), g2 = r(n - 2) - r(n - 3);
    wr(n - 1) = (2.0 * g1 + g2) / (g1 * (g1 + g2)) * w(n - 1) -
                (g1 + g2) / (g1 * g2) * w(n - 2) +
                g1 / (g2 * (g1 + g2)) * w(n - 3);
  }
  if (r(0) == 0.0) wr(0) = 0.0;  // w is even about the origin
  return wr;
}

// cumulative trapezoid of c(d) rho r^{d-1}; C(i) = energy within r(i)
ArrayXd cumulative_energy(const ArrayXd& r, const ArrayXd& w,
                          const ArrayXd& wt, const ArrayXd& wr, Dimension d,
                          bool kinetic_only) {
  const long n = r.size();
  ArrayXd f(n), C(n);
  for (long i = 0; i < n; ++i) {
    if (r(i) == 0.0) {
      f(i) = 0.0;
      continue;
    }
    const double quart = kinetic_only
                             ? 0.0
                             : (wr(i) * wr(i) +
                                (d.d - 2) / (2.0 * r(i) * r(i)) *
                                    std::pow(1.0 - w(i) * w(i), 2));
    f(i) = (wt(i) * wt(i) + quart) * std::pow(r(i), d.d - 3);
  }
  const double cd = cd_coefficient(d);
  C(0) = 0.0;
  for (long i = 1; i < n; ++i)
    C(i) = C(i - 1) + cd * 0.5 * (f(i) + f(i - 1)) * (r(i) - r(i - 1));
  return C;
}

double interp_cum_impl(const ArrayXd& r, const ArrayXd& C, double x) {
  const long n = r.size();
  if (n == 0) return 0.0;
  if (x <= r(0)) return x <= 0.0 ? 0.0 : C(0) * x / std::max(r(0), 1e-300);
  if (x >= r(n - 1)) return C(n - 1);
  long lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const long m = (lo + hi) / 2;
    (r(m) <= x ? lo : hi) = m;
  }
  const double s = (x - r(lo)) / (r(hi) - r(lo));
  return (1.0 - s) * C(lo) + s * C(hi);
}

}  // namespace

double interp_cumulative(const ArrayXd& r, const ArrayXd& C, double x) {
  return interp_cum_impl(r, C, x);
}

void EvolutionConfig::validate() const {
  if (A < 0.0) throw std::invalid_argument("config: A >= 0 required");
  if (sigma <= 0.0) throw std::invalid_argument("config: sigma > 0 required");
  if (R <= 0.0 || R >= r_max)
    throw std::invalid_argument("config: 0 < R < r_max required");
  if (r_max <= 0.0 || dr0 <= 0.0 || dr0 >= r_max)
    throw std::invalid_argument("config: 0 < dr0 < r_max required");
  if (cfl <= 0.0 || cfl >= 1.0)
    throw std::invalid_argument("config: 0 < cfl < 1 required");
  if (ko_eps < 0.0) throw std::invalid_argument("config: ko_eps >= 0 required");
}

Level make_initial_data(const EvolutionConfig& cfg) {
  cfg.validate();
  Level L;
  L.depth = 0;
  L.i_lo = 0;
  L.dr = cfg.dr0;
  const long n = (long)std::lround(cfg.r_max / cfg.dr0) + 1;
  L.w.resize(n);
  L.wt = ArrayXd::Zero(n);
  for (long i = 0; i < n; ++i) {
    const double r = i * cfg.dr0;
    L.w(i) = 1.0 - cfg.A * r * r *
                       std::exp(-cfg.sigma * (r - cfg.R) * (r - cfg.R));
  }
  L.w(0) = 1.0;
  return L;
}

void ym_step(Level& L, double dt, const GhostFill* left,
             const GhostFill* right, Dimension d, double ko_eps) {
  const long n = L.n();
  const double dr = L.dr, t0 = L.time;
  const bool phys_right = right == nullptr;
  auto rhs = [&](const ArrayXd& w, const ArrayXd& wt, double ts, ArrayXd& dw,
                 ArrayXd& dwt) {
    ArrayXd pw(n + 4), pt(n + 4);
    pw.segment(2, n) = w;
    pt.segment(2, n) = wt;
    ArrayXd gw, gwt;
    if (left) {
      (*left)(ts, gw, gwt);
      pw.head(2) = gw;
      pt.head(2) = gwt;
    } else {
      // even parity about the r = 0 node
      pw(1) = w(1);
      pw(0) = w(2);
      pt(1) = wt(1);
      pt(0) = wt(2);
    }
    if (right) {
      (*right)(ts, gw, gwt);
      pw.tail(2) = gw;
      pt.tail(2) = gwt;
    } else {
      pw.tail(2) = w(n - 1);  // placeholders, never read
      pt.tail(2) = wt(n - 1);
    }
    for (long i = 0; i < n; ++i) {
      const long gi = L.i_lo + i;
      if (gi == 0) {  // regular center: w(t,0) = 1 is preserved exactly
        dw(i) = 0.0;
        dwt(i) = 0.0;
        continue;
      }
      if (phys_right && i == n - 1) continue;
      const double r = gi * dr;
      const double wrr = (pw(i + 1) - 2.0 * pw(i + 2) + pw(i + 3)) / (dr * dr);
      const double wr = (pw(i + 3) - pw(i + 1)) / (2.0 * dr);
      dw(i) = pt(i + 2);
      dwt(i) = pde_rhs(wrr, wr, pw(i + 2), r, d);
    }
    if (phys_right) {
      // Sommerfeld on u = 1 - w, advanced by advecting wt:
      // d_t wt = -d_r wt - (d-3)/(2r) wt, one-sided in r
      const long i = n - 1;
      const double r = (L.i_lo + i) * dr;
      const double wtr = (3.0 * pt(i + 2) - 4.0 * pt(i + 1) + pt(i)) / (2.0 * dr);
      dw(i) = pt(i + 2);
      dwt(i) = -wtr - (d.d - 3) / (2.0 * r) * pt(i + 2);
    }
    if (ko_eps > 0.0) {
      const double c = ko_eps / (16.0 * dr);
      const long hi = phys_right ? n - 3 : n - 1;
      for (long i = 0; i <= hi; ++i) {
        if (L.i_lo + i == 0) continue;
        dw(i) -= c * (pw(i) - 4.0 * pw(i + 1) + 6.0 * pw(i + 2) -
                      4.0 * pw(i + 3) + pw(i + 4));
        dwt(i) -= c * (pt(i) - 4.0 * pt(i + 1) + 6.0 * pt(i + 2) -
                       4.0 * pt(i + 3) + pt(i + 4));
      }
    }
  };
  ArrayXd k1w(n), k1t(n), k2w(n), k2t(n), k3w(n), k3t(n), k4w(n), k4t(n);
  rhs(L.w, L.wt, t0, k1w, k1t);
  rhs(L.w + 0.5 * dt * k1w, L.wt + 0.5 * dt * k1t, t0 + 0.5 * dt, k2w, k2t);
  rhs(L.w + 0.5 * dt * k2w, L.wt + 0.5 * dt * k2t, t0 + 0.5 * dt, k3w, k3t);
  rhs(L.w + dt * k3w, L.wt + dt * k3t, t0 + dt, k4w, k4t);
  L.w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
  L.wt += dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
}

double center_curvature(const Level& L) {
  if (L.i_lo != 0 || L.n() < 3)
    throw std::invalid_argument("center_curvature: level must contain r = 0");
  return (16.0 * L.w(1) - L.w(2) - 15.0) / (6.0 * L.dr * L.dr);
}

double extract_scale(double w_rr0, Dimension d) {
  const double Wpp = w_second_deriv_limit(d);
  if (w_rr0 >= 0.0) return 0.0;
  return std::sqrt(Wpp / w_rr0);
}

double profile_distance(const std::vector<Level>& levels,
                        const Profile& profile, double lambda,
                        int points_per_scale) {
  if (lambda <= 0.0)
    throw std::runtime_error("profile_distance: scale undefined");
  const Level* f = finest_origin_level(levels);
  if (!f || lambda < 0.25 * points_per_scale * f->dr)
    throw std::runtime_error("profile_distance: scale under-resolved");
  if (lambda > levels[0].r_hi())
    throw std::runtime_error("profile_distance: scale exceeds the domain");
  const int N = 512;
  double worst = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double eta = (double)k / N;
    const double w = sample_w(levels, lambda * eta);
    worst = std::max(worst, std::abs(w - profile.value(eta)));
  }
  return worst;
}

PowerLawFit estimate_blowup_time(const std::vector<DiagRow>& series,
                                 Dimension) {
  std::vector<double> ts, ls;
  for (const DiagRow& r : series)
    if (r.lambda > 0.0) {
      ts.push_back(r.t);
      ls.push_back(r.lambda);
    }
  if (ts.size() < 20)
    throw std::runtime_error(
        "estimate_blowup_time: need >= 20 rows with a defined scale");
  double lmin = ls[0], lmax = ls[0];
  for (double l : ls) {
    lmin = std::min(lmin, l);
    lmax = std::max(lmax, l);
  }
  if (lmax / lmin < 100.0)
    throw std::runtime_error(
        "estimate_blowup_time: scale series must span >= 2 decades");
  // fit window: the last decade of lambda
  std::vector<double> tw, lw;
  for (size_t i = 0; i < ts.size(); ++i)
    if (ls[i] <= 10.0 * lmin) {
      tw.push_back(ts[i]);
      lw.push_back(ls[i]);
    }
  ArrayXd ta = Eigen::Map<ArrayXd>(tw.data(), tw.size());
  ArrayXd la = Eigen::Map<ArrayXd>(lw.data(), lw.size());
  return fit_power_law_with_origin(ta, la);
}

Evolution::Evolution(EvolutionConfig cfg)
    : Evolution(cfg, make_initial_data(cfg)) {}

Evolution::Evolution(EvolutionConfig cfg, Level base)
    : cfg_(std::move(cfg)), hier_(cfg_.mesh, std::move(base)) {
  init();
}

void Evolution::init() {
  cfg_.validate();
  const Level& b = hier_.levels()[0];
  double m = 1.0;
  for (long i = 1; i + 1 < b.n(); ++i)
    m = std::max(m, std::abs(b.w(i - 1) - 2.0 * b.w(i) + b.w(i + 1)) /
                        (b.dr * b.dr));
  threshold_ = cfg_.blowup_factor * m;
  auto lam = [this]() { return cur_lambda(hier_.levels(), cfg_.d); };
  hier_.initial_regrid(lam);
  DiagRow row = make_row(true);
  E0_ = row.E_total;
  series_.push_back(std::move(row));
}

DiagRow Evolution::make_row(bool synchronized) {
  DiagRow row;
  const std::vector<Level>& ls = hier_.levels();
  row.t = synchronized ? ls[0].time : ls.back().time;
  row.depth = hier_.depth();
  row.tau = kNaN;
  row.E_cone = kNaN;
  const Level* f = finest_origin_level(ls);
  row.w_rr0 = f ? center_curvature(*f) : 0.0;
  row.lambda = extract_scale(row.w_rr0, cfg_.d);
  ArrayXd r, w, wt;
  composite(ls, r, w, wt);
  ArrayXd wr = radial_deriv(r, w);
  ArrayXd cumE = cumulative_energy(r, w, wt, wr, cfg_.d, false);
  ArrayXd cumK = cumulative_energy(r, w, wt, wr, cfg_.d, true);
  row.E_total = cumE(cumE.size() - 1);
  row.flux_out = flux_out_;
  // decimate the cumulants onto a log radial grid for post-hoc use
  const int m = 384;
  const double r_hi = r(r.size() - 1);
  const double r_lo = std::max(r(1), 1e-14 * r_hi);
  row.cum_r.resize(m);
  row.cum_E.resize(m);
  row.cum_K.resize(m);
  for (int k = 0; k < m; ++k) {
    const double x = r_lo * std::pow(r_hi / r_lo, (double)k / (m - 1));
    row.cum_r(k) = x;
    row.cum_E(k) = interp_cumulative(r, cumE, x);
    row.cum_K(k) = interp_cumulative(r, cumK, x);
  }
  for (const Profile& p : cfg_.compare) {
    double dd = kNaN;
    try {
      // each profile sets its own scale through its origin curvature
      const double lam_p = row.w_rr0 < 0.0
                               ? std::sqrt(p.curvature_at_origin() / row.w_rr0)
                               : 0.0;
      dd = profile_distance(ls, p, lam_p, cfg_.mesh.points_per_scale);
    } catch (const std::exception&) {
    }
    row.dist.push_back(dd);
  }
  // dispersion bookkeeping (inner-region field amplitude)
  double sup_inner = 0.0;
  for (long i = 0; i < r.size() && r(i) <= 1.0; ++i)
    sup_inner = std::max(sup_inner, std::abs(w(i) - 1.0));
  sup_inner_ = sup_inner;
  E_inner_ = interp_cumulative(r, cumE, 1.0);
  return row;
}

void Evolution::check_stops(const DiagRow& row) {
  if (!std::isfinite(row.w_rr0) || !std::isfinite(row.E_total)) {
    stopped_ = true;
    outcome_ = {OutcomeKind::Undetermined, 0.0, 0.0, row.t,
                "numerical breakdown"};
    return;
  }
  if (std::abs(row.w_rr0) > threshold_) {
    stopped_ = true;
    outcome_ = {OutcomeKind::Blowup, 0.0, 0.0, row.t,
                "center curvature exceeded threshold"};
    return;
  }
  if (hier_.resolution_exhausted()) {
    stopped_ = true;
    outcome_ = {OutcomeKind::Blowup, 0.0, 0.0, row.t,
                "resolution exhausted at max depth"};
    return;
  }
  if (sup_inner_ < cfg_.disperse_w_tol &&
      E_inner_ <= cfg_.disperse_energy_frac * E0_ && row.t > 0.0) {
    if (disperse_since_ < 0.0) disperse_since_ = row.t;
    if (row.t - disperse_since_ >= cfg_.disperse_window) {
      stopped_ = true;
      outcome_ = {OutcomeKind::Dispersion, 0.0, 0.0, row.t,
                  "inner field and energy below dispersal thresholds"};
      return;
    }
  } else {
    disperse_since_ = -1.0;
  }
  if (row.t >= cfg_.t_end) {
    stopped_ = true;
    outcome_ = {OutcomeKind::Undetermined, 0.0, 0.0, row.t,
                "time budget exceeded"};
  }
}

bool Evolution::advance_coarse() {
  if (stopped_) return false;
  const double dt = cfg_.cfl * cfg_.dr0;
  auto lam = [this]() { return cur_lambda(hier_.levels(), cfg_.d); };
  LevelStepper step = [this](Level& L, double h, const GhostFill* l,
                             const GhostFill* r) {
    ym_step(L, h, l, r, cfg_.d, cfg_.ko_eps);
  };
  SubstepHook hook = [this](int, double) {
    const Level* f = finest_origin_level(hier_.levels());
    if (!f) return;
    const double c = center_curvature(*f);
    const double l = extract_scale(c, cfg_.d);
    if (l > 0.0 && (lambda_row_ <= 0.0 || l < 0.8 * lambda_row_)) {
      DiagRow row = make_row(false);
      if (series_.empty() || row.t > series_.back().t)
        series_.push_back(std::move(row));
      lambda_row_ = l;
    }
    // snapshots start once the scale fits inside the domain
    if (l > 0.0 && l <= hier_.levels()[0].r_hi() &&
        (lambda_snap_ <= 0.0 || l < 0.5 * lambda_snap_)) {
      snaps_.push_back({hier_.levels().back().time, l, hier_.levels()});
      lambda_snap_ = l;
    }
    if (!std::isfinite(c))
      throw StopSignal{OutcomeKind::Undetermined, "numerical breakdown"};
    if (std::abs(c) > threshold_)
      throw StopSignal{OutcomeKind::Blowup,
                       "center curvature exceeded threshold"};
    if (hier_.resolution_exhausted())
      throw StopSignal{OutcomeKind::Blowup,
                       "resolution exhausted at max depth"};
  };
  try {
    hier_.subcycle(dt, step, lam, &hook);
  } catch (const StopSignal& s) {
    stopped_ = true;
    outcome_ = {s.kind, 0.0, 0.0, hier_.levels().back().time, s.reason};
    DiagRow row = make_row(false);
    if (series_.empty() || row.t > series_.back().t)
      series_.push_back(std::move(row));
    return false;
  }
  // outer-boundary flux ledger (trapezoid in time)
  const Level& b = hier_.levels()[0];
  const long n = b.n();
  const double wr =
      (3.0 * b.w(n - 1) - 4.0 * b.w(n - 2) + b.w(n - 3)) / (2.0 * b.dr);
  const double rate = -cd_coefficient(cfg_.d) * 2.0 * b.wt(n - 1) * wr *
                      std::pow(b.r(n - 1), cfg_.d.d - 3);
  flux_out_ += 0.5 * (flux_rate_prev_ + rate) * dt;
  flux_rate_prev_ = rate;
  DiagRow row = make_row(true);
  check_stops(row);
  if (series_.empty() || row.t > series_.back().t)
    series_.push_back(std::move(row));
  return !stopped_;
}

EvolutionResult Evolution::finish() {
  EvolutionResult res;
  res.outcome = outcome_;
  if (!series_.empty()) res.outcome.final_time = series_.back().t;
  res.E0 = E0_;
  if (outcome_.kind == OutcomeKind::Blowup) {
    try {
      PowerLawFit f = estimate_blowup_time(series_, cfg_.d);
      res.outcome.T_estimate = f.T;
      res.outcome.p = f.p;
      for (DiagRow& r : series_) {
        if (f.T > r.t) {
          r.tau = -std::log(f.T - r.t);
          r.E_cone = interp_cumulative(r.cum_r, r.cum_E, f.T - r.t);
        }
      }
    } catch (const std::exception&) {
      res.outcome.reason += "; rate fit unavailable";
    }
  }
  res.series = series_;
  res.snapshots = snaps_;
  return res;
}

EvolutionResult Evolution::run() {
  while (advance_coarse()) {
  }
  return finish();
}

EvolutionResult classify_outcome(const EvolutionConfig& cfg) {
  Evolution ev(cfg);
  return ev.run();
}

}  // namespace ym
