#include "ym/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ym {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_window(double lo, double hi) {
  std::ostringstream os;
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

Bracket bisect_critical(const OutcomeProbe& probe, double A_lo, double A_hi,
                        double rel_tol) {
  if (!(A_lo > 0.0) || !(A_lo < A_hi) || !(rel_tol > 0.0))
    throw std::invalid_argument("bisect: need 0 < A_lo < A_hi and tol > 0");
  Bracket br;
  br.A_lo = A_lo;
  br.A_hi = A_hi;
  const OutcomeKind k_lo = probe(A_lo);
  br.history.emplace_back(A_lo, k_lo);
  const OutcomeKind k_hi = probe(A_hi);
  br.history.emplace_back(A_hi, k_hi);
  if (k_lo != OutcomeKind::Dispersion || k_hi != OutcomeKind::Blowup)
    throw std::invalid_argument(
        "bisect: invalid initial bracket (need Dispersion at A_lo, Blowup at "
        "A_hi)");
  while (br.rel_width() > rel_tol) {
    const double mid = 0.5 * (br.A_lo + br.A_hi);
    if (mid <= br.A_lo || mid >= br.A_hi) break;  // double precision floor
    const OutcomeKind k = probe(mid);
    br.history.emplace_back(mid, k);
    if (k == OutcomeKind::Undetermined) {
      br.limited = true;
      br.note = "probe became Undetermined before reaching tolerance";
      break;
    }
    (k == OutcomeKind::Blowup ? br.A_hi : br.A_lo) = mid;
  }
  return br;
}

ScalingFit fit_scaling(const ArrayXd& x, const ArrayXd& y) {
  LogLogFit f = fit_loglog(x, y);
  ScalingFit s;
  s.x = x;
  s.y = y;
  s.exponent = f.exponent;
  s.amplitude = f.amplitude;
  s.residual = f.rms_residual;
  s.n_points = f.n_points;
  s.window = format_window(x.minCoeff(), x.maxCoeff());
  s.reliable = f.n_points >= 3 && f.rms_residual <= 0.05;
  if (!s.reliable) s.caveat = "fit residual above 0.05; excluded from claims";
  return s;
}

const SelfSimilarProfile& excited_profile() {
  static const SelfSimilarProfile p = [] {
    SimilarityODE ode{Dimension{5}};
    auto roots = find_profiles(ode, kExcitedB - 0.5, kExcitedB + 0.5);
    if (roots.size() != 1)
      throw std::runtime_error("excited profile: bracket search failed");
    return roots.front();
  }();
  return p;
}

DistanceSeries attractor_comparison(EvolutionConfig cfg,
                                    const Profile& attractor) {
  cfg.compare.clear();
  cfg.compare.push_back(attractor);
  EvolutionResult res = classify_outcome(cfg);
  DistanceSeries out;
  out.outcome = res.outcome;
  out.min_dist = kNaN;
  for (const DiagRow& r : res.series) {
    if (r.dist.empty() || !std::isfinite(r.dist[0])) continue;
    out.t.push_back(r.t);
    out.lambda.push_back(r.lambda);
    out.dist.push_back(r.dist[0]);
    if (!(r.dist[0] >= out.min_dist)) {
      out.min_dist = r.dist[0];
      out.t_min = r.t;
    }
  }
  if (out.dist.empty())
    throw std::runtime_error(
        "attractor comparison: no resolved profile distance in the run");
  return out;
}

ScalingFit subcritical_sweep(const std::vector<double>& eps,
                             const EvolutionConfig& base, double A_star) {
  if (eps.empty()) throw std::invalid_argument("sweep: empty eps list");
  ArrayXd x(eps.size()), y(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || eps[i] >= A_star)
      throw std::invalid_argument("sweep: need 0 < eps < A_star");
    EvolutionConfig cfg = base;
    cfg.A = A_star - eps[i];
    EvolutionResult res = classify_outcome(cfg);
    if (res.outcome.kind == OutcomeKind::Blowup) {
      std::ostringstream os;
      os << "subcritical sweep contaminated: A = A* - " << eps[i]
         << " blew up (A* not accurate enough)";
      throw std::runtime_error(os.str());
    }
    double rho_max = 0.0;
    for (const DiagRow& r : res.series)
      rho_max = std::max(rho_max, energy_density_center(r.w_rr0, base.d));
    x(i) = eps[i];
    y(i) = rho_max;
  }
  ScalingFit s = fit_scaling(x, y);
  s.caveat += s.caveat.empty() ? "" : "; ";
  s.caveat += "expected exponent -4/5";
  return s;
}

double critical_horizon(const EvolutionConfig& base, double A_star,
                        const Profile& attractor) {
  EvolutionConfig cfg = base;
  cfg.A = A_star;
  DistanceSeries ds = attractor_comparison(cfg, attractor);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (size_t i = 0; i < ds.t.size(); ++i) {
    if (ds.dist[i] > 2.0 * ds.min_dist || ds.lambda[i] <= 0.0) continue;
    sx += ds.t[i];
    sy += ds.lambda[i];
    sxx += ds.t[i] * ds.t[i];
    sxy += ds.t[i] * ds.lambda[i];
    ++n;
  }
  if (n < 10)
    throw std::runtime_error("critical horizon: hovering window too short");
  const double det = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / det;
  const double icpt = (sy * sxx - sx * sxy) / det;
  if (!(slope < 0.0))
    throw std::runtime_error("critical horizon: scale not decaying");
  return -icpt / slope;
}

DepartureScaling departure_scaling(const std::vector<double>& eps,
                                   const EvolutionConfig& base, double A_star,
                                   double T_hat, const Profile& attractor,
                                   double factor) {
  if (eps.empty()) throw std::invalid_argument("departure: empty eps list");
  if (!(factor > 1.0))
    throw std::invalid_argument("departure: factor > 1 required");
  DepartureScaling out;
  out.factor = factor;
  out.T_hat = T_hat;
  std::vector<double> xs, ys;
  for (double e : eps) {
    EvolutionConfig cfg = base;
    cfg.A = A_star + e;
    DistanceSeries ds = attractor_comparison(cfg, attractor);
    Departure dep;
    dep.eps = e;
    dep.min_dist = ds.min_dist;
    for (size_t i = 0; i < ds.t.size(); ++i) {
      if (ds.t[i] <= ds.t_min) continue;
      if (ds.dist[i] > factor * ds.min_dist) {
        dep.t_star = ds.t[i];
        dep.detected = true;
        break;
      }
    }
    out.runs.push_back(dep);
    if (dep.detected && T_hat - dep.t_star > 0.0) {
      xs.push_back(e);
      ys.push_back(T_hat - dep.t_star);
    }
  }
  if (xs.size() < 2)
    throw std::runtime_error(
        "departure scaling: fewer than two detected departures");
  ArrayXd x = Eigen::Map<ArrayXd>(xs.data(), xs.size());
  ArrayXd y = Eigen::Map<ArrayXd>(ys.data(), ys.size());
  out.fit = fit_scaling(x, y);
  out.fit.caveat += out.fit.caveat.empty() ? "" : "; ";
  out.fit.caveat += "expected exponent 1/5; departure detector factor ";
  out.fit.caveat += std::to_string(factor);
  return out;
}

ScalingFit anomalous_rate_fit(const std::vector<DiagRow>& series, Dimension d) {
  PowerLawFit f = estimate_blowup_time(series, d);
  ScalingFit s;
  s.exponent = f.p - 1.0;  // alpha of lambda ~ (T - t)^(1 + alpha)
  s.amplitude = f.C;
  s.residual = f.rms_residual;
  s.n_points = f.n_points;
  s.window = "last decade of lambda";
  s.reliable = f.rms_residual <= 0.05;
  s.caveat =
      "alpha depends weakly on initial data and the fitting window; the true "
      "asymptotic rate law is open";
  return s;
}

ConeEnergyLimit cone_energy_limit(const EvolutionResult& run, Dimension d) {
  ConeEnergyLimit out;
  const double T = run.outcome.T_estimate;
  std::vector<std::pair<double, double>> pts;  // (T - t, E_cone), dt ascending
  for (const DiagRow& r : run.series)
    if (std::isfinite(r.E_cone) && r.E_cone > 0.0 && r.t < T)
      pts.emplace_back(T - r.t, r.E_cone);
  if (pts.empty()) return out;  // no cone energy recorded (vacuum, no T, ...)
  std::sort(pts.begin(), pts.end());
  out.defined = true;
  const double dt_f = pts.front().first;
  const double E_f = pts.front().second;

  auto E_at = [&](double dt) {
    const double x = std::log(dt);
    if (x <= std::log(pts.front().first)) return pts.front().second;
    if (x >= std::log(pts.back().first)) return pts.back().second;
    for (size_t i = 1; i < pts.size(); ++i) {
      if (std::log(pts[i].first) < x) continue;
      const double x0 = std::log(pts[i - 1].first), x1 = std::log(pts[i].first);
      const double s = (x - x0) / (x1 - x0);
      return std::exp((1.0 - s) * std::log(pts[i - 1].second) +
                      s * std::log(pts[i].second));
    }
    return pts.back().second;
  };
  out.decade_ratio = E_f / E_at(10.0 * dt_f);
  out.to_zero = out.decade_ratio < 0.3;

  // linear-in-dt extrapolation over the last decade
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (const auto& [dt, E] : pts) {
    if (dt > 10.0 * dt_f) break;
    sx += dt;
    sy += E;
    sxx += dt * dt;
    sxy += dt * E;
    ++n;
  }
  const double det = n * sxx - sx * sx;
  out.limit = det != 0.0 ? (sy * sxx - sx * sxy) / det : E_f;
  if (n < 8) out.low_confidence = true;

  // kinetic fraction at the last reliable time
  for (auto it = run.series.rbegin(); it != run.series.rend(); ++it) {
    if (!std::isfinite(it->E_cone) || it->E_cone <= 0.0 || it->t >= T ||
        it->cum_r.size() == 0)
      continue;
    out.kinetic_fraction =
        interp_cumulative(it->cum_r, it->cum_K, T - it->t) / it->E_cone;
    break;
  }

  try {
    PowerLawFit f = estimate_blowup_time(run.series, d);
    if (f.rms_residual > 0.05) out.low_confidence = true;
  } catch (const std::runtime_error&) {
    out.low_confidence = true;
  }
  return out;
}

}  // namespace ym
