#include "ym/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace ym {

LogLogFit fit_loglog(const ArrayXd& x, const ArrayXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog: need >= 2 matching samples");
  if ((x <= 0.0).any() || (y <= 0.0).any())
    throw std::invalid_argument("fit_loglog: positive data required");
  const long n = x.size();
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (long i = 0; i < n; ++i) {
    A(i, 0) = std::log(x(i));
    A(i, 1) = 1.0;
    b(i) = std::log(y(i));
  }
  Eigen::Vector2d c = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  LogLogFit out;
  out.exponent = c(0);
  out.amplitude = std::exp(c(1));
  out.rms_residual = std::sqrt((A * c - b).squaredNorm() / n);
  out.n_points = n;
  return out;
}

namespace {

double loglog_residual_for_T(const ArrayXd& t, const ArrayXd& lam, double T,
                             LogLogFit* fit_out) {
  ArrayXd x = T - t;
  LogLogFit f = fit_loglog(x, lam);
  if (fit_out) *fit_out = f;
  return f.rms_residual;
}

}  // namespace

PowerLawFit fit_power_law_with_origin(const ArrayXd& t, const ArrayXd& lambda) {
  const long n = t.size();
  if (n < 3) throw std::invalid_argument("fit_power_law: need >= 3 samples");
  for (long i = 0; i + 1 < n; ++i)
    if (t(i + 1) <= t(i))
      throw std::invalid_argument("fit_power_law: t must increase");
  if ((lambda <= 0.0).any())
    throw std::invalid_argument("fit_power_law: lambda > 0 required");

  const double t_last = t(n - 1);
  const double lam_last = lambda(n - 1);
  const double span = t_last - t(0);
  const double g_lo = std::log(1e-6 * lam_last);
  const double g_hi = std::log(1e3 * lam_last + 10.0 * span);

  // Coarse scan in ln(T - t_last), then golden-section refinement.
  double best_g = g_lo, best_res = 1e300;
  const int n_scan = 256;
  for (int i = 0; i <= n_scan; ++i) {
    const double g = g_lo + (g_hi - g_lo) * i / n_scan;
    const double res =
        loglog_residual_for_T(t, lambda, t_last + std::exp(g), nullptr);
    if (res < best_res) {
      best_res = res;
      best_g = g;
    }
  }
  double a = best_g - (g_hi - g_lo) / n_scan;
  double b = best_g + (g_hi - g_lo) / n_scan;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = loglog_residual_for_T(t, lambda, t_last + std::exp(x1), nullptr);
  double f2 = loglog_residual_for_T(t, lambda, t_last + std::exp(x2), nullptr);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = loglog_residual_for_T(t, lambda, t_last + std::exp(x1), nullptr);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = loglog_residual_for_T(t, lambda, t_last + std::exp(x2), nullptr);
    }
  }
  const double T = t_last + std::exp(0.5 * (a + b));
  LogLogFit lf;
  loglog_residual_for_T(t, lambda, T, &lf);
  PowerLawFit out;
  out.T = T;
  out.p = lf.exponent;
  out.C = lf.amplitude;
  out.rms_residual = lf.rms_residual;
  out.n_points = n;
  return out;
}

}  // namespace ym
