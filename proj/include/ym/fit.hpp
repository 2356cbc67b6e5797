#pragma once

#include <Eigen/Dense>

// Log-log power-law fitting utilities used by the blowup-rate and
// scaling-law diagnostics.

namespace ym {

using Eigen::ArrayXd;

struct LogLogFit {
  double exponent = 0.0;   // slope in log-log coordinates
  double amplitude = 0.0;  // exp(intercept)
  double rms_residual = 0.0;
  long n_points = 0;
};

// Least-squares line through (ln x, ln y). Requires x, y > 0.
LogLogFit fit_loglog(const ArrayXd& x, const ArrayXd& y);

struct PowerLawFit {
  double T = 0.0;         // fitted singular time
  double p = 0.0;         // lambda ~ C (T - t)^p
  double C = 0.0;
  double rms_residual = 0.0;  // RMS of ln-residuals
  long n_points = 0;
};

// Fit lambda(t) = C (T - t)^p with T unknown, by scanning/bisecting T above
// the last sample time and solving the inner linear problem in log-log
// coordinates. t must be strictly increasing, lambda > 0.
PowerLawFit fit_power_law_with_origin(const ArrayXd& t, const ArrayXd& lambda);

}  // namespace ym
