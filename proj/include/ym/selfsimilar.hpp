#pragma once

#include <vector>

#include "ym/model.hpp"

// Boundary-value solver for self-similar profiles W(eta) on the past light
// cone eta in [0,1]: series expansions at both singular endpoints, two-sided
// shooting with a matching condition at an interior point, and a bracket
// scan that recovers the ground state W_0 and the excited solution W_1.

namespace ym {

struct SimilarityODE {
  Dimension d;
  // (1 - eta^2) W'' + ((d-3)/eta - 2 eta) W' + (d-2)/eta^2 W (1 - W^2) = 0
  double second_deriv(double eta, double W, double Wp) const;
  // Residual of the ODE at a point given all derivatives.
  double residual(double eta, double W, double Wp, double Wpp) const;
};

struct SeriesPoint {
  double W;
  double Wp;
  double truncation;  // magnitude of the last retained term
};

// Taylor expansion about eta = 0: W = 1 + b eta^2 + a4 eta^4 + ...,
// coefficients determined recursively by the ODE.
SeriesPoint series_origin(const SimilarityODE& ode, double b, double eta0,
                          int n_terms = 8);

// Expansion about eta = 1 with W(1) = W1 and W'(1) = c. For d = 5 the ODE
// degenerates at eta = 1 and forces W1 (1 - W1^2) = 0, so W1 must be one of
// {0, +1, -1} and c is free; for other d the slope c is determined by the
// recurrence and the supplied c is ignored.
SeriesPoint series_lightcone(const SimilarityODE& ode, double W1, double c,
                             double eta1, int n_terms = 8);

struct ShotResult {
  double dW = 0.0;   // origin-side minus cone-side value at the match point
  double dWp = 0.0;
  bool diverged = false;
};

// The series offsets trade truncation error (larger offset) against
// round-off amplification through the eta^2 growing mode near the origin
// (smaller offset): a perturbation eps at eta0 reaches ~eps (1/2eta0)^2 at
// the matching point. 1e-3 keeps both far below the certification bound.
struct ShootOptions {
  double eta0 = 1e-3;
  double eta1 = 1e-3;
  double eta_match = 0.5;
  double tol = 1e-12;     // local error tolerance of the integrator
  double blowoff = 1e3;   // |W| beyond this aborts a shot
};

ShotResult shoot(const SimilarityODE& ode, double b, double c, double W1,
                 const ShootOptions& opt = {});

struct SelfSimilarProfile {
  double b = 0.0;         // origin curvature parameter, W ~ 1 + b eta^2
  double c = 0.0;         // light-cone slope W'(1)
  double W1 = 0.0;        // endpoint value, in {0, +1, -1} for d = 5
  double residual = 0.0;  // matching defect of the certified re-integration
  Profile table;          // Numeric profile sampled on [0, 1]
};

// Parameters of the first excited d = 5 profile, fixed once by a bracket
// scan of the endpoint constraint W(1)(1 - W(1)^2) = 0 over the origin
// family: the only regular roots with b in [-2000, 0) are b = -8/5 and
// this one.
inline constexpr double kExcitedB = -72.3920159133;
inline constexpr double kExcitedC = 0.4813158000;
inline constexpr double kExcitedW1 = 0.0;

// Scan b in [b_lo, b_hi) over all admissible light-cone branches, polish
// candidate matches by Newton iteration on (b, c), certify each root by
// re-integration at tightened tolerance, and return roots ordered by |b|.
// For d = 5 this recovers b0 = -8/5 (the closed-form W_0) and the excited
// profile W_1; for d = 4 the scan reports no regular roots.
std::vector<SelfSimilarProfile> find_profiles(const SimilarityODE& ode,
                                              double b_lo, double b_hi,
                                              const ShootOptions& opt = {});

}  // namespace ym
