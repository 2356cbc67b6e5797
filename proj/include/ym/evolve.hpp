#pragma once

#include <string>
#include <vector>

#include "ym/fit.hpp"
#include "ym/mesh.hpp"
#include "ym/model.hpp"

// Time integration of the reduced wave equation on the AMR hierarchy:
// method of lines, second-order centered space differences, classical RK4
// in time, even-parity center, Sommerfeld outgoing outer boundary, and
// Kreiss-Oliger dissipation. Provides outcome classification
// (blowup/dispersion), scale extraction lambda(t), blowup-time fitting,
// and profile-distance diagnostics.

namespace ym {

struct EvolutionConfig {
  Dimension d{5};
  double A = 0.2;        // gaussian amplitude, w(0,r) = 1 - A r^2 e^{-sigma (r-R)^2}
  double sigma = 10.0;
  double R = 2.0;
  double r_max = 8.0;
  double dr0 = 8.0 / 1024.0;  // keeps the energy-ledger drift well under 1e-3
  double cfl = 0.4;
  double ko_eps = 0.02;
  AmrParams mesh;
  double t_end = 20.0;            // budget before Undetermined
  double blowup_factor = 1e12;    // curvature growth factor declaring blowup
  double disperse_w_tol = 1e-3;   // sup_{r<=1} |w - 1| bound
  double disperse_energy_frac = 1e-6;  // E(r<=1) / E0 bound
  double disperse_window = 2.0;        // how long both must hold
  std::vector<Profile> compare;   // profiles for distance diagnostics

  void validate() const;  // throws std::invalid_argument
};

enum class OutcomeKind { Blowup, Dispersion, Undetermined };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Undetermined;
  double T_estimate = 0.0;  // Blowup only
  double p = 0.0;           // fitted rate exponent, lambda ~ C (T - t)^p
  double final_time = 0.0;
  std::string reason;
};

struct DiagRow {
  double t = 0.0;
  double tau = 0.0;     // -ln(T - t), filled once T is known (else NaN)
  double w_rr0 = 0.0;   // d^2_r w(t, 0)
  double lambda = 0.0;  // scale estimate, 0 when undefined
  double E_cone = 0.0;  // light-cone energy, filled once T is known (else NaN)
  double E_total = 0.0;
  double flux_out = 0.0;  // cumulative outer-boundary energy flux
  int depth = 0;
  std::vector<double> dist;  // distances to config.compare (NaN if unresolved)
  // cumulative total/kinetic energy within r, on a log radial grid (for
  // post-hoc cone-energy evaluation once T is fitted)
  ArrayXd cum_r, cum_E, cum_K;
};

struct Snapshot {
  double t = 0.0;
  double lambda = 0.0;
  std::vector<Level> levels;
};

struct EvolutionResult {
  Outcome outcome;
  std::vector<DiagRow> series;
  std::vector<Snapshot> snapshots;
  double E0 = 0.0;
};

// Gaussian initial data sampled on the base grid; w(0,0) = 1 exactly.
Level make_initial_data(const EvolutionConfig& cfg);

// One RK4 step of the reduced equation on one level. Null left: even
// parity about r = 0 (the r = 0 node, if present, is pinned to w = 1).
// Null right: Sommerfeld outgoing condition on u = 1 - w.
void ym_step(Level& lev, double dt, const GhostFill* left,
             const GhostFill* right, Dimension d, double ko_eps);

// Fourth-order one-sided center curvature d^2_r w(t,0) using even parity.
double center_curvature(const Level& origin_level);

// lambda = sqrt(W''(0) / w_rr0); 0 when w_rr0 >= 0 (scale undefined).
double extract_scale(double w_rr0, Dimension d);

// sup over eta in [0, 1] of |w(lambda eta) - W(eta)| on the finest data.
// Throws std::runtime_error if lambda is under-resolved.
double profile_distance(const std::vector<Level>& levels,
                        const Profile& profile, double lambda,
                        int points_per_scale);

// Linear interpolation of a cumulative radial table (r increasing);
// clamps beyond the ends. Used on DiagRow::cum_* columns.
double interp_cumulative(const ArrayXd& r, const ArrayXd& C, double x);

// Power-law fit lambda = C (T - t)^p over the last decade of lambda.
// Requires >= 20 rows with lambda spanning >= 2 decades; throws
// std::runtime_error otherwise.
PowerLawFit estimate_blowup_time(const std::vector<DiagRow>& series,
                                 Dimension d);

class Evolution {
 public:
  explicit Evolution(EvolutionConfig cfg);   // gaussian data
  Evolution(EvolutionConfig cfg, Level base);  // custom base-level data

  // One coarse step (plus any triggered diagnostics); returns false once a
  // stop criterion has fired.
  bool advance_coarse();
  bool stopped() const { return stopped_; }

  // Runs to a stop criterion and finalizes (fits T, fills tau/E_cone).
  EvolutionResult run();
  // Finalizes the result from whatever has been run so far.
  EvolutionResult finish();

  const AmrHierarchy& hierarchy() const { return hier_; }
  const EvolutionConfig& config() const { return cfg_; }
  const std::vector<DiagRow>& series() const { return series_; }
  double threshold_curvature() const { return threshold_; }

 private:
  void init();
  DiagRow make_row(bool synchronized);
  void check_stops(const DiagRow& row);

  EvolutionConfig cfg_;
  AmrHierarchy hier_;
  std::vector<DiagRow> series_;
  std::vector<Snapshot> snaps_;
  double E0_ = 0.0;
  double threshold_ = 0.0;
  double flux_out_ = 0.0;
  double flux_rate_prev_ = 0.0;
  double lambda_row_ = 0.0;   // lambda at the last mid-cycle diagnostics row
  double lambda_snap_ = 0.0;  // lambda at the last snapshot
  double disperse_since_ = -1.0;
  double sup_inner_ = 0.0;  // sup_{r<=1} |w-1| at the last diagnostics row
  double E_inner_ = 0.0;    // energy within r <= 1 at the last row
  bool stopped_ = false;
  Outcome outcome_;
};

// Full driver: run the configured evolution to its outcome.
EvolutionResult classify_outcome(const EvolutionConfig& cfg);

}  // namespace ym
