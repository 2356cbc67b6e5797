#pragma once

#include <functional>
#include <vector>

#include "ym/model.hpp"

// One-dimensional Berger-Oliger adaptive mesh refinement: nested radial
// grids with factor-2 refinement, cubic prolongation, injection
// restriction, gradient + scale-floor flagging, and time-subcycled
// advancement. The PDE itself is supplied by the caller as a per-level
// stepper callback; this module owns grid structure and inter-level
// transfer only.

namespace ym {

// Ghost nodes supplied to the stepper on parent-fed edges.
inline constexpr int kGhost = 2;

struct Level {
  int depth = 0;
  long i_lo = 0;   // first node, in units of this level's dr (r = i * dr)
  double dr = 0.0;
  double time = 0.0;
  ArrayXd w, wt;

  long n() const { return w.size(); }
  long i_hi() const { return i_lo + n() - 1; }
  double r_lo() const { return i_lo * dr; }
  double r_hi() const { return i_hi() * dr; }
  double r(long k) const { return (i_lo + k) * dr; }
};

struct AmrParams {
  int max_depth = 26;
  double refine_threshold = 0.04;  // flags where |dr w_r| exceeds this
  int points_per_scale = 64;       // minimum cells across the scale lambda
  int buffer_width = 8;            // parent-cell margin around flags
  int regrid_interval = 4;         // in each level's own steps
};

// Cubic interpolation of parent data onto child nodes c_lo..c_hi (child
// global indices; coincident nodes are copied). Even parity about r = 0 is
// used when the stencil crosses the origin. Throws std::invalid_argument
// if the child range is not contained in the parent.
void prolong(const Level& parent, long c_lo, long c_hi, ArrayXd& w,
             ArrayXd& wt);

// Injection of child values onto coincident parent nodes. Throws
// std::runtime_error if the levels are not time-synchronized.
void restrict_onto(const Level& child, Level& parent);

struct FlagResult {
  bool any = false;
  long i_lo = 0, i_hi = 0;  // bounding interval of flagged nodes (level units)
  bool wants_deeper = false;  // scale floor fired on this level
};

// Flag predicate on one level: gradient |w_{i+1} - w_{i-1}|/2 above the
// refinement threshold, plus a scale floor near the origin — if the level
// contains r = 0 and lambda would be resolved by fewer than
// points_per_scale cells of the next finer level, the region [0, 4 lambda]
// is flagged. lambda <= 0 means "no scale estimate".
FlagResult flag_cells(const Level& lev, double lambda, const AmrParams& prm);

// Fills kGhost ghost samples just outside one edge of a level at the given
// time (gw/gwt ordered by increasing r).
using GhostFill =
    std::function<void(double time, ArrayXd& gw, ArrayXd& gwt)>;

// Advances one level by dt. Null fills mark physical edges (r = 0 parity
// on the left, outgoing condition on the right); the stepper must not
// advance lev.time — the hierarchy does.
using LevelStepper = std::function<void(
    Level& lev, double dt, const GhostFill* left, const GhostFill* right)>;

// Callback returning the current scale estimate lambda (<= 0 if
// undefined), queried at regrid time.
using ScaleEstimate = std::function<double()>;

// Called after every completed step of the deepest level, with all levels'
// data current at that level's time (coarser levels possibly ahead).
using SubstepHook = std::function<void(int depth, double time)>;

class AmrHierarchy {
 public:
  AmrHierarchy(AmrParams prm, Level base);

  const std::vector<Level>& levels() const { return levels_; }
  std::vector<Level>& levels() { return levels_; }
  const AmrParams& params() const { return prm_; }
  int depth() const { return (int)levels_.size() - 1; }
  double time() const { return levels_[0].time; }
  bool resolution_exhausted() const { return exhausted_; }

  // One coarse step: depth k advances 2^k steps of dt / 2^k with ghost
  // data time-interpolated from its parent, restriction after each pair of
  // child steps, and regridding every regrid_interval of each level's own
  // steps.
  void subcycle(double dt, const LevelStepper& step, const ScaleEstimate& lam,
                const SubstepHook* hook = nullptr);

  // Builds the initial nested stack by repeated flagging at t = 0.
  void initial_regrid(const ScaleEstimate& lam);

  // Appends a prepared finer level (used for fixed-layout runs and tests).
  void push_level(Level lev);

  // Throws std::logic_error on any nesting violation.
  void check_nesting() const;

 private:
  void advance(int k, double dt, const Level* pold, const Level* pnew,
               const LevelStepper& step, const ScaleEstimate& lam,
               const SubstepHook* hook);
  void regrid_child(int k, const ScaleEstimate& lam);

  AmrParams prm_;
  std::vector<Level> levels_;
  std::vector<long> steps_;
  bool exhausted_ = false;
};

// Value of w at radius r from the finest level covering r (cubic in
// space). Throws std::invalid_argument if r is outside the base level.
double sample_w(const std::vector<Level>& levels, double r);

// Composite arrays (r, w, wt) using the finest available data at every
// radius; r is strictly increasing.
void composite(const std::vector<Level>& levels, ArrayXd& r, ArrayXd& w,
               ArrayXd& wt);

}  // namespace ym
