#include "ym/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ym {

namespace {

// Lagrange cubic through nodes base..base+3 evaluated at node-units x.
double cubic4(const double* v, double x) {
  const double t0 = x, t1 = x - 1.0, t2 = x - 2.0, t3 = x - 3.0;
  return v[0] * (t1 * t2 * t3) / (-6.0) + v[1] * (t0 * t2 * t3) / 2.0 +
         v[2] * (t0 * t1 * t3) / (-2.0) + v[3] * (t0 * t1 * t2) / 6.0;
}

// Parent node accessor with even parity about r = 0.
double pnode(const Level& p, const ArrayXd& a, long i) {
  if (i < p.i_lo) {
    if (p.i_lo != 0)
      throw std::invalid_argument("mesh: stencil outside parent level");
    i = -i;
  }
  if (i > p.i_hi())
    throw std::invalid_argument("mesh: stencil outside parent level");
  return a(i - p.i_lo);
}

// Interpolate parent array at child global index gi (child units).
double pinterp(const Level& p, const ArrayXd& a, long gi) {
  if (gi % 2 == 0) return pnode(p, a, gi / 2);
  const long m = (gi - 1) / 2;
  // midpoint stencil m-1..m+2, shifted one-sided at the right edge; the
  // left edge uses parity through pnode
  long base = m - 1;
  if (p.i_lo == 0) base = std::max(base, -1L);
  else base = std::max(base, p.i_lo);
  base = std::min(base, p.i_hi() - 3);
  double v[4];
  for (int j = 0; j < 4; ++j) v[j] = pnode(p, a, base + j);
  return cubic4(v, (m + 0.5) - base);
}

}  // namespace

void prolong(const Level& parent, long c_lo, long c_hi, ArrayXd& w,
             ArrayXd& wt) {
  if (c_lo > c_hi) throw std::invalid_argument("prolong: empty child range");
  if (c_lo < 2 * parent.i_lo || c_hi > 2 * parent.i_hi())
    throw std::invalid_argument("prolong: child range not inside parent");
  const long n = c_hi - c_lo + 1;
  w.resize(n);
  wt.resize(n);
  for (long k = 0; k < n; ++k) {
    w(k) = pinterp(parent, parent.w, c_lo + k);
    wt(k) = pinterp(parent, parent.wt, c_lo + k);
  }
}

void restrict_onto(const Level& child, Level& parent) {
  if (std::abs(child.time - parent.time) >
      1e-10 * (1.0 + std::abs(parent.time)))
    throw std::runtime_error("restrict_onto: levels not time-synchronized");
  for (long k = 0; k < child.n(); ++k) {
    const long gi = child.i_lo + k;
    if (gi % 2 != 0) continue;
    const long pi = gi / 2;
    if (pi < parent.i_lo || pi > parent.i_hi()) continue;
    parent.w(pi - parent.i_lo) = child.w(k);
    parent.wt(pi - parent.i_lo) = child.wt(k);
  }
}

FlagResult flag_cells(const Level& lev, double lambda, const AmrParams& prm) {
  FlagResult out;
  auto mark = [&](long i) {
    if (!out.any) {
      out.i_lo = out.i_hi = i;
      out.any = true;
    } else {
      out.i_lo = std::min(out.i_lo, i);
      out.i_hi = std::max(out.i_hi, i);
    }
  };
  for (long k = 1; k + 1 < lev.n(); ++k)
    if (0.5 * std::abs(lev.w(k + 1) - lev.w(k - 1)) > prm.refine_threshold)
      mark(lev.i_lo + k);
  if (lev.i_lo == 0 && lambda > 0.0 &&
      lambda < prm.points_per_scale * (0.5 * lev.dr)) {
    out.wants_deeper = true;
    const long k_hi = std::min<long>(
        lev.i_hi(), std::max<long>(16, (long)std::ceil(4.0 * lambda / lev.dr)));
    mark(0);
    mark(k_hi);
  }
  return out;
}

AmrHierarchy::AmrHierarchy(AmrParams prm, Level base)
    : prm_(prm), levels_{std::move(base)}, steps_{0} {
  // never reallocate: raw parent pointers are held across regrids
  levels_.reserve(prm_.max_depth + 2);
  steps_.reserve(prm_.max_depth + 2);
}

void AmrHierarchy::subcycle(double dt, const LevelStepper& step,
                            const ScaleEstimate& lam, const SubstepHook* hook) {
  advance(0, dt, nullptr, nullptr, step, lam, hook);
}

void AmrHierarchy::advance(int k, double dt, const Level* pold,
                           const Level* pnew, const LevelStepper& step,
                           const ScaleEstimate& lam, const SubstepHook* hook) {
  const Level old = levels_[k];
  GhostFill lf, rf;
  const GhostFill* lp = nullptr;
  const GhostFill* rp = nullptr;
  auto make_fill = [pold, pnew](long g0) -> GhostFill {
    return [pold, pnew, g0](double ts, ArrayXd& gw, ArrayXd& gwt) {
      const double den = pnew->time - pold->time;
      double th = den > 0.0 ? (ts - pold->time) / den : 1.0;
      th = std::clamp(th, 0.0, 1.0);
      gw.resize(kGhost);
      gwt.resize(kGhost);
      for (int j = 0; j < kGhost; ++j) {
        const long gi = g0 + j;
        const double w0 = pinterp(*pold, pold->w, gi);
        const double w1 = pinterp(*pnew, pnew->w, gi);
        const double u0 = pinterp(*pold, pold->wt, gi);
        const double u1 = pinterp(*pnew, pnew->wt, gi);
        gw(j) = (1.0 - th) * w0 + th * w1;
        gwt(j) = (1.0 - th) * u0 + th * u1;
      }
    };
  };
  if (k > 0) {
    rf = make_fill(levels_[k].i_hi() + 1);
    rp = &rf;
    if (levels_[k].i_lo > 0) {
      lf = make_fill(levels_[k].i_lo - kGhost);
      lp = &lf;
    }
  }
  step(levels_[k], dt, lp, rp);
  levels_[k].time = old.time + dt;
  if (k + 1 <= depth()) {
    advance(k + 1, 0.5 * dt, &old, &levels_[k], step, lam, hook);
    advance(k + 1, 0.5 * dt, &old, &levels_[k], step, lam, hook);
    restrict_onto(levels_[k + 1], levels_[k]);
  } else if (hook) {
    (*hook)(k, levels_[k].time);
  }
  ++steps_[k];
  if (steps_[k] % prm_.regrid_interval == 0) regrid_child(k, lam);
}

void AmrHierarchy::regrid_child(int k, const ScaleEstimate& lam) {
  const Level& L = levels_[k];
  FlagResult f = flag_cells(L, lam(), prm_);
  if (k >= prm_.max_depth) {
    if (f.wants_deeper) exhausted_ = true;
    return;
  }
  const long buf = prm_.buffer_width;
  // required coverage (in level-k units): flags with buffer, plus the
  // grandchild's extent with buffer so nesting survives
  long h_lo = 0, h_hi = -1;
  bool have = false;
  if (f.any) {
    h_lo = f.i_lo - buf;
    h_hi = f.i_hi + buf;
    have = true;
  }
  if (k + 2 <= depth()) {
    const Level& gc = levels_[k + 2];
    long g_lo = gc.i_lo / 4 - buf;
    long g_hi = (gc.i_hi() + 3) / 4 + buf;
    if (!have) {
      h_lo = g_lo;
      h_hi = g_hi;
      have = true;
    } else {
      h_lo = std::min(h_lo, g_lo);
      h_hi = std::max(h_hi, g_hi);
    }
  }
  if (have) {
    if (L.i_lo == 0) {
      // a child edge inside the buffer of an origin-touching parent must
      // snap to r = 0 (the only place nesting margin is waived)
      if (h_lo < buf) h_lo = 0;
    } else {
      h_lo = std::max(h_lo, L.i_lo + buf);
    }
    h_hi = std::min(h_hi, L.i_hi() - buf);
    if (h_hi - h_lo < 4) have = false;
  }
  if (!have) {
    if (k + 1 == depth()) {
      levels_.pop_back();
      steps_.pop_back();
    }
    return;
  }
  const long c_lo = 2 * h_lo, c_hi = 2 * h_hi;
  if (k + 1 <= depth() && levels_[k + 1].i_lo == c_lo &&
      levels_[k + 1].i_hi() == c_hi)
    return;
  Level nc;
  nc.depth = k + 1;
  nc.dr = 0.5 * L.dr;
  nc.i_lo = c_lo;
  nc.time = L.time;
  prolong(L, c_lo, c_hi, nc.w, nc.wt);
  if (k + 1 <= depth()) {
    // keep already-refined data where the old child overlaps
    const Level& oc = levels_[k + 1];
    const long a = std::max(c_lo, oc.i_lo), b = std::min(c_hi, oc.i_hi());
    for (long gi = a; gi <= b; ++gi) {
      nc.w(gi - c_lo) = oc.w(gi - oc.i_lo);
      nc.wt(gi - c_lo) = oc.wt(gi - oc.i_lo);
    }
    levels_[k + 1] = std::move(nc);
  } else {
    levels_.push_back(std::move(nc));
    steps_.push_back(0);
  }
}

void AmrHierarchy::push_level(Level lev) {
  levels_.push_back(std::move(lev));
  steps_.push_back(0);
}

void AmrHierarchy::initial_regrid(const ScaleEstimate& lam) {
  for (int k = 0; k <= depth() && k <= prm_.max_depth; ++k)
    regrid_child(k, lam);
}

void AmrHierarchy::check_nesting() const {
  for (int k = 1; k <= depth(); ++k) {
    const Level& c = levels_[k];
    const Level& p = levels_[k - 1];
    if (c.depth != p.depth + 1 ||
        std::abs(c.dr - 0.5 * p.dr) > 1e-15 * p.dr)
      throw std::logic_error("mesh: refinement ratio violated");
    const bool touches_origin = c.i_lo == 0 && p.i_lo == 0;
    if (!touches_origin && c.i_lo < 2 * (p.i_lo + prm_.buffer_width))
      throw std::logic_error("mesh: left nesting buffer violated");
    if (c.i_hi() > 2 * (p.i_hi() - prm_.buffer_width))
      throw std::logic_error("mesh: right nesting buffer violated");
  }
}

double sample_w(const std::vector<Level>& levels, double r) {
  for (int k = (int)levels.size() - 1; k >= 0; --k) {
    const Level& L = levels[k];
    const double x = r / L.dr - L.i_lo;
    if (x < -1e-9 || x > L.n() - 1 + 1e-9) continue;
    long base = (long)std::floor(x) - 1;
    base = std::clamp(base, 0L, L.n() - 4);
    double v[4] = {L.w(base), L.w(base + 1), L.w(base + 2), L.w(base + 3)};
    return cubic4(v, x - base);
  }
  throw std::invalid_argument("sample_w: radius outside all levels");
}

namespace {

void emit_level(const std::vector<Level>& levels, int k, long i_from,
                long i_to, std::vector<double>& r, std::vector<double>& w,
                std::vector<double>& wt) {
  const Level& L = levels[k];
  auto emit_range = [&](long a, long b) {
    for (long i = a; i <= b; ++i) {
      r.push_back(i * L.dr);
      w.push_back(L.w(i - L.i_lo));
      wt.push_back(L.wt(i - L.i_lo));
    }
  };
  if (k + 1 < (int)levels.size()) {
    const Level& c = levels[k + 1];
    // carve out the child's coverage; the child emits its own nodes
    const long cl = (c.i_lo + 1) / 2, ch = c.i_hi() / 2;
    emit_range(i_from, std::min(i_to, cl - 1));
    emit_level(levels, k + 1, std::max(c.i_lo, 2 * i_from),
               std::min(c.i_hi(), 2 * i_to), r, w, wt);
    emit_range(std::max(i_from, ch + 1), i_to);
  } else {
    emit_range(i_from, i_to);
  }
}

}  // namespace

void composite(const std::vector<Level>& levels, ArrayXd& r, ArrayXd& w,
               ArrayXd& wt) {
  std::vector<double> rv, wv, tv;
  emit_level(levels, 0, levels[0].i_lo, levels[0].i_hi(), rv, wv, tv);
  r = Eigen::Map<ArrayXd>(rv.data(), rv.size());
  w = Eigen::Map<ArrayXd>(wv.data(), wv.size());
  wt = Eigen::Map<ArrayXd>(tv.data(), tv.size());
}

}  // namespace ym
