#pragma once

#include <Eigen/Dense>
#include <stdexcept>

// Radially reduced Yang-Mills field model in d+1 Minkowski spacetime.
// The evolved field is the magnetic potential w(t,r); regularity requires
// w(t,0) = 1 + O(r^2). All quantities are dimensionless (e = c = 1).

namespace ym {

using Eigen::ArrayXd;

struct Dimension {
  int d;
  explicit Dimension(int dim) : d(dim) {
    if (d < 4) throw std::invalid_argument("Dimension: d >= 4 required");
  }
};

// w_tt = w_rr + (d-3)/r w_r + (d-2)/r^2 w (1 - w^2), valid for r > 0.
// The r = 0 limit is handled by the evolution's regularized center stencil.
double pde_rhs(double w_rr, double w_r, double w, double r, Dimension d);

// Closed-form blowup profiles. W0 is the d=5 ground-state self-similar
// solution, WS the d=4 static (instanton) solution. Both satisfy
// W(0) = 1, W'(0) = 0 and W(1) = 0.
double profile_w0(double eta);
double profile_w0_deriv(double eta);
double profile_w0_second_deriv(double eta);
double profile_ws(double eta);
double profile_ws_deriv(double eta);
double profile_ws_second_deriv(double eta);

enum class ProfileKind { W0_d5, WS_d4, Numeric };

// A blowup profile: closed-form kinds evaluate analytically, Numeric kinds
// interpolate a sampled (eta, W, W') table (monotone eta, starting near 0).
struct Profile {
  ProfileKind kind = ProfileKind::W0_d5;
  ArrayXd eta, w, wp;  // Numeric kind only

  double value(double e) const;
  double deriv(double e) const;
  // W''(0): -16/5 for W0_d5, -4 for WS_d4; Numeric kinds fit an even
  // quartic 1 + b eta^2 + b4 eta^4 to samples near the origin.
  double curvature_at_origin() const;
};

// Energy density rho = (w_t^2 + w_r^2)/r^2 + (d-2)/2 (1-w^2)^2 / r^4, r > 0.
// The (d-2)/2 coefficient on the quartic term is fixed by matching the
// past-light-cone integrand of the reduced action.
double energy_density(double w, double wt, double wr, double r, Dimension d);

// Regular r -> 0 limit of the energy density for a field with w(t,0) = 1:
// rho(t,0) = (1 + (d-2)/2) * w_rr0^2, where w_rr0 = d^2w/dr^2 at r = 0.
double energy_density_center(double w_rr0, Dimension d);

// c(d) = (d-1) vol(S^{d-1}); c(4) = 6 pi^2, c(5) = 32 pi^2 / 3.
double cd_coefficient(Dimension d);

// Trapezoid of (wt^2 + wr^2 + (d-2)/(2 r^2)(1-w^2)^2) r^{d-3} over [0, r_up],
// on the sampled (possibly nonuniform) radii. The integrand vanishes at
// r = 0 for regular fields; samples at r = 0 contribute zero. r_up beyond
// the last sample is clipped; interior r_up is handled by linear
// interpolation of the integrand.
double reduced_energy_integral(const ArrayXd& r, const ArrayXd& w,
                               const ArrayXd& wt, const ArrayXd& wr,
                               Dimension d, double r_up);

// Kinetic-only portion: wt^2 r^{d-3} over [0, r_up], same quadrature.
double reduced_kinetic_integral(const ArrayXd& r, const ArrayXd& wt,
                                Dimension d, double r_up);

// Energy inside the past light cone of a singularity at time T:
// c(d) * reduced integral over [0, T - t]. Requires T > t.
double lightcone_energy(const ArrayXd& r, const ArrayXd& w, const ArrayXd& wt,
                        const ArrayXd& wr, double t, double T, Dimension d);

// Energy over the whole sampled grid (conservation accounting).
double total_energy(const ArrayXd& r, const ArrayXd& w, const ArrayXd& wt,
                    const ArrayXd& wr, Dimension d);

}  // namespace ym
