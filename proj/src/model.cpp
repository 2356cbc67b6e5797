#include "ym/model.hpp"

#include <cmath>

namespace ym {

double pde_rhs(double w_rr, double w_r, double w, double r, Dimension d) {
  if (r <= 0.0) throw std::domain_error("pde_rhs: r > 0 required");
  return w_rr + (d.d - 3) / r * w_r + (d.d - 2) / (r * r) * w * (1.0 - w * w);
}

double profile_w0(double eta) {
  const double e2 = eta * eta;
  return (1.0 - e2) / (1.0 + 0.6 * e2);
}

double profile_w0_deriv(double eta) {
  const double q = 1.0 + 0.6 * eta * eta;
  return -3.2 * eta / (q * q);
}

double profile_w0_second_deriv(double eta) {
  const double e2 = eta * eta;
  const double q = 1.0 + 0.6 * e2;
  return -3.2 * (1.0 - 1.8 * e2) / (q * q * q);
}

double profile_ws(double eta) {
  const double e2 = eta * eta;
  return (1.0 - e2) / (1.0 + e2);
}

double profile_ws_deriv(double eta) {
  const double q = 1.0 + eta * eta;
  return -4.0 * eta / (q * q);
}

double profile_ws_second_deriv(double eta) {
  const double e2 = eta * eta;
  const double q = 1.0 + e2;
  return -4.0 * (1.0 - 3.0 * e2) / (q * q * q);
}

namespace {

// Cubic Lagrange interpolation on a monotone table.
double table_interp(const ArrayXd& x, const ArrayXd& y, double xq) {
  const long n = x.size();
  if (n < 2) throw std::invalid_argument("table_interp: need >= 2 samples");
  long j = 0;
  while (j + 1 < n - 1 && x(j + 1) <= xq) ++j;
  long i0 = j - 1;
  if (i0 < 0) i0 = 0;
  if (i0 > n - 4) i0 = n - 4;
  if (n < 4) {  // fall back to linear
    const double t = (xq - x(j)) / (x(j + 1) - x(j));
    return (1.0 - t) * y(j) + t * y(j + 1);
  }
  double out = 0.0;
  for (long a = i0; a < i0 + 4; ++a) {
    double l = 1.0;
    for (long b = i0; b < i0 + 4; ++b)
      if (b != a) l *= (xq - x(b)) / (x(a) - x(b));
    out += l * y(a);
  }
  return out;
}

}  // namespace

double Profile::value(double e) const {
  switch (kind) {
    case ProfileKind::W0_d5: return profile_w0(e);
    case ProfileKind::WS_d4: return profile_ws(e);
    case ProfileKind::Numeric: return table_interp(eta, w, e);
  }
  return 0.0;
}

double Profile::deriv(double e) const {
  switch (kind) {
    case ProfileKind::W0_d5: return profile_w0_deriv(e);
    case ProfileKind::WS_d4: return profile_ws_deriv(e);
    case ProfileKind::Numeric: return table_interp(eta, wp, e);
  }
  return 0.0;
}

double Profile::curvature_at_origin() const {
  switch (kind) {
    case ProfileKind::W0_d5: return -16.0 / 5.0;
    case ProfileKind::WS_d4: return -4.0;
    case ProfileKind::Numeric: break;
  }
  // Least-squares fit of W = 1 + b eta^2 + b4 eta^4 over samples with
  // eta below a cutoff scaled to the table resolution.
  const long n = eta.size();
  // Start from a few grid spacings: steep profiles (large |b|) have rapidly
  // growing series coefficients, so the fit window must shrink with the
  // table resolution, not stay fixed.
  double cut = 0.0;
  for (long i = 0; i < n; ++i)
    if (eta(i) > 0.0 && (cut == 0.0 || eta(i) < cut)) cut = eta(i);
  cut = cut > 0.0 ? 5.0 * cut : 0.1;
  long m = 0;
  while (true) {
    m = 0;
    for (long i = 0; i < n; ++i)
      if (eta(i) > 0.0 && eta(i) <= cut) ++m;
    if (m >= 4 || cut > 1.0) break;
    cut *= 2.0;
  }
  if (m < 4)
    throw std::runtime_error(
        "Profile::curvature_at_origin: fewer than 4 samples near eta=0");
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd rhs(m);
  long k = 0;
  for (long i = 0; i < n; ++i) {
    if (!(eta(i) > 0.0 && eta(i) <= cut)) continue;
    const double e2 = eta(i) * eta(i);
    A(k, 0) = e2;
    A(k, 1) = e2 * e2;
    rhs(k) = w(i) - 1.0;
    ++k;
  }
  Eigen::Vector2d coef = A.colPivHouseholderQr().solve(rhs);
  return 2.0 * coef(0);
}

double energy_density(double w, double wt, double wr, double r, Dimension d) {
  if (r <= 0.0) throw std::domain_error("energy_density: r > 0 required");
  const double r2 = r * r;
  const double q = 1.0 - w * w;
  return (wt * wt + wr * wr) / r2 + 0.5 * (d.d - 2) * q * q / (r2 * r2);
}

double energy_density_center(double w_rr0, Dimension d) {
  return (1.0 + 0.5 * (d.d - 2)) * w_rr0 * w_rr0;
}

double cd_coefficient(Dimension d) {
  const double pi = M_PI;
  // vol(S^{n}) = 2 pi^{(n+1)/2} / Gamma((n+1)/2), here n = d-1.
  const double vol = 2.0 * std::pow(pi, 0.5 * d.d) / std::tgamma(0.5 * d.d);
  return (d.d - 1) * vol;
}

namespace {

double reduced_integral_impl(const ArrayXd& r, const ArrayXd& f, double r_up) {
  const long n = r.size();
  double acc = 0.0;
  for (long i = 0; i + 1 < n; ++i) {
    if (r(i) >= r_up) break;
    if (r(i + 1) <= r_up) {
      acc += 0.5 * (f(i) + f(i + 1)) * (r(i + 1) - r(i));
    } else {
      const double t = (r_up - r(i)) / (r(i + 1) - r(i));
      const double fu = (1.0 - t) * f(i) + t * f(i + 1);
      acc += 0.5 * (f(i) + fu) * (r_up - r(i));
      break;
    }
  }
  return acc;
}

}  // namespace

double reduced_energy_integral(const ArrayXd& r, const ArrayXd& w,
                               const ArrayXd& wt, const ArrayXd& wr,
                               Dimension d, double r_up) {
  const long n = r.size();
  ArrayXd f(n);
  for (long i = 0; i < n; ++i) {
    if (r(i) <= 0.0) {
      f(i) = 0.0;  // regular fields have vanishing integrand at r = 0
      continue;
    }
    const double q = 1.0 - w(i) * w(i);
    f(i) = (wt(i) * wt(i) + wr(i) * wr(i) +
            0.5 * (d.d - 2) * q * q / (r(i) * r(i))) *
           std::pow(r(i), d.d - 3);
  }
  return reduced_integral_impl(r, f, r_up);
}

double reduced_kinetic_integral(const ArrayXd& r, const ArrayXd& wt,
                                Dimension d, double r_up) {
  const long n = r.size();
  ArrayXd f(n);
  for (long i = 0; i < n; ++i)
    f(i) = r(i) <= 0.0 ? 0.0 : wt(i) * wt(i) * std::pow(r(i), d.d - 3);
  return reduced_integral_impl(r, f, r_up);
}

double lightcone_energy(const ArrayXd& r, const ArrayXd& w, const ArrayXd& wt,
                        const ArrayXd& wr, double t, double T, Dimension d) {
  if (T <= t) throw std::invalid_argument("lightcone_energy: T > t required");
  return cd_coefficient(d) *
         reduced_energy_integral(r, w, wt, wr, d, T - t);
}

double total_energy(const ArrayXd& r, const ArrayXd& w, const ArrayXd& wt,
                    const ArrayXd& wr, Dimension d) {
  const double r_up = r(r.size() - 1);
  return cd_coefficient(d) * reduced_energy_integral(r, w, wt, wr, d, r_up);
}

}  // namespace ym
