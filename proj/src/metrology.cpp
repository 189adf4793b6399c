#include "pqs/metrology.hpp"

#include <cmath>
#include <limits>

namespace pqs {

RotatedMoment rotated_moments(const PlanarMoments& m, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  RotatedMoment out;
  out.mean = m.mean_z * c - m.mean_y * s;
  out.variance = m.var_z * c * c + m.var_y * s * s - 2.0 * m.cov_yz * s * c;
  return out;
}

double sensitivity(const PlanarMoments& m, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  const double deriv = -m.mean_z * s - m.mean_y * c;
  const RotatedMoment r = rotated_moments(m, phi);
  const double scale = std::max(1.0, m.in_plane_polarization());
  if (std::abs(deriv) < 1e-15 * scale)
    return std::numeric_limits<double>::infinity();
  return r.variance / (deriv * deriv);
}

double sql_sensitivity(const PlanarMoments& m, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  const double pol = m.in_plane_polarization();
  if (pol <= 0.0) throw DomainError("sql_sensitivity: zero in-plane polarization");
  const double denom = m.mean_z * m.mean_z * c * c + m.mean_y * m.mean_y * s * s;
  if (denom < 1e-30 * pol * pol) return std::numeric_limits<double>::infinity();
  return pol / denom;
}

double normalized_sensitivity(const PlanarMoments& m, double phi) {
  const double pol = m.in_plane_polarization();
  if (pol <= 0.0) throw DomainError("normalized_sensitivity: zero in-plane polarization");
  return rotated_moments(m, phi).variance / pol;
}

namespace {

// Adaptive Simpson on [a, b].
double simpson(const PlanarMoments& m, double a, double fa, double b, double fb,
               double fm, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double lm = 0.5 * (a + mid), rm = 0.5 * (mid + b);
  const double flm = normalized_sensitivity(m, lm);
  const double frm = normalized_sensitivity(m, rm);
  const double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson(m, a, fa, mid, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson(m, mid, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double phase_averaged_enhancement(const PlanarMoments& m, double tol) {
  const double two_pi = 6.283185307179586476925287;
  const double a = 0.0, b = two_pi;
  const double fa = normalized_sensitivity(m, a);
  const double fb = normalized_sensitivity(m, b);
  const double mid = 0.5 * (a + b);
  const double fm = normalized_sensitivity(m, mid);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double integral = simpson(m, a, fa, b, fb, fm, whole, tol * two_pi, 40);
  return integral / two_pi;
}

}  // namespace pqs
