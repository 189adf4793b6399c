#pragma once

#include "pqs/spin.hpp"

namespace pqs {

/// Mean and variance of J_z after precession by phi about the x axis:
/// J_z^out = J_z cos(phi) - J_y sin(phi). Includes the in-plane covariance
/// term, which matters for frames not aligned with the principal axes.
struct RotatedMoment {
  double mean = 0;
  double variance = 0;
};

RotatedMoment rotated_moments(const PlanarMoments& moments, double phi);

/// Error-propagation sensitivity (d phi)^2 = var(J_z^out)/|d<J_z^out>/d phi|^2.
/// Returns +infinity at a blind spot (vanishing derivative).
double sensitivity(const PlanarMoments& moments, double phi);

/// Standard-quantum-limit reference |<J_par>|/(<J_z>^2 cos^2 + <J_y>^2 sin^2).
/// Returns +infinity when the denominator vanishes.
double sql_sensitivity(const PlanarMoments& moments, double phi);

/// SQL-normalized sensitivity var(J_z^out)(phi)/|<J_par>|. Its phase average
/// is xi^2/2; a state at the SQL gives the constant 1/2.
double normalized_sensitivity(const PlanarMoments& moments, double phi);

/// Phase average of the normalized sensitivity over [0, 2 pi), by adaptive
/// quadrature to the given tolerance. Equals xi^2/2 analytically.
double phase_averaged_enhancement(const PlanarMoments& moments, double tol = 1e-10);

}  // namespace pqs
