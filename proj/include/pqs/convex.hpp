#pragma once

#include <span>
#include <vector>

#include "pqs/errors.hpp"

namespace pqs {

struct HullPoint {
  double x = 0;
  double value = 0;
  double lambda = 0;  // supporting slope that generated the point, when known
};

/// Extreme points of the lower convex hull (monotone chain). Input need not
/// be sorted; collinear interior points are dropped.
std::vector<HullPoint> lower_convex_hull(std::vector<HullPoint> points);

/// Lower hull of the even extension {(x,v)} U {(-x,v)}, clipped back to
/// x >= 0. Bound curves are even in X, so this is the hull that stays convex
/// on the full domain; it differs from the one-sided hull by a flat segment
/// near X = 0 whenever the one-sided hull would slope downward there.
std::vector<HullPoint> even_symmetric_lower_hull(const std::vector<HullPoint>& points);

/// Piecewise-linear interpolation through hull points (sorted by x).
/// Throws DomainError outside the sampled range (no extrapolation).
double piecewise_linear_eval(std::span<const HullPoint> points, double x);

}  // namespace pqs
