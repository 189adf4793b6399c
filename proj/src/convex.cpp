#include "pqs/convex.hpp"

#include <algorithm>
#include <cmath>

namespace pqs {

namespace {

double cross(const HullPoint& o, const HullPoint& a, const HullPoint& b) {
  return (a.x - o.x) * (b.value - o.value) - (a.value - o.value) * (b.x - o.x);
}

}  // namespace

std::vector<HullPoint> lower_convex_hull(std::vector<HullPoint> points) {
  std::sort(points.begin(), points.end(), [](const HullPoint& a, const HullPoint& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.value < b.value;
  });
  // Keep only the lowest value per x (within a tight tie window).
  std::vector<HullPoint> unique;
  for (const auto& p : points) {
    if (!unique.empty() && std::abs(p.x - unique.back().x) < 1e-13) {
      if (p.value < unique.back().value) unique.back() = p;
      continue;
    }
    unique.push_back(p);
  }
  if (unique.size() <= 2) return unique;

  std::vector<HullPoint> hull;
  for (const auto& p : unique) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 1e-15)
      hull.pop_back();
    hull.push_back(p);
  }
  return hull;
}

std::vector<HullPoint> even_symmetric_lower_hull(const std::vector<HullPoint>& points) {
  std::vector<HullPoint> mirrored;
  mirrored.reserve(points.size() * 2);
  for (const auto& p : points) {
    mirrored.push_back(p);
    if (p.x > 0) mirrored.push_back({-p.x, p.value, -p.lambda});
  }
  std::vector<HullPoint> full = lower_convex_hull(std::move(mirrored));

  // Clip to x >= 0; insert the x = 0 crossing of the straddling segment
  // (by symmetry the hull is flat or kinked exactly at 0).
  std::vector<HullPoint> out;
  for (size_t i = 0; i < full.size(); ++i) {
    if (full[i].x < 0) {
      if (i + 1 < full.size() && full[i + 1].x > 0) {
        const auto& a = full[i];
        const auto& b = full[i + 1];
        const double t = (0.0 - a.x) / (b.x - a.x);
        out.push_back({0.0, a.value + t * (b.value - a.value),
                       (b.value - a.value) / (b.x - a.x)});
      }
      continue;
    }
    out.push_back(full[i]);
  }
  return out;
}

double piecewise_linear_eval(std::span<const HullPoint> points, double x) {
  if (points.empty()) throw DomainError("piecewise_linear_eval: empty curve");
  const double lo = points.front().x;
  const double hi = points.back().x;
  const double slack = 1e-12 * (1.0 + std::abs(hi));
  if (x < lo - slack || x > hi + slack)
    throw DomainError("piecewise_linear_eval: argument outside sampled range");
  x = std::clamp(x, lo, hi);

  auto it = std::lower_bound(points.begin(), points.end(), x,
                             [](const HullPoint& p, double v) { return p.x < v; });
  if (it == points.begin()) return points.front().value;
  if (it == points.end()) return points.back().value;
  const HullPoint& b = *it;
  const HullPoint& a = *(it - 1);
  if (b.x == a.x) return std::min(a.value, b.value);
  const double t = (x - a.x) / (b.x - a.x);
  return a.value + t * (b.value - a.value);
}

}  // namespace pqs
