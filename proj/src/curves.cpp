#include "pqs/curves.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "pqs/version.hpp"

namespace pqs {

namespace {

void require_converged(const SweepResult& sweep, const char* where) {
  if (sweep.all_converged()) return;
  std::ostringstream os;
  os << where << ": solver failed to converge at sample indices";
  for (int i : sweep.unconverged_indices()) os << ' ' << i;
  throw ConvergenceError(os.str(), -1.0);
}

CurveMetadata metadata_from(SpinLabel spin, const SweepConfig& cfg) {
  CurveMetadata m;
  m.lambda_min = cfg.lambda_min;
  m.lambda_max = cfg.resolved_lambda_max(spin);
  m.delta_x = cfg.delta_x;
  m.initial_points = cfg.initial_points;
  m.solver_version = kSolverVersion;
  return m;
}

// Curve coordinate of a solver sample. The planar variance sum is invariant
// under in-plane rotations, so those points sit at the full polarization
// (symmetry-broken solutions cannot understate X). var_z alone is not
// rotation invariant: single-variance samples must sit at <L_y>/J, which the
// state itself witnesses.
double sample_x(const GroundStateSolution& s) {
  const double j = s.spin.j();
  return s.objective == VarianceObjective::PlanarSum ? s.polarization / j
                                                     : s.mean_ly / j;
}

std::vector<HullPoint> sweep_points(const SweepResult& sweep) {
  const double j = sweep.spin.j();
  std::vector<HullPoint> pts;
  pts.reserve(sweep.samples.size() + 1);
  for (const auto& s : sweep.samples)
    pts.push_back({sample_x(s), s.var_sum / j, s.params.lambda});
  // Exact coherent-state endpoint: |m_y = J> has var_z = J/2 (and var_y = 0).
  pts.push_back({1.0, 0.5, std::numeric_limits<double>::infinity()});
  return pts;
}

struct ScaledSample {
  double x, value, lambda;
};

// Support-function route: L(lambda) = min_i [v_i - lambda x_i] over the point
// cloud (with mirrors), then the biconjugate evaluated at the hull vertices.
// The slope set is the sampled multipliers plus the hull edge slopes, so every
// vertex (including ones at vertical-tangent boundaries) has a finite
// supporting slope available.
double hull_route_deviation(const std::vector<HullPoint>& hull,
                            const std::vector<ScaledSample>& cloud) {
  std::vector<double> slopes;
  slopes.reserve(2 * cloud.size() + hull.size() + 1);
  slopes.push_back(0.0);
  for (const auto& s : cloud) {
    if (std::isfinite(s.lambda)) {
      slopes.push_back(s.lambda);
      slopes.push_back(-s.lambda);
    }
  }
  for (size_t i = 0; i + 1 < hull.size(); ++i) {
    const double dx = hull[i + 1].x - hull[i].x;
    if (dx > 1e-15) slopes.push_back((hull[i + 1].value - hull[i].value) / dx);
  }
  std::sort(slopes.begin(), slopes.end());
  slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());

  std::vector<double> support(slopes.size());
  for (size_t m = 0; m < slopes.size(); ++m) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : cloud) {
      lo = std::min(lo, s.value - slopes[m] * s.x);
      lo = std::min(lo, s.value + slopes[m] * s.x);  // mirrored point
    }
    support[m] = lo;
  }

  double worst = 0;
  for (const auto& v : hull) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t m = 0; m < slopes.size(); ++m)
      best = std::max(best, slopes[m] * v.x + support[m]);
    worst = std::max(worst, std::abs(best - v.value));
  }
  return worst;
}


struct ZetaRefinement {
  double value = 0.5;
  std::vector<GroundStateSolution> extra_samples;  // solves near the minimizer
};

// min var_sum / |<L_par>| over the sweep, refined by a golden-section search
// in lambda around the minimizing sample. The refinement solves are returned
// so curve builders can include them (the hull needs vertices at the ray
// tangency for the zeta cross-check to hold at 1e-6).
ZetaRefinement refine_zeta(const SweepResult& sweep, SpinLabel j_block,
                           const SweepConfig& config) {
  const double j = j_block.j();
  const auto& samples = sweep.samples;
  auto ratio_of = [&](const GroundStateSolution& s) {
    return s.polarization > 1e-6 * j ? s.var_sum / s.polarization
                                     : std::numeric_limits<double>::infinity();
  };

  size_t best = 0;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < samples.size(); ++i) {
    const double r = ratio_of(samples[i]);
    if (r < best_ratio) {
      best_ratio = r;
      best = i;
    }
  }

  ZetaRefinement out;
  out.value = std::min(best_ratio, 0.5);  // coherent endpoint attains 1/2

  double lo = samples[best > 0 ? best - 1 : 0].params.lambda;
  double hi = samples[std::min(best + 1, samples.size() - 1)].params.lambda;
  if (hi <= lo) return out;

  auto eval = [&](double lam, const GroundStateSolution* warm) {
    GroundStateSolution s =
        solve_lagrangian(j_block, lam, config.solver, config.objective, warm);
    const double r = ratio_of(s);
    out.extra_samples.push_back(std::move(s));
    return std::make_pair(r, out.extra_samples.size() - 1);
  };

  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  auto [f1, i1] = eval(x1, &samples[best]);
  auto [f2, i2] = eval(x2, &samples[best]);
  double prev_best = std::min({out.value, f1, f2});
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      i2 = i1;
      x1 = hi - gr * (hi - lo);
      std::tie(f1, i1) = eval(x1, &out.extra_samples[i2]);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      i1 = i2;
      x2 = lo + gr * (hi - lo);
      std::tie(f2, i2) = eval(x2, &out.extra_samples[i1]);
    }
    const double cur = std::min(f1, f2);
    if (std::abs(prev_best - cur) < 1e-7 && it > 8) {
      prev_best = std::min(prev_best, cur);
      break;
    }
    prev_best = std::min(prev_best, cur);
  }
  out.value = std::min(out.value, prev_best);
  return out;
}


}  // namespace

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::SymmetricG: return "symmetric_G";
    case CurveKind::ProducibilityHull: return "producibility_hull";
    case CurveKind::SmF: return "sm_F";
  }
  return "unknown";
}

CurveKind curve_kind_from_string(const std::string& s) {
  if (s == "symmetric_G") return CurveKind::SymmetricG;
  if (s == "producibility_hull") return CurveKind::ProducibilityHull;
  if (s == "sm_F") return CurveKind::SmF;
  throw SchemaError("unknown curve kind: " + s);
}

double curve_eval(const BoundCurve& curve, double x) {
  if (x < 0.0 || x > 1.0) throw DomainError("curve_eval: X must lie in [0, 1]");
  return piecewise_linear_eval(curve.points, x);
}

BoundCurve symmetric_curve(SpinLabel j_block, const SweepConfig& config) {
  if (j_block.two_j < 1) throw DomainError("symmetric_curve: J must be at least 1/2");
  SweepResult sweep = sweep_lambda(j_block, config);
  require_converged(sweep, "symmetric_curve");

  std::vector<HullPoint> pts = sweep_points(sweep);
  const ZetaRefinement refined = refine_zeta(sweep, j_block, config);
  const double j = j_block.j();
  for (const auto& s : refined.extra_samples)
    if (s.converged) pts.push_back({s.polarization / j, s.var_sum / j, s.params.lambda});

  BoundCurve curve;
  curve.kind = CurveKind::SymmetricG;
  curve.block_spin = j_block;
  curve.particle_j = j_block;
  curve.points = even_symmetric_lower_hull(pts);
  curve.meta = metadata_from(j_block, config);
  return curve;
}


double zeta(SpinLabel j_block, const SweepConfig& config) {
  if (j_block.two_j < 1) throw DomainError("zeta: J must be at least 1/2");
  SweepResult sweep = sweep_lambda(j_block, config);
  require_converged(sweep, "zeta");
  return refine_zeta(sweep, j_block, config).value;
}

double ZetaTable::at(SpinLabel j_block) const {
  auto it = entries.find(j_block.two_j);
  if (it == entries.end())
    throw DomainError("ZetaTable: missing entry for two_J = " + std::to_string(j_block.two_j));
  return it->second;
}

ZetaTable zeta_table(SpinLabel j_max, bool half_integer_steps, const SweepConfig& config,
                     int threads) {
  ZetaTable table;
  table.solver_version = kSolverVersion;
  const int step = half_integer_steps ? 1 : 2;
  const int first = half_integer_steps ? 1 : 2;

  std::vector<int> two_js;
  for (int t = first; t <= j_max.two_j; t += step) two_js.push_back(t);

  if (threads <= 1 || two_js.size() <= 1) {
    for (int t : two_js) table.entries[t] = zeta(SpinLabel{t}, config);
    return table;
  }

  std::vector<std::future<std::pair<int, double>>> futures;
  int in_flight = 0;
  size_t next = 0;
  auto drain_one = [&]() {
    auto [t, z] = futures.front().get();
    futures.erase(futures.begin());
    table.entries[t] = z;
    --in_flight;
  };
  while (next < two_js.size() || in_flight > 0) {
    while (next < two_js.size() && in_flight < threads) {
      const int t = two_js[next++];
      futures.push_back(std::async(std::launch::async, [t, &config]() {
        return std::make_pair(t, zeta(SpinLabel{t}, config));
      }));
      ++in_flight;
    }
    drain_one();
  }
  return table;
}

std::vector<SpinLabel> decomposition_blocks(int k, SpinLabel j) {
  if (k < 1) throw DomainError("decomposition_blocks: k must be at least 1");
  if (k == 1) return {j};
  // Groups in a k-producible state may hold any k' <= k particles, so the
  // realizable block spins are the union over all k'-fold decompositions:
  // for integer j these are the integers up to kj, for half-integer j all
  // half-integer steps up to kj (pairs supply the integer blocks, including
  // the singlet). Restricting to the k-fold decomposition alone would make
  // the odd-k half-integer-j bound unsound near X = 0 and break the
  // monotonicity of the hulls in k.
  const int two_kj = k * j.two_j;
  const int step = j.is_integer() ? 2 : 1;
  std::vector<SpinLabel> blocks;
  for (int t = two_kj; t >= 1; t -= step) blocks.push_back(SpinLabel{t});
  return blocks;
}

bool decomposition_has_singlet(int k, SpinLabel j) {
  if (k == 1) return j.two_j == 0;
  return true;  // pairs always supply a J = 0 block
}

BoundCurve producibility_hull(int k, SpinLabel j, const SweepConfig& config) {
  if (k < 1) throw DomainError("producibility_hull: k must be at least 1");
  if (j.two_j < 1) throw DomainError("producibility_hull: j must be at least 1/2");

  const double kj = k * j.j();
  std::vector<ScaledSample> cloud;
  std::vector<HullPoint> pool;

  for (SpinLabel block : decomposition_blocks(k, j)) {
    SweepResult sweep = sweep_lambda(block, config);  // lambda_max resolves per block
    require_converged(sweep, "producibility_hull");
    const double scale = block.j() / kj;
    auto add = [&](double pol, double var, double lambda) {
      const double x = (pol / block.j()) * scale;
      const double v = (var / block.j()) * scale;
      pool.push_back({x, v, lambda});
      cloud.push_back({x, v, lambda});
    };
    for (const auto& s : sweep.samples) add(s.polarization, s.var_sum, s.params.lambda);
    // Ray-tangency refinement keeps the hull tight where the linear bound touches.
    for (const auto& s : refine_zeta(sweep, block, config).extra_samples)
      if (s.converged) add(s.polarization, s.var_sum, s.params.lambda);
    // Exact stretched-state endpoint of this block.
    pool.push_back({scale, 0.5 * scale, std::numeric_limits<double>::infinity()});
    cloud.push_back({scale, 0.5 * scale, std::numeric_limits<double>::infinity()});
  }
  if (decomposition_has_singlet(k, j)) {
    pool.push_back({0.0, 0.0, 0.0});
    cloud.push_back({0.0, 0.0, 0.0});
  }

  BoundCurve curve;
  curve.kind = CurveKind::ProducibilityHull;
  curve.block_spin = SpinLabel{k * j.two_j};
  curve.k = k;
  curve.particle_j = j;
  curve.points = even_symmetric_lower_hull(pool);
  curve.meta = metadata_from(curve.block_spin, config);
  curve.meta.hull_consistency = hull_route_deviation(curve.points, cloud);
  return curve;
}

BoundCurve sm_curve(SpinLabel j_block, const SweepConfig& config) {
  if (j_block.two_j < 1) throw DomainError("sm_curve: J must be at least 1/2");
  SweepConfig cfg = config;
  cfg.objective = VarianceObjective::ZOnly;
  SweepResult sweep = sweep_lambda(j_block, cfg);
  require_converged(sweep, "sm_curve");

  BoundCurve curve;
  curve.kind = CurveKind::SmF;
  curve.block_spin = j_block;
  curve.particle_j = j_block;
  curve.points = even_symmetric_lower_hull(sweep_points(sweep));
  curve.meta = metadata_from(j_block, cfg);
  return curve;
}

LinearBound linear_lower_bound(int k, SpinLabel j, const SweepConfig& config) {
  if (k < 1) throw DomainError("linear_lower_bound: k must be at least 1");
  LinearBound b;
  b.k = k;
  b.particle_j = j;
  b.slope = zeta(SpinLabel{k * j.two_j}, config);
  return b;
}

BoundCurve true_producibility_curve(int k, SpinLabel j, const std::vector<double>& xs,
                                    const SweepConfig& config) {
  if (k < 1) throw DomainError("true_producibility_curve: k must be at least 1");
  const double kj = k * j.j();

  // Per-block second-moment curves R_J(m) = J G_J(m/J) + m^2; mixing over
  // blocks at fixed total <L_y> convexifies exactly these, so the k-particle
  // curve is hull_m(R)(X kj) - (X kj)^2, renormalized.
  std::vector<HullPoint> second_moment_points;
  if (decomposition_has_singlet(k, j)) second_moment_points.push_back({0.0, 0.0, 0.0});

  for (SpinLabel block : decomposition_blocks(k, j)) {
    const double jb = block.j();
    std::vector<double> block_xs;
    for (double x : xs) {
      const double m = x * kj;
      if (m <= jb + 1e-12) block_xs.push_back(std::min(1.0, m / jb));
    }
    block_xs.push_back(1.0);
    std::sort(block_xs.begin(), block_xs.end());
    block_xs.erase(std::unique(block_xs.begin(), block_xs.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   block_xs.end());
    BoundCurve exact = exact_symmetric_curve(block, block_xs, config);
    for (const auto& p : exact.points) {
      const double m = p.x * jb;
      second_moment_points.push_back({m, jb * p.value + m * m, 0.0});
    }
  }
  const std::vector<HullPoint> r_hull = even_symmetric_lower_hull(second_moment_points);

  BoundCurve curve;
  curve.kind = CurveKind::SymmetricG;
  curve.block_spin = SpinLabel{k * j.two_j};
  curve.k = k;
  curve.particle_j = j;
  curve.meta = metadata_from(curve.block_spin, config);
  curve.meta.exact = true;
  for (double x : xs) {
    const double m = x * kj;
    if (m > r_hull.back().x + 1e-12) continue;
    const double r = piecewise_linear_eval(r_hull, std::min(m, r_hull.back().x));
    curve.points.push_back({x, (r - m * m) / kj, 0.0});
  }
  return curve;
}

}  // namespace pqs
