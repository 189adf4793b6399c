#include <algorithm>
#include <cmath>

#include "pqs/curves.hpp"
#include "pqs/version.hpp"

namespace pqs {

namespace {

// Constrained minimization of the planar variance sum over real states of one
// spin-J block at fixed <L_y> = c and <L_z> = 0 (the frame convention behind
// the curves). Projected gradient with Barzilai-Borwein steps; the moment
// constraints are restored by a 2x2 Newton correction after every step.
class ConstrainedMinimizer {
 public:
  explicit ConstrainedMinimizer(SpinLabel spin)
      : ops_(planar_operators(spin)), d_(spin.dimension()),
        scale_(1.0 + spin.j() * spin.j()) {}

  double ly_mean(const Eigen::VectorXd& v) const {
    double s = 0;
    for (int i = 0; i < d_; ++i) s += ops_.m[i] * v[i] * v[i];
    return s;
  }

  Eigen::VectorXd ly_apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(d_);
    for (int i = 0; i < d_; ++i) out[i] = ops_.m[i] * v[i];
    return out;
  }

  Eigen::VectorXd lz_apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d_);
    for (int i = 0; i + 1 < d_; ++i) {
      out[i] += ops_.c[i] * v[i + 1];
      out[i + 1] += ops_.c[i] * v[i];
    }
    return out;
  }

  double objective(const Eigen::VectorXd& v) const {
    const Eigen::VectorXd uy = ly_apply(v);
    const Eigen::VectorXd uz = lz_apply(v);
    const double my = v.dot(uy), mz = v.dot(uz);
    return uy.squaredNorm() + uz.squaredNorm() - my * my - mz * mz;
  }

  // Damped Newton restoration of (<L_y>, <L_z>) = (c, 0) on the unit sphere.
  // The step is capped; near X = 1 the feasible set is tiny and a full Newton
  // step overshoots it.
  bool restore(Eigen::VectorXd& v, double c) const {
    for (int it = 0; it < 200; ++it) {
      v.normalize();
      const Eigen::VectorXd uy = ly_apply(v);
      const Eigen::VectorXd uz = lz_apply(v);
      const double ry = v.dot(uy) - c;
      const double rz = v.dot(uz);
      if (std::abs(ry) < 1e-13 * scale_ && std::abs(rz) < 1e-13 * scale_) return true;

      Eigen::VectorXd t1 = uy - uy.dot(v) * v;
      Eigen::VectorXd t2 = uz - uz.dot(v) * v;
      Eigen::Matrix2d jac;
      jac << 2.0 * t1.dot(uy), 2.0 * t2.dot(uy), 2.0 * t1.dot(uz), 2.0 * t2.dot(uz);
      if (std::abs(jac.determinant()) < 1e-16 * scale_ * scale_) return false;
      Eigen::Vector2d delta = jac.colPivHouseholderQr().solve(Eigen::Vector2d(-ry, -rz));
      Eigen::VectorXd step = delta[0] * t1 + delta[1] * t2;
      const double n = step.norm();
      if (n > 0.2) step *= 0.2 / n;
      v += step;
    }
    return false;
  }

  // Returns the minimized variance sum; v holds the state on exit.
  double minimize(Eigen::VectorXd& v, double c, int max_iter = 20000) const {
    if (!restore(v, c)) throw ConvergenceError("exact curve: constraint restoration failed", -1);
    double f = objective(v);
    double step = 0.05;
    Eigen::VectorXd g_prev, v_prev;

    for (int it = 0; it < max_iter; ++it) {
      const Eigen::VectorXd uy = ly_apply(v);
      const Eigen::VectorXd uz = lz_apply(v);
      const double my = v.dot(uy), mz = v.dot(uz);
      Eigen::VectorXd g =
          2.0 * (ly_apply(uy) + lz_apply(uz) - 2.0 * my * uy - 2.0 * mz * uz);

      // Project onto the tangent of {norm, <L_y>, <L_z>} level set.
      Eigen::VectorXd b0 = v;
      Eigen::VectorXd b1 = uy - uy.dot(b0) * b0;
      if (b1.norm() > 1e-12) b1.normalize(); else b1.setZero();
      Eigen::VectorXd b2 = uz - uz.dot(b0) * b0;
      if (b1.size()) b2 -= b2.dot(b1) * b1;
      if (b2.norm() > 1e-12) b2.normalize(); else b2.setZero();
      g -= g.dot(b0) * b0;
      if (b1.norm() > 0) g -= g.dot(b1) * b1;
      if (b2.norm() > 0) g -= g.dot(b2) * b2;

      const double gn = g.norm();
      if (gn < 1e-11 * scale_) break;

      // Barzilai-Borwein step with backtracking.
      if (it > 0) {
        const Eigen::VectorXd dv = v - v_prev;
        const Eigen::VectorXd dg = g - g_prev;
        const double denom = dv.dot(dg);
        if (denom > 1e-300) step = std::clamp(dv.squaredNorm() / denom, 1e-6, 5.0);
      }
      v_prev = v;
      g_prev = g;

      bool accepted = false;
      double eta = step;
      for (int ls = 0; ls < 40; ++ls) {
        Eigen::VectorXd trial = v - eta * g;
        if (!restore(trial, c)) {
          eta *= 0.5;
          continue;
        }
        const double ft = objective(trial);
        if (ft <= f - 1e-4 * eta * gn * gn || ft < f - 1e-15) {
          v = trial;
          f = ft;
          accepted = true;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted) break;  // stationary within line-search resolution
    }
    return f;
  }

 private:
  RealPlanarOperators ops_;
  int d_;
  double scale_;
};

}  // namespace

BoundCurve exact_symmetric_curve(SpinLabel j_block, const std::vector<double>& xs,
                                 const SweepConfig& config) {
  if (j_block.two_j < 1)
    throw DomainError("exact_symmetric_curve: J must be at least 1/2");
  const double j = j_block.j();
  const int d = j_block.dimension();

  std::vector<double> targets = xs;
  std::sort(targets.begin(), targets.end());
  if (!targets.empty() && (targets.front() < 0.0 || targets.back() > 1.0))
    throw DomainError("exact_symmetric_curve: X targets must lie in [0, 1]");

  if (j_block.two_j == 1) {
    // Spin 1/2 in closed form: var_y + var_z = 1/2 - <L_y>^2 at <L_z> = 0, so
    // the normalized curve is 1 - x^2/2. (The minimizers carry <L_x> != 0 and
    // are complex in the y-eigenbasis, outside the real solver's reach.)
    BoundCurve closed;
    closed.kind = CurveKind::SymmetricG;
    closed.block_spin = j_block;
    closed.particle_j = j_block;
    for (double x : targets) closed.points.push_back({x, 1.0 - 0.5 * x * x, 0});
    closed.meta.solver_version = kSolverVersion;
    closed.meta.exact = true;
    return closed;
  }

  ConstrainedMinimizer solver(j_block);

  // March from the stretched state downwards; continuation keeps the solver
  // on the curve through its non-convex region. Extra stops are inserted so
  // warm starts never jump more than 1/128 in X.
  struct Stop {
    double x;
    int target_index;  // -1 for a pure continuation stop
  };
  std::vector<Stop> stops;
  for (int i = 0; i < static_cast<int>(targets.size()); ++i)
    stops.push_back({targets[i], i});
  const int march_steps = 128;
  for (int s = 0; s < march_steps; ++s)
    stops.push_back({static_cast<double>(s) / march_steps, -1});
  std::sort(stops.begin(), stops.end(),
            [](const Stop& a, const Stop& b) { return a.x > b.x; });

  // Seed just below the stretched state: an |m=J-1> admixture moves <L_y>
  // off its maximum so the constraint Jacobian is regular from the start.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  {
    double first_x = 1.0 - 1.0 / march_steps;
    for (const Stop& s : stops)
      if (s.x < 1.0 - 1e-12) {
        first_x = std::max(first_x, s.x);
        break;
      }
    const double sin_sq = std::clamp(j * (1.0 - first_x), 1e-6, 0.5);
    v[0] = std::sqrt(1.0 - sin_sq);
    if (d > 1) v[1] = std::sqrt(sin_sq);
  }
  std::vector<HullPoint> points(targets.size());
  for (const Stop& stop : stops) {
    if (stop.x >= 1.0 - 1e-12) {
      if (stop.target_index >= 0) points[stop.target_index] = {1.0, 0.5, 0};
      continue;  // stretched state is the unique feasible point
    }
    Eigen::VectorXd w = v;
    const double f = solver.minimize(w, stop.x * j, stop.target_index >= 0 ? 20000 : 4000);
    v = w;
    if (stop.target_index >= 0) points[stop.target_index] = {stop.x, f / j, 0};
  }

  BoundCurve curve;
  curve.kind = CurveKind::SymmetricG;
  curve.block_spin = j_block;
  curve.particle_j = j_block;
  curve.points = std::move(points);
  curve.meta.lambda_min = config.lambda_min;
  curve.meta.lambda_max = config.resolved_lambda_max(j_block);
  curve.meta.delta_x = config.delta_x;
  curve.meta.initial_points = config.initial_points;
  curve.meta.solver_version = kSolverVersion;
  curve.meta.exact = true;
  return curve;
}

}  // namespace pqs
