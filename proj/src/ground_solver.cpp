#include "pqs/ground_solver.hpp"

#include <algorithm>
#include <cmath>

namespace pqs {

namespace {

struct BlockMoments {
  double mean_y, mean_z, var_y, var_z;
};

BlockMoments measure(const Eigen::VectorXd& v, const RealPlanarOperators& ops) {
  const StateMoments m = moments_of(v, ops);
  return {m.mean_y, m.mean_z, m.var_y, m.var_z};
}

double objective_variance(const BlockMoments& m, VarianceObjective obj) {
  return obj == VarianceObjective::PlanarSum ? m.var_y + m.var_z : m.var_z;
}

// Joint objective F(psi, s) = <H_s>_psi; equals var - lambda <L_y> at the
// self-consistent point. Non-increasing under both descent steps.
double joint_objective(const BlockMoments& m, const LagrangianParams& p,
                       VarianceObjective obj) {
  double f = objective_variance(m, obj) - p.lambda * m.mean_y +
             (m.mean_z - p.s_z) * (m.mean_z - p.s_z);
  if (obj == VarianceObjective::PlanarSum)
    f += (m.mean_y - p.s_y) * (m.mean_y - p.s_y);
  return f;
}

SymBandMatrix build_hamiltonian(SpinLabel spin, const LagrangianParams& p,
                                VarianceObjective obj) {
  const RealPlanarOperators ops = planar_operators(spin);
  const int d = spin.dimension();
  SymBandMatrix h = SymBandMatrix::zero(d);
  for (int i = 0; i < d; ++i) {
    const double cl = i >= 1 ? ops.c[i - 1] : 0.0;
    const double cr = i + 1 < d ? ops.c[i] : 0.0;
    double diag = cl * cl + cr * cr + p.s_z * p.s_z - p.lambda * ops.m[i];
    if (obj == VarianceObjective::PlanarSum)
      diag += (ops.m[i] - p.s_y) * (ops.m[i] - p.s_y);
    h.d0[i] = diag;
  }
  for (int i = 0; i + 1 < d; ++i) h.d1[i] = -2.0 * p.s_z * ops.c[i];
  for (int i = 0; i + 2 < d; ++i) h.d2[i] = ops.c[i] * ops.c[i + 1];
  return h;
}

struct EigenStep {
  Eigen::VectorXd state;
  double energy;
  bool degenerate;
};

// Ground state of H(p); within a degenerate ground space the combination
// maximizing <L_y> is chosen so sweeps are deterministic.
EigenStep eigen_step(SpinLabel spin, const LagrangianParams& p, VarianceObjective obj,
                     const SolverConfig& cfg, const Eigen::VectorXd* warm) {
  const SymBandMatrix h = build_hamiltonian(spin, p, obj);
  ExtremalOptions opts;
  opts.tol = cfg.eigen_tol;
  opts.dense_threshold = cfg.dense_threshold;
  opts.lanczos_max_iter = cfg.lanczos_max_iter;
  opts.warm_start = warm;
  const ExtremalResult r = lowest_two(h, opts);

  EigenStep out{r.ground.vector, r.ground.value, false};
  const double scale = std::max(1.0, h.inf_norm());
  if (r.second && r.second->value - r.ground.value < cfg.degeneracy_tol * scale) {
    out.degenerate = true;
    const RealPlanarOperators ops = planar_operators(spin);
    const Eigen::VectorXd& u = r.ground.vector;
    const Eigen::VectorXd& v = r.second->vector;
    auto ly_form = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      double s = 0;
      for (int i = 0; i < spin.dimension(); ++i) s += ops.m[i] * a[i] * b[i];
      return s;
    };
    Eigen::Matrix2d b;
    b << ly_form(u, u), ly_form(u, v), ly_form(u, v), ly_form(v, v);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(b);
    const Eigen::Vector2d w = es.eigenvectors().col(1);  // max <L_y>
    out.state = (w[0] * u + w[1] * v).normalized();
  }
  return out;
}

// Ground energy as a function of the shifts, for the simplex fallback.
double shift_energy(SpinLabel spin, double lambda, double s_y, double s_z,
                    VarianceObjective obj, const SolverConfig& cfg) {
  LagrangianParams p{lambda, s_y, s_z};
  const SymBandMatrix h = build_hamiltonian(spin, p, obj);
  ExtremalOptions opts;
  opts.tol = cfg.eigen_tol;
  opts.dense_threshold = cfg.dense_threshold;
  opts.lanczos_max_iter = cfg.lanczos_max_iter;
  return lowest_two(h, opts).ground.value;
}

// Nelder-Mead over the shift parameters. Dimension is 1 (ZOnly) or 2.
std::pair<double, double> simplex_shift_search(SpinLabel spin, double lambda,
                                               double s_y0, double s_z0,
                                               VarianceObjective obj,
                                               const SolverConfig& cfg) {
  const bool two_dim = obj == VarianceObjective::PlanarSum;
  const int dim = two_dim ? 2 : 1;
  const double spread = 0.25 * (spin.j() + 1.0);

  auto eval = [&](const Eigen::Vector2d& s) {
    return shift_energy(spin, lambda, two_dim ? s[0] : 0.0, two_dim ? s[1] : s[0], obj, cfg);
  };

  std::vector<Eigen::Vector2d> pts;
  if (two_dim) {
    pts = {{s_y0, s_z0}, {s_y0 + spread, s_z0}, {s_y0, s_z0 + spread}};
  } else {
    pts = {{s_z0, 0}, {s_z0 + spread, 0}};
  }
  std::vector<double> f(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) f[i] = eval(pts[i]);

  for (int it = 0; it < 200; ++it) {
    // order ascending
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t k = i + 1; k < pts.size(); ++k)
        if (f[k] < f[i]) {
          std::swap(f[i], f[k]);
          std::swap(pts[i], pts[k]);
        }
    if (std::abs(f.back() - f.front()) < 1e-13 * (1.0 + std::abs(f.front()))) break;

    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(pts.size() - 1);

    const Eigen::Vector2d refl = centroid + (centroid - pts.back());
    const double f_refl = eval(refl);
    if (f_refl < f.front()) {
      const Eigen::Vector2d expa = centroid + 2.0 * (centroid - pts.back());
      const double f_expa = eval(expa);
      if (f_expa < f_refl) {
        pts.back() = expa;
        f.back() = f_expa;
      } else {
        pts.back() = refl;
        f.back() = f_refl;
      }
    } else if (f_refl < f[pts.size() - 2]) {
      pts.back() = refl;
      f.back() = f_refl;
    } else {
      const Eigen::Vector2d contr = centroid + 0.5 * (pts.back() - centroid);
      const double f_contr = eval(contr);
      if (f_contr < f.back()) {
        pts.back() = contr;
        f.back() = f_contr;
      } else {
        for (size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts.front() + 0.5 * (pts[i] - pts.front());
          f[i] = eval(pts[i]);
        }
      }
    }
    (void)dim;
  }
  for (size_t i = 1; i < pts.size(); ++i)
    if (f[i] < f[0]) std::swap(f[0], f[i]), std::swap(pts[0], pts[i]);
  if (two_dim) return {pts[0][0], pts[0][1]};
  return {0.0, pts[0][0]};
}

void fill_solution(GroundStateSolution& sol, const EigenStep& step, SpinLabel spin,
                   const LagrangianParams& p, VarianceObjective obj,
                   const RealPlanarOperators& ops) {
  const BlockMoments m = measure(step.state, ops);
  sol.spin = spin;
  sol.params = p;
  sol.objective = obj;
  sol.energy = step.energy;
  sol.state = step.state;
  sol.mean_ly = m.mean_y;
  sol.mean_lz = m.mean_z;
  sol.polarization = std::hypot(m.mean_y, m.mean_z);
  sol.x = spin.j() > 0 ? m.mean_y / spin.j() : 0.0;
  sol.var_sum = objective_variance(m, obj);
  sol.degenerate = step.degenerate;
}

}  // namespace

SymBandMatrix hamiltonian_matrix(SpinLabel spin, const LagrangianParams& params) {
  return build_hamiltonian(spin, params, VarianceObjective::PlanarSum);
}

SymBandMatrix sm_hamiltonian_matrix(SpinLabel spin, double s_z, double lambda) {
  LagrangianParams p;
  p.lambda = lambda;
  p.s_z = s_z;
  return build_hamiltonian(spin, p, VarianceObjective::ZOnly);
}

GroundStateSolution solve_lagrangian(SpinLabel spin, double lambda,
                                     const SolverConfig& config,
                                     VarianceObjective objective,
                                     const GroundStateSolution* warm) {
  if (spin.two_j < 1)
    throw DomainError("solve_lagrangian: spin must be at least 1/2");
  if (!std::isfinite(lambda))
    throw DomainError("solve_lagrangian: lambda must be finite");

  const RealPlanarOperators ops = planar_operators(spin);
  const double shift_scale = 1.0 + spin.j();

  LagrangianParams p;
  p.lambda = lambda;
  const Eigen::VectorXd* seed = nullptr;
  if (warm && warm->state.size() == spin.dimension()) {
    p.s_y = objective == VarianceObjective::PlanarSum ? warm->params.s_y : 0.0;
    p.s_z = warm->params.s_z;
    seed = &warm->state;
  }

  GroundStateSolution sol;
  GroundStateSolution best;
  double best_f = std::numeric_limits<double>::infinity();

  auto descend = [&](int max_rounds) {
    for (int round = 0; round < max_rounds; ++round) {
      const EigenStep step = eigen_step(spin, p, objective, config, seed);
      const BlockMoments m = measure(step.state, ops);
      const double f = joint_objective(m, p, objective);
      sol.objective_trace.push_back(f);
      ++sol.iterations;

      fill_solution(sol, step, spin, p, objective, ops);
      if (f < best_f) {
        best_f = f;
        best = sol;
      }

      const double dy = objective == VarianceObjective::PlanarSum ? m.mean_y - p.s_y : 0.0;
      const double dz = m.mean_z - p.s_z;
      if (std::abs(dy) < config.shift_tol * shift_scale &&
          std::abs(dz) < config.shift_tol * shift_scale) {
        sol.converged = true;
        return true;
      }
      if (objective == VarianceObjective::PlanarSum) {
        // The variance sum is invariant under in-plane rotations and the
        // linear term only improves, so align the shift with the measured
        // polarization direction. Without this the shifts can drift around
        // the degenerate direction circle at small lambda instead of
        // settling.
        p.s_y = std::hypot(m.mean_y, m.mean_z);
        p.s_z = 0.0;
      } else {
        p.s_z = m.mean_z;
      }
      seed = &sol.state;
    }
    return false;
  };

  if (!descend(config.max_rounds)) {
    // Fallback: derivative-free search over the shifts, then one more
    // descent pass from the located optimum.
    auto [sy, sz] = simplex_shift_search(spin, lambda, p.s_y, p.s_z, objective, config);
    p.s_y = objective == VarianceObjective::PlanarSum ? sy : 0.0;
    p.s_z = sz;
    seed = nullptr;
    descend(std::max(20, config.max_rounds / 4));
  }

  if (!sol.converged) {
    best.converged = false;
    best.iterations = sol.iterations;
    best.objective_trace = std::move(sol.objective_trace);
    return best;
  }
  return sol;
}

bool SweepResult::all_converged() const {
  return std::all_of(samples.begin(), samples.end(),
                     [](const GroundStateSolution& s) { return s.converged; });
}

std::vector<int> SweepResult::unconverged_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < samples.size(); ++i)
    if (!samples[i].converged) out.push_back(static_cast<int>(i));
  return out;
}

SweepResult sweep_lambda(SpinLabel spin, const SweepConfig& config) {
  if (spin.two_j < 1) throw DomainError("sweep_lambda: spin must be at least 1/2");
  const double j = spin.j();
  const double lambda_max = config.resolved_lambda_max(spin);
  if (lambda_max <= 0 || config.lambda_min <= 0 || config.lambda_min >= lambda_max)
    throw DomainError("sweep_lambda: invalid lambda grid");

  std::vector<double> grid;
  grid.push_back(0.0);
  const int n = std::max(2, config.initial_points);
  const double ratio = std::pow(lambda_max / config.lambda_min, 1.0 / (n - 1));
  double l = config.lambda_min;
  for (int i = 0; i < n; ++i, l *= ratio) grid.push_back(std::min(l, lambda_max));
  grid.back() = lambda_max;

  SweepResult result;
  result.spin = spin;
  result.objective = config.objective;

  const GroundStateSolution* prev = nullptr;
  for (double lam : grid) {
    result.samples.push_back(
        solve_lagrangian(spin, lam, config.solver, config.objective, prev));
    prev = &result.samples.back();
  }

  // Adaptive refinement: split lambda intervals with a large X jump until the
  // jump is resolved or the interval collapses onto a hull kink.
  bool changed = true;
  while (changed && static_cast<int>(result.samples.size()) < config.max_samples) {
    changed = false;
    for (size_t i = 0; i + 1 < result.samples.size(); ++i) {
      const auto& a = result.samples[i];
      const auto& b = result.samples[i + 1];
      if (std::abs(b.x - a.x) <= config.delta_x) continue;
      if (b.params.lambda - a.params.lambda <= 1e-9 * (1.0 + b.params.lambda))
        continue;  // kink: keep both bracketing samples
      const double mid = 0.5 * (a.params.lambda + b.params.lambda);
      GroundStateSolution s =
          solve_lagrangian(spin, mid, config.solver, config.objective, &a);
      result.samples.insert(result.samples.begin() + i + 1, std::move(s));
      changed = true;
      ++i;
      if (static_cast<int>(result.samples.size()) >= config.max_samples) break;
    }
  }

  std::sort(result.samples.begin(), result.samples.end(),
            [](const auto& a, const auto& b) { return a.params.lambda < b.params.lambda; });

  result.legendre.reserve(result.samples.size());
  for (const auto& s : result.samples) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& t : result.samples)
      lo = std::min(lo, t.var_sum / j - s.params.lambda * t.x);
    result.legendre.emplace_back(s.params.lambda, lo);
  }
  return result;
}

}  // namespace pqs
