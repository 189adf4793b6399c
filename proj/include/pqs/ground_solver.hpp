#pragma once

#include <utility>
#include <vector>

#include "pqs/banded.hpp"
#include "pqs/eigen_solvers.hpp"
#include "pqs/spin.hpp"

namespace pqs {

/// Parameters of the shifted Lagrangian Hamiltonian
/// H = (L_y - s_y)^2 + (L_z - s_z)^2 - lambda L_y.
struct LagrangianParams {
  double lambda = 0;
  double s_y = 0;
  double s_z = 0;
};

/// Which variance the sweep minimizes: the planar sum (default) or only the
/// variance orthogonal to the polarization, which yields the single-variance
/// extreme-squeezing curves.
enum class VarianceObjective { PlanarSum, ZOnly };

struct SolverConfig {
  double shift_tol = 1e-10;      // fixed-point tolerance on |s - <L>|
  int max_rounds = 200;          // coordinate-descent rounds
  double eigen_tol = 1e-10;      // residual tolerance, relative to ||H||
  int dense_threshold = 512;     // band dimension above which Lanczos is used
  int lanczos_max_iter = 800;
  double degeneracy_tol = 1e-9;  // gap below which the ground space is treated as degenerate
};

struct GroundStateSolution {
  SpinLabel spin;
  LagrangianParams params;
  VarianceObjective objective = VarianceObjective::PlanarSum;
  double energy = 0;
  Eigen::VectorXd state;          // real, y-eigenbasis
  double x = 0;                   // <L_y>/J in [-1, 1]
  double var_sum = 0;             // objective variance: var_y+var_z or var_z
  double mean_ly = 0, mean_lz = 0;
  double polarization = 0;        // sqrt(<L_y>^2 + <L_z>^2)
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // joint objective per round; non-increasing
};

/// H = (L_y - s_y)^2 + (L_z - s_z)^2 - lambda L_y in the y-eigenbasis:
/// real symmetric pentadiagonal for every spin.
SymBandMatrix hamiltonian_matrix(SpinLabel spin, const LagrangianParams& params);

/// Single-variance analogue H = (L_z - s_z)^2 - lambda L_y.
SymBandMatrix sm_hamiltonian_matrix(SpinLabel spin, double s_z, double lambda);

/// Self-consistent minimization of var - lambda <L_y> over one spin-J block.
/// Coordinate descent alternates an eigensolve with the shift update
/// s <- (<L_y>, <L_z>); a derivative-free simplex search over the shifts is
/// the fallback when descent stalls. Never throws on non-convergence: the
/// best solution so far is returned with converged = false.
GroundStateSolution solve_lagrangian(SpinLabel spin, double lambda,
                                     const SolverConfig& config = {},
                                     VarianceObjective objective = VarianceObjective::PlanarSum,
                                     const GroundStateSolution* warm = nullptr);

struct SweepConfig {
  double lambda_min = 1e-2;   // first nonzero grid point
  double lambda_max = -1;     // <= 0 means the default 8J + 4
  int initial_points = 64;    // geometric seed grid between lambda_min and lambda_max
  double delta_x = 0.01;      // adaptive refinement threshold on |dX|
  int max_samples = 4000;
  SolverConfig solver;
  VarianceObjective objective = VarianceObjective::PlanarSum;

  double resolved_lambda_max(SpinLabel spin) const {
    return lambda_max > 0 ? lambda_max : 8.0 * spin.j() + 4.0;
  }
};

/// Lambda sweep of the Legendre-transform family. Samples are sorted by
/// lambda; X is non-decreasing along the sweep up to solver tolerance, and
/// both sides of a hull kink are retained. legendre holds (lambda, L(lambda))
/// with L(lambda) = min over samples of [var/J - lambda X].
struct SweepResult {
  SpinLabel spin;
  VarianceObjective objective = VarianceObjective::PlanarSum;
  std::vector<GroundStateSolution> samples;
  std::vector<std::pair<double, double>> legendre;

  bool all_converged() const;
  std::vector<int> unconverged_indices() const;
};

SweepResult sweep_lambda(SpinLabel spin, const SweepConfig& config = {});

}  // namespace pqs
