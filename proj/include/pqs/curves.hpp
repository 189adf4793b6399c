#pragma once

#include <map>
#include <string>
#include <vector>

#include "pqs/convex.hpp"
#include "pqs/ground_solver.hpp"
#include "pqs/spin.hpp"

namespace pqs {

enum class CurveKind { SymmetricG, ProducibilityHull, SmF };

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& s);

struct CurveMetadata {
  double lambda_min = 0, lambda_max = 0, delta_x = 0;
  int initial_points = 0;
  std::string solver_version;
  double hull_consistency = 0;  // max deviation between the two hull routes
  bool exact = false;           // true-curve mode (pointwise constrained re-solves)
};

/// A sampled bound function: pairs (X, value) with X strictly increasing in
/// [0, 1]. Hull kinds are convex by construction; symmetric_G in exact mode
/// may be non-convex.
struct BoundCurve {
  CurveKind kind = CurveKind::SymmetricG;
  SpinLabel block_spin;   // J for SymmetricG / SmF, kj for hulls
  int k = 1;              // producibility index (hulls), 1 otherwise
  SpinLabel particle_j;   // single-particle spin (hulls), = block_spin otherwise
  std::vector<HullPoint> points;
  CurveMetadata meta;
};

/// Piecewise-linear evaluation; exact on hull kinds by definition of the
/// hull. X must lie inside the sampled range.
double curve_eval(const BoundCurve& curve, double x);

/// Lower bound on the normalized planar variance sum over symmetric
/// (maximal-spin) states, as extreme points of its even convex envelope.
BoundCurve symmetric_curve(SpinLabel j_block, const SweepConfig& config = {});

/// Pointwise-constrained re-solve of the symmetric-subspace curve, including
/// its non-convex region, via penalty continuation / constrained descent.
/// Dense path only; intended for moderate dimensions.
BoundCurve exact_symmetric_curve(SpinLabel j_block, const std::vector<double>& xs,
                                 const SweepConfig& config = {});

/// zeta^2_J: minimum of the planar squeezing parameter over single spin-J
/// states, i.e. min over the sweep of var_sum / (J X), refined by a local
/// search in lambda around the minimizer.
double zeta(SpinLabel j_block, const SweepConfig& config = {});

struct ZetaTable {
  std::map<int, double> entries;  // two_J -> zeta^2_J
  std::string solver_version;

  double at(SpinLabel j_block) const;
  bool contains(SpinLabel j_block) const { return entries.count(j_block.two_j) > 0; }
};

/// Table of zeta^2_J for all realizable J <= J_max. Integer steps by default
/// (the published table layout); half-integer steps optionally.
ZetaTable zeta_table(SpinLabel j_max, bool half_integer_steps = false,
                     const SweepConfig& config = {}, int threads = 1);

/// Distinct block spins in the decomposition of k spin-j particles, J > 0,
/// descending. For k = 1 this is just {j}.
std::vector<SpinLabel> decomposition_blocks(int k, SpinLabel j);
bool decomposition_has_singlet(int k, SpinLabel j);

/// Convex lower bound G_k^(j) for k-producible states: the lower convex hull
/// of all block curves rescaled to the kj normalization, with the origin
/// included whenever a singlet block exists. Built both as a point-union hull
/// and through the double Legendre transform; the routes must agree and the
/// largest deviation is recorded in the metadata.
BoundCurve producibility_hull(int k, SpinLabel j, const SweepConfig& config = {});

/// Single-variance (extreme spin squeezing) bound F_J from the analogous
/// sweep of (L_z - s_z)^2 - lambda L_y.
BoundCurve sm_curve(SpinLabel j_block, const SweepConfig& config = {});

/// The affine bound X -> X zeta^2_{kj}.
struct LinearBound {
  int k = 1;
  SpinLabel particle_j;
  double slope = 0;
  double operator()(double x) const { return slope * x; }
};

LinearBound linear_lower_bound(int k, SpinLabel j, const SweepConfig& config = {});

/// Diagnostic: the (generally non-convex) k-particle curve G_k^(j) obtained
/// from per-block exact curves, mixed over blocks. Its convex hull matches
/// producibility_hull.
BoundCurve true_producibility_curve(int k, SpinLabel j, const std::vector<double>& xs,
                                    const SweepConfig& config = {});

}  // namespace pqs
