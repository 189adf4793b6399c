#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "pqs/curves.hpp"
#include "pqs/spin.hpp"

namespace pqs {

enum class Criterion { Obs1Hull, LinearZeta, SorensenMolmer, HeK1 };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

struct CriterionConfig {
  int k_max = 10;
  Criterion which = Criterion::LinearZeta;
  double tolerance = 1e-9;  // strict-inequality margin on normalized quantities
};

/// xi^2_parallel = (var_y + var_z) / |<J_parallel>|.
double xi_parallel(const PlanarMoments& moments);

struct CheckResult {
  bool violated = false;
  double margin = 0;    // bound - observed, absolute variance units
  double bound = 0;     // criterion lower bound on the variance (absolute)
  double observed = 0;  // measured variance entering the criterion
};

/// Hull criterion: k-producible states satisfy
/// var_y + var_z >= <N> j G_k(X) with X = |<J_par>|/(<N> j).
CheckResult check_obs1(const PlanarMoments& moments, int k, const BoundCurve& hull,
                       double tolerance = 1e-9);

/// Linear criterion xi^2 >= zeta^2_{kj}. For k = 1 the hull criterion is used
/// instead (the linear bound is only tight for k >= 2), so a k=1 hull must be
/// supplied.
CheckResult check_linear(const PlanarMoments& moments, int k, const ZetaTable& zetas,
                         const BoundCurve* k1_hull, double tolerance = 1e-9);

/// Single-variance criterion var_z >= <N> j F_{kj}(<J_y>/(<N> j)).
CheckResult check_sm(const PlanarMoments& moments, int k, const BoundCurve& sm,
                     double tolerance = 1e-9);

class CurveCache;

/// Computes and memoizes the bound curves and tables the criteria consume.
/// Optionally backed by the on-disk cache (see cache.hpp).
class CurveLibrary {
 public:
  explicit CurveLibrary(SweepConfig config = {},
                        std::shared_ptr<const CurveCache> cache = nullptr);

  const BoundCurve& hull(int k, SpinLabel j);
  const BoundCurve& sm(SpinLabel j_block);
  const ZetaTable& zetas(SpinLabel j_max_block, bool half_integer_steps);
  double zeta_of(SpinLabel j_block);

  const SweepConfig& config() const { return config_; }

 private:
  SweepConfig config_;
  std::shared_ptr<const CurveCache> cache_;
  std::map<std::pair<int, int>, BoundCurve> hulls_;  // (k, two_j)
  std::map<int, BoundCurve> sm_;                     // two_J
  std::map<int, double> zeta_;                       // two_J
  ZetaTable zeta_table_;
};

struct ViolationRecord {
  int k = 0;
  bool violated = false;
  double margin = 0;
};

enum class PolarizationAssumption { EqualSplit, WorstCase };

struct DepthVerdict {
  int certified_depth = 1;   // 1 + largest violated k (1 when none violated)
  Criterion criterion_used = Criterion::LinearZeta;
  double xi_parallel_sq = 0;
  std::map<int, double> fractions;  // k -> f_{k+1} (equal-split assumption)
  std::optional<std::pair<int, int>> depth_interval;  // under +/- 1 sigma on xi^2
  PolarizationAssumption assumption = PolarizationAssumption::EqualSplit;
  std::vector<ViolationRecord> checks;
  int k_max = 0;
};

/// Scans k = 1..k_max under the configured criterion and certifies a depth of
/// 1 + the largest violated k. When sigma_xi is present on the input, the
/// verdict also carries the depth interval from re-evaluating at xi^2 +/- 1
/// sigma.
DepthVerdict entanglement_depth(const PlanarMoments& moments, const CriterionConfig& config,
                                CurveLibrary& library);

/// Certified fraction f_{k+1} = 1 - xi^2/zeta^2_{kj} of particles in fully
/// entangled groups of k+1 or more, under the
/// equal-polarization-split assumption; 0 (flagged) when not violated.
double entangled_fraction(const PlanarMoments& moments, int k, const ZetaTable& zetas,
                          bool* violated = nullptr);

/// Upper bound on the fraction Q of particles outside (k+1)-entangled groups
/// without the equal-split assumption: Q <= (xi^2/zeta^2_J + W - 1)/W with
/// W = <N> j / <J_y> >= 1 in the polarization frame. Clamped to [0, 1].
double unequal_polarization_bound(const PlanarMoments& moments, int k,
                                  const ZetaTable& zetas);

DepthVerdict sm_depth(const PlanarMoments& moments, const CriterionConfig& config,
                      CurveLibrary& library);

struct ComparisonGrid {
  int k = 1;
  SpinLabel particle_j;
  std::vector<double> alpha;  // (dJz)^2 / (dJy)^2
  std::vector<double> beta;   // <J_y>/N in (0, j]
  Eigen::MatrixXd planar_bound;  // per (alpha, beta): bound on (dJz)^2 / (N j)
  Eigen::MatrixXd sm_bound;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> winner;  // +1 planar, -1 SM, 0 tie
};

/// Fig.-3 style comparison of the two criteria over an (alpha, beta) grid.
/// Bounds are reported normalized by N j.
ComparisonGrid compare_criteria(int k, SpinLabel j, const std::vector<double>& alphas,
                                const std::vector<double>& betas, CurveLibrary& library);

}  // namespace pqs
