#include "pqs/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "pqs/cache.hpp"

namespace pqs {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::Obs1Hull: return "obs1_hull";
    case Criterion::LinearZeta: return "linear_zeta";
    case Criterion::SorensenMolmer: return "sorensen_molmer";
    case Criterion::HeK1: return "he_k1";
  }
  return "unknown";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "obs1_hull" || s == "obs1") return Criterion::Obs1Hull;
  if (s == "linear_zeta" || s == "linear") return Criterion::LinearZeta;
  if (s == "sorensen_molmer" || s == "sm") return Criterion::SorensenMolmer;
  if (s == "he_k1" || s == "he") return Criterion::HeK1;
  throw SchemaError("unknown criterion: " + s);
}

double xi_parallel(const PlanarMoments& moments) {
  const double pol = moments.in_plane_polarization();
  if (pol <= 0.0) throw DomainError("xi_parallel: zero in-plane polarization");
  return moments.var_sum() / pol;
}

CheckResult check_obs1(const PlanarMoments& moments, int k, const BoundCurve& hull,
                       double tolerance) {
  if (hull.kind != CurveKind::ProducibilityHull || hull.k != k ||
      !(hull.particle_j == moments.spin))
    throw DomainError("check_obs1: hull does not match (k, j)");
  const double nj = moments.mean_n * moments.spin.j();
  const double x = moments.in_plane_polarization() / nj;
  if (x < 0.0 || x > 1.0 + 1e-12)
    throw DomainError("check_obs1: X = |<J_par>|/(<N> j) outside [0, 1]");

  CheckResult r;
  r.observed = moments.var_sum();
  r.bound = nj * curve_eval(hull, std::min(x, 1.0));
  r.margin = r.bound - r.observed;
  r.violated = r.observed < r.bound - tolerance * nj;
  return r;
}

CheckResult check_linear(const PlanarMoments& moments, int k, const ZetaTable& zetas,
                         const BoundCurve* k1_hull, double tolerance) {
  if (k == 1) {
    // The linear bound is a tight approximation only from k = 2 on; the hull
    // criterion is the defined behaviour at k = 1.
    if (!k1_hull) throw DomainError("check_linear: k = 1 requires the k=1 hull");
    return check_obs1(moments, 1, *k1_hull, tolerance);
  }
  const double xi = xi_parallel(moments);
  const double z = zetas.at(SpinLabel{k * moments.spin.two_j});
  const double pol = moments.in_plane_polarization();

  CheckResult r;
  r.observed = moments.var_sum();
  r.bound = z * pol;  // xi^2 >= zeta^2 in variance units
  r.margin = r.bound - r.observed;
  r.violated = xi < z - tolerance;
  return r;
}

CheckResult check_sm(const PlanarMoments& moments, int k, const BoundCurve& sm,
                     double tolerance) {
  if (sm.kind != CurveKind::SmF)
    throw DomainError("check_sm: curve is not an F_J curve");
  const PlanarMoments rot = rotate_to_polarization_axis(moments);
  const double nj = rot.mean_n * rot.spin.j();
  const double x = rot.mean_y / nj;
  if (x < 0.0 || x > 1.0 + 1e-12) throw DomainError("check_sm: X outside [0, 1]");

  CheckResult r;
  r.observed = rot.var_z;
  r.bound = nj * curve_eval(sm, std::min(x, 1.0));
  r.margin = r.bound - r.observed;
  r.violated = r.observed < r.bound - tolerance * nj;
  return r;
}

CurveLibrary::CurveLibrary(SweepConfig config, std::shared_ptr<const CurveCache> cache)
    : config_(std::move(config)), cache_(std::move(cache)) {}

const BoundCurve& CurveLibrary::hull(int k, SpinLabel j) {
  const auto key = std::make_pair(k, j.two_j);
  auto it = hulls_.find(key);
  if (it == hulls_.end()) {
    const SpinLabel block{k * j.two_j};
    if (cache_) {
      if (auto cached = cache_->load(CurveKind::ProducibilityHull, block, k, j, config_)) {
        return hulls_.emplace(key, std::move(*cached)).first->second;
      }
    }
    it = hulls_.emplace(key, producibility_hull(k, j, config_)).first;
    if (cache_) cache_->store(it->second);
  }
  return it->second;
}

const BoundCurve& CurveLibrary::sm(SpinLabel j_block) {
  auto it = sm_.find(j_block.two_j);
  if (it == sm_.end()) {
    if (cache_) {
      if (auto cached =
              cache_->load(CurveKind::SmF, j_block, 1, j_block, config_)) {
        return sm_.emplace(j_block.two_j, std::move(*cached)).first->second;
      }
    }
    it = sm_.emplace(j_block.two_j, sm_curve(j_block, config_)).first;
    if (cache_) cache_->store(it->second);
  }
  return it->second;
}

double CurveLibrary::zeta_of(SpinLabel j_block) {
  auto it = zeta_.find(j_block.two_j);
  if (it == zeta_.end()) it = zeta_.emplace(j_block.two_j, zeta(j_block, config_)).first;
  return it->second;
}

const ZetaTable& CurveLibrary::zetas(SpinLabel j_max_block, bool half_integer_steps) {
  const int step = half_integer_steps ? 1 : 2;
  const int first = half_integer_steps ? 1 : 2;
  for (int t = first; t <= j_max_block.two_j; t += step)
    zeta_table_.entries[t] = zeta_of(SpinLabel{t});
  return zeta_table_;
}

namespace {

// Moments with the variance sum rescaled so xi^2 becomes the given value.
PlanarMoments with_xi(const PlanarMoments& m, double xi_sq) {
  PlanarMoments out = m;
  const double cur = xi_parallel(m);
  const double f = xi_sq / cur;
  out.var_y *= f;
  out.var_z *= f;
  out.cov_yz *= f;
  return out;
}

int scan_depth(const PlanarMoments& m, const CriterionConfig& cfg, CurveLibrary& lib,
               std::vector<ViolationRecord>* records) {
  const bool half = m.spin.two_j % 2 == 1;
  const int k_cap = cfg.which == Criterion::HeK1 ? 1 : cfg.k_max;
  int deepest = 0;
  for (int k = 1; k <= k_cap; ++k) {
    CheckResult r;
    switch (cfg.which) {
      case Criterion::Obs1Hull:
      case Criterion::HeK1:
        r = check_obs1(m, k, lib.hull(k, m.spin), cfg.tolerance);
        break;
      case Criterion::LinearZeta: {
        const BoundCurve* k1 = k == 1 ? &lib.hull(1, m.spin) : nullptr;
        r = check_linear(m, k, lib.zetas(SpinLabel{k * m.spin.two_j}, half), k1,
                         cfg.tolerance);
        break;
      }
      case Criterion::SorensenMolmer:
        r = check_sm(m, k, lib.sm(SpinLabel{k * m.spin.two_j}), cfg.tolerance);
        break;
    }
    if (records) records->push_back({k, r.violated, r.margin});
    if (r.violated) deepest = std::max(deepest, k);
  }
  return 1 + deepest;
}

}  // namespace

DepthVerdict entanglement_depth(const PlanarMoments& moments, const CriterionConfig& config,
                                CurveLibrary& library) {
  if (config.k_max < 1) throw DomainError("entanglement_depth: k_max must be at least 1");
  DepthVerdict v;
  v.criterion_used = config.which;
  v.k_max = config.k_max;
  v.xi_parallel_sq = xi_parallel(moments);
  v.certified_depth = scan_depth(moments, config, library, &v.checks);

  if (moments.sigma_xi && *moments.sigma_xi > 0) {
    const double s = *moments.sigma_xi;
    const int lo = scan_depth(with_xi(moments, v.xi_parallel_sq + s), config, library, nullptr);
    const int hi = scan_depth(with_xi(moments, std::max(1e-12, v.xi_parallel_sq - s)),
                              config, library, nullptr);
    v.depth_interval = {std::min(lo, hi), std::max(lo, hi)};
  }

  // Entangled fractions for each violated k (linear-bound arithmetic).
  if (config.which != Criterion::SorensenMolmer) {
    const bool half = moments.spin.two_j % 2 == 1;
    const ZetaTable& table =
        library.zetas(SpinLabel{config.k_max * moments.spin.two_j}, half);
    for (int k = 1; k <= config.k_max; ++k)
      v.fractions[k] = entangled_fraction(moments, k, table, nullptr);
  }
  return v;
}

double entangled_fraction(const PlanarMoments& moments, int k, const ZetaTable& zetas,
                          bool* violated) {
  const double xi = xi_parallel(moments);
  const double z = zetas.at(SpinLabel{k * moments.spin.two_j});
  const bool is_violated = xi < z;
  if (violated) *violated = is_violated;
  if (!is_violated) return 0.0;
  return std::max(0.0, 1.0 - xi / z);
}

double unequal_polarization_bound(const PlanarMoments& moments, int k,
                                  const ZetaTable& zetas) {
  const PlanarMoments rot = rotate_to_polarization_axis(moments);
  const double nj = rot.mean_n * rot.spin.j();
  const double w = nj / rot.mean_y;
  if (w < 1.0 - 1e-12)
    throw DomainError("unequal_polarization_bound: W = <N>j/<J_y> < 1 (unphysical moments)");
  const double xi = xi_parallel(rot);
  const double z = zetas.at(SpinLabel{k * rot.spin.two_j});
  const double q = (xi / z + w - 1.0) / w;
  return std::clamp(q, 0.0, 1.0);
}

DepthVerdict sm_depth(const PlanarMoments& moments, const CriterionConfig& config,
                      CurveLibrary& library) {
  CriterionConfig cfg = config;
  cfg.which = Criterion::SorensenMolmer;
  return entanglement_depth(moments, cfg, library);
}

ComparisonGrid compare_criteria(int k, SpinLabel j, const std::vector<double>& alphas,
                                const std::vector<double>& betas, CurveLibrary& library) {
  if (k < 1) throw DomainError("compare_criteria: k must be at least 1");
  for (double a : alphas)
    if (a <= 0) throw DomainError("compare_criteria: alpha must be positive");
  for (double b : betas)
    if (b <= 0 || b > j.j() + 1e-12)
      throw DomainError("compare_criteria: beta must lie in (0, j]");

  const BoundCurve& hull = library.hull(k, j);
  const BoundCurve& f_curve = library.sm(SpinLabel{k * j.two_j});

  ComparisonGrid grid;
  grid.k = k;
  grid.particle_j = j;
  grid.alpha = alphas;
  grid.beta = betas;
  const int na = static_cast<int>(alphas.size());
  const int nb = static_cast<int>(betas.size());
  grid.planar_bound.resize(na, nb);
  grid.sm_bound.resize(na, nb);
  grid.winner.resize(na, nb);

  for (int ib = 0; ib < nb; ++ib) {
    const double x = std::min(1.0, betas[ib] / j.j());
    const double g = curve_eval(hull, x);
    const double f = curve_eval(f_curve, x);
    for (int ia = 0; ia < na; ++ia) {
      // var_z (1 + 1/alpha) = N j G_k(X)  =>  normalized bound on var_z.
      const double planar = g / (1.0 + 1.0 / alphas[ia]);
      grid.planar_bound(ia, ib) = planar;
      grid.sm_bound(ia, ib) = f;
      const double tie = 1e-12 * (1.0 + std::abs(planar) + std::abs(f));
      grid.winner(ia, ib) = planar > f + tie ? 1 : (f > planar + tie ? -1 : 0);
    }
  }
  return grid;
}

}  // namespace pqs
