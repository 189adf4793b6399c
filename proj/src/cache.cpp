#include "pqs/cache.hpp"

#include <cstdlib>
#include <sstream>
#include <unistd.h>

#include "pqs/io.hpp"
#include "pqs/version.hpp"

namespace pqs {

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string grid_hash(SpinLabel block, const SweepConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << cfg.lambda_min << '|' << cfg.resolved_lambda_max(block) << '|' << cfg.delta_x
     << '|' << cfg.initial_points << '|' << static_cast<int>(cfg.objective) << '|'
     << kSolverVersion;
  std::ostringstream hex;
  hex << std::hex << fnv1a(os.str());
  return hex.str();
}

std::string file_name(CurveKind kind, SpinLabel block, int k, SpinLabel j,
                      const SweepConfig& cfg) {
  std::ostringstream os;
  os << to_string(kind) << "_J" << block.two_j;
  if (kind == CurveKind::ProducibilityHull) os << "_k" << k << "_j" << j.two_j;
  os << '_' << grid_hash(block, cfg) << ".json";
  return os.str();
}

}  // namespace

CurveCache::CurveCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<CurveCache> CurveCache::from_env() {
  const char* dir = std::getenv("PQS_CACHE_DIR");
  if (!dir || !*dir) return std::nullopt;
  return CurveCache(dir);
}

std::optional<BoundCurve> CurveCache::load(CurveKind kind, SpinLabel block, int k,
                                           SpinLabel j, const SweepConfig& config) const {
  const auto path = dir_ / file_name(kind, block, k, j, config);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    BoundCurve c = io::curve_from_json(io::read_file(path));
    if (c.meta.solver_version != kSolverVersion) return std::nullopt;
    return c;
  } catch (const Error&) {
    return std::nullopt;  // unreadable cache entries are treated as misses
  }
}

void CurveCache::store(const BoundCurve& curve) const {
  SweepConfig cfg;
  cfg.lambda_min = curve.meta.lambda_min;
  cfg.lambda_max = curve.meta.lambda_max;
  cfg.delta_x = curve.meta.delta_x;
  cfg.initial_points = curve.meta.initial_points;
  cfg.objective = curve.kind == CurveKind::SmF ? VarianceObjective::ZOnly
                                               : VarianceObjective::PlanarSum;
  const auto path =
      dir_ / file_name(curve.kind, curve.block_spin, curve.k, curve.particle_j, cfg);
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  io::write_file(tmp, io::curve_to_json(curve), true);
  std::filesystem::rename(tmp, path);
}

}  // namespace pqs
