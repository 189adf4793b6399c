#pragma once

#include <filesystem>
#include <optional>

#include "pqs/curves.hpp"

namespace pqs {

/// On-disk curve cache. Files are keyed by (kind, identity, grid hash,
/// solver version); writes go through a temp file and an atomic rename, so
/// concurrent readers with a single writer are safe.
class CurveCache {
 public:
  explicit CurveCache(std::filesystem::path dir);

  /// Uses the PQS_CACHE_DIR environment variable; disabled when unset.
  static std::optional<CurveCache> from_env();

  std::optional<BoundCurve> load(CurveKind kind, SpinLabel block, int k, SpinLabel j,
                                 const SweepConfig& config) const;
  void store(const BoundCurve& curve) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace pqs
