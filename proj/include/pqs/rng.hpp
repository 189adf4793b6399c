#pragma once

#include <cmath>
#include <cstdint>

namespace pqs {

/// Counter-style splittable PRNG. Deterministic across platforms, unlike the
/// standard-library distributions. split() derives an independent stream, so
/// per-shot generation stays reproducible under any evaluation order.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  SplitMix64 split(uint64_t stream) {
    SplitMix64 derived(state_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    derived.next();
    return derived;
  }

  /// Uniform in (0, 1); never returns exactly 0.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (deterministic pair caching).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace pqs
