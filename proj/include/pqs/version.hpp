#pragma once

namespace pqs {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever solver defaults change in a way that invalidates cached curves.
inline constexpr const char* kSolverVersion = "pqs-solver-1";

inline constexpr int kSchemaVersion = 1;

}  // namespace pqs
