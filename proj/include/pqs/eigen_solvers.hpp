#pragma once

#include <Eigen/Dense>
#include <optional>

#include "pqs/banded.hpp"
#include "pqs/errors.hpp"

namespace pqs {

struct EigenPair {
  double value = 0;
  Eigen::VectorXd vector;
};

/// Lowest eigenpair of a dense real symmetric matrix.
/// Post: ||H v - E v|| <= tol * ||H||; throws ConvergenceError otherwise.
EigenPair extremal_eigenpair(const Eigen::MatrixXd& sym, double tol = 1e-10);

struct ExtremalOptions {
  double tol = 1e-10;          // residual tolerance relative to ||H||
  int dense_threshold = 512;   // dense diagonalization below, Lanczos above
  int lanczos_max_iter = 800;
  const Eigen::VectorXd* warm_start = nullptr;
};

/// Two lowest eigenpairs (second may be absent for 1x1 problems). The
/// second pair is needed by callers that must break ties between
/// degenerate ground states.
struct ExtremalResult {
  EigenPair ground;
  std::optional<EigenPair> second;
};

ExtremalResult lowest_two(const SymBandMatrix& matrix, const ExtremalOptions& opts = {});

}  // namespace pqs
