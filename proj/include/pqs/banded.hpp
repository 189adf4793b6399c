#pragma once

#include <Eigen/Dense>

#include "pqs/errors.hpp"

namespace pqs {

/// Real symmetric pentadiagonal matrix (bandwidth 2) stored by diagonals.
struct SymBandMatrix {
  Eigen::VectorXd d0;  // main diagonal, size n
  Eigen::VectorXd d1;  // first superdiagonal, size n-1
  Eigen::VectorXd d2;  // second superdiagonal, size n-2

  int size() const { return static_cast<int>(d0.size()); }

  static SymBandMatrix zero(int n) {
    SymBandMatrix b;
    b.d0 = Eigen::VectorXd::Zero(n);
    b.d1 = Eigen::VectorXd::Zero(std::max(0, n - 1));
    b.d2 = Eigen::VectorXd::Zero(std::max(0, n - 2));
    return b;
  }

  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    const int n = size();
    if (x.size() != n) throw DimensionError("SymBandMatrix: size mismatch");
    y.resize(n);
    for (int i = 0; i < n; ++i) {
      double s = d0[i] * x[i];
      if (i >= 1) s += d1[i - 1] * x[i - 1];
      if (i + 1 < n) s += d1[i] * x[i + 1];
      if (i >= 2) s += d2[i - 2] * x[i - 2];
      if (i + 2 < n) s += d2[i] * x[i + 2];
      y[i] = s;
    }
  }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y;
    multiply(x, y);
    return y;
  }

  Eigen::MatrixXd dense() const {
    const int n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = d0[i];
    for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = d1[i];
    for (int i = 0; i + 2 < n; ++i) m(i, i + 2) = m(i + 2, i) = d2[i];
    return m;
  }

  /// Infinity-norm bound, used to scale residual tolerances.
  double inf_norm() const {
    const int n = size();
    double best = 0;
    for (int i = 0; i < n; ++i) {
      double s = std::abs(d0[i]);
      if (i >= 1) s += std::abs(d1[i - 1]);
      if (i + 1 < n) s += std::abs(d1[i]);
      if (i >= 2) s += std::abs(d2[i - 2]);
      if (i + 2 < n) s += std::abs(d2[i]);
      best = std::max(best, s);
    }
    return best;
  }
};

}  // namespace pqs
