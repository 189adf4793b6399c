#include "pqs/eigen_solvers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "pqs/rng.hpp"

namespace pqs {

namespace {

double residual_norm(const SymBandMatrix& h, const EigenPair& p) {
  Eigen::VectorXd r;
  h.multiply(p.vector, r);
  r -= p.value * p.vector;
  return r.norm();
}

ExtremalResult dense_lowest_two(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("dense symmetric eigensolver failed", -1.0);
  ExtremalResult out;
  out.ground = {es.eigenvalues()[0], es.eigenvectors().col(0)};
  if (m.rows() > 1) out.second = EigenPair{es.eigenvalues()[1], es.eigenvectors().col(1)};
  return out;
}

// Lanczos with full reorthogonalization; returns the two lowest Ritz pairs.
ExtremalResult lanczos_lowest_two(const SymBandMatrix& h, const ExtremalOptions& opts) {
  const int n = h.size();
  const double scale = std::max(1.0, h.inf_norm());

  Eigen::VectorXd v;
  if (opts.warm_start && opts.warm_start->size() == n && opts.warm_start->norm() > 0) {
    v = opts.warm_start->normalized();
  } else {
    SplitMix64 rng(0x5eed5eedULL);
    v.resize(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
    v.normalize();
  }

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  basis.push_back(v);

  Eigen::VectorXd w;
  double last_residual = std::numeric_limits<double>::infinity();
  const int max_iter = std::min(opts.lanczos_max_iter, n);

  for (int k = 0; k < max_iter; ++k) {
    h.multiply(basis[k], w);
    const double a = basis[k].dot(w);
    alpha.push_back(a);
    w -= a * basis[k];
    if (k > 0) w -= beta[k - 1] * basis[k - 1];
    // Full reorthogonalization keeps Ritz pairs clean for near-degenerate spectra.
    for (const auto& b : basis) w -= b.dot(w) * b;
    for (const auto& b : basis) w -= b.dot(w) * b;

    const int m = k + 1;
    const bool check_now = (m >= 2 && m % 8 == 0) || m == max_iter || m == n;
    const double b_next = w.norm();

    if (check_now || b_next < 1e-14 * scale) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

      auto ritz_vector = [&](int col) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i) y += es.eigenvectors()(i, col) * basis[i];
        y.normalize();
        return y;
      };

      ExtremalResult out;
      out.ground = {es.eigenvalues()[0], ritz_vector(0)};
      if (m > 1) out.second = EigenPair{es.eigenvalues()[1], ritz_vector(1)};

      last_residual = residual_norm(h, out.ground);
      double second_res = 0;
      if (out.second) second_res = residual_norm(h, *out.second);
      if (last_residual <= opts.tol * scale &&
          (!out.second || second_res <= std::sqrt(opts.tol) * scale))
        return out;
      if (b_next < 1e-14 * scale || m == n) {
        if (last_residual <= opts.tol * scale) return out;
        throw ConvergenceError("lanczos: Krylov space exhausted before tolerance",
                               last_residual);
      }
    }

    if (b_next < 1e-14 * scale) break;
    beta.push_back(b_next);
    basis.push_back(w / b_next);
  }
  throw ConvergenceError("lanczos: no convergence within max iterations", last_residual);
}

}  // namespace

EigenPair extremal_eigenpair(const Eigen::MatrixXd& sym, double tol) {
  if (sym.rows() != sym.cols()) throw DimensionError("extremal_eigenpair: matrix not square");
  ExtremalResult r = dense_lowest_two(sym);
  const double scale = std::max(1.0, sym.cwiseAbs().rowwise().sum().maxCoeff());
  const double res = (sym * r.ground.vector - r.ground.value * r.ground.vector).norm();
  if (res > tol * scale)
    throw ConvergenceError("extremal_eigenpair: residual above tolerance", res);
  return r.ground;
}

ExtremalResult lowest_two(const SymBandMatrix& matrix, const ExtremalOptions& opts) {
  if (matrix.size() <= opts.dense_threshold) {
    ExtremalResult r = dense_lowest_two(matrix.dense());
    const double scale = std::max(1.0, matrix.inf_norm());
    const double res = residual_norm(matrix, r.ground);
    if (res > opts.tol * scale)
      throw ConvergenceError("dense eigensolver residual above tolerance", res);
    return r;
  }
  return lanczos_lowest_two(matrix, opts);
}

}  // namespace pqs
