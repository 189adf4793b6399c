#include <cmath>
#include <limits>

#include "pqs/pipeline.hpp"

namespace pqs::pipeline {

FitResult fit_fid_segment(std::span<const Sample> segment, const FidModelParams& fid,
                          double theta_noise_var) {
  if (segment.size() < 2)
    throw DomainError("fit_fid_segment: at least two samples are required");

  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d aty = Eigen::Vector2d::Zero();
  for (const Sample& s : segment) {
    const double tr = s.t - fid.t_e;
    const double phi = fid.omega_L * tr;
    const double env = std::exp(-tr / fid.t2);
    const double az = fid.g * std::cos(phi) * env;
    const double ay = -fid.g * std::sin(phi) * env;
    const double y = s.theta - fid.theta_0;
    ata(0, 0) += az * az;
    ata(0, 1) += az * ay;
    ata(1, 1) += ay * ay;
    aty[0] += az * y;
    aty[1] += ay * y;
  }
  ata(1, 0) = ata(0, 1);

  // Rank check on the normal matrix: degenerate phase patterns (all phases at
  // multiples of pi, a single repeated time, ...) leave one spin direction
  // unobserved up to round-off.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(ata);
  if (!(es.eigenvalues()[0] > 1e-12 * es.eigenvalues()[1]))
    throw DomainError("fit_fid_segment: rank-deficient design (degenerate phases)");

  FitResult out;
  const Eigen::Matrix2d inv = ata.inverse();
  out.j_zy = inv * aty;
  out.covariance = inv * theta_noise_var;
  return out;
}

namespace {

// Residual of one record under (omega_L, T2) with the optimal linear
// (J_z, J_y, theta_0) solved exactly per record.
double record_ssr(const MeasurementRecord& rec, const FidModelParams& fid) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  double yy = 0;
  for (const Sample& s : rec.samples) {
    const double tr = s.t - fid.t_e;
    const double phi = fid.omega_L * tr;
    const double env = std::exp(-tr / fid.t2);
    const Eigen::Vector3d row(fid.g * std::cos(phi) * env, -fid.g * std::sin(phi) * env,
                              1.0);
    ata += row * row.transpose();
    aty += row * s.theta;
    yy += s.theta * s.theta;
  }
  // Column scales differ by ~g between the spin terms and the offset; rank
  // and solve on the normalized system.
  const Eigen::Vector3d d = ata.diagonal().cwiseSqrt();
  if (d.minCoeff() <= 0) return std::numeric_limits<double>::infinity();
  const Eigen::Matrix3d scaled =
      d.cwiseInverse().asDiagonal() * ata * d.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scaled);
  if (es.eigenvalues()[0] <= 1e-10 * es.eigenvalues()[2])
    return std::numeric_limits<double>::infinity();
  const Eigen::Vector3d z = scaled.ldlt().solve(d.cwiseInverse().asDiagonal() * aty);
  const Eigen::Vector3d coef = d.cwiseInverse().asDiagonal() * z;
  return yy - coef.dot(aty);
}

}  // namespace

FidModelParams calibrate_fid(std::span<const MeasurementRecord> records,
                             const FidModelParams& initial, const CalibrationGrid& grid) {
  if (records.empty()) throw DomainError("calibrate_fid: no records");
  if (grid.omega_points < 1 || grid.t2_points < 1)
    throw DomainError("calibrate_fid: empty grid");

  FidModelParams best = initial;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (int io = 0; io < grid.omega_points; ++io) {
    for (int it = 0; it < grid.t2_points; ++it) {
      FidModelParams trial = initial;
      const double fo = grid.omega_points == 1
                            ? 0.0
                            : -1.0 + 2.0 * io / (grid.omega_points - 1);
      const double ft = grid.t2_points == 1 ? 0.0 : -1.0 + 2.0 * it / (grid.t2_points - 1);
      trial.omega_L = initial.omega_L * (1.0 + grid.omega_span * fo);
      trial.t2 = initial.t2 * (1.0 + grid.t2_span * ft);
      double ssr = 0;
      for (const auto& rec : records) ssr += record_ssr(rec, trial);
      if (ssr < best_ssr) {
        best_ssr = ssr;
        best = trial;
      }
    }
  }
  if (!std::isfinite(best_ssr))
    throw DomainError("calibrate_fid: all grid candidates were rank-deficient");
  return best;
}

namespace {

Eigen::Matrix4d joint_sample_covariance(const std::vector<SpinEstimatePair>& pairs) {
  const int n = static_cast<int>(pairs.size());
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (const auto& p : pairs) {
    mean.head<2>() += p.j1;
    mean.tail<2>() += p.j2;
  }
  mean /= n;
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (const auto& p : pairs) {
    Eigen::Vector4d v;
    v << p.j1 - mean.head<2>(), p.j2 - mean.tail<2>();
    cov += v * v.transpose();
  }
  return cov / (n - 1);
}

}  // namespace

Eigen::Matrix2d conditional_covariance(const std::vector<SpinEstimatePair>& pairs,
                                       double ridge) {
  if (pairs.size() < 3)
    throw DomainError("conditional_covariance: at least three shots are required");

  const Eigen::Matrix4d joint = joint_sample_covariance(pairs);
  Eigen::Matrix2d g11 = joint.topLeftCorner<2, 2>();
  const Eigen::Matrix2d g12 = joint.topRightCorner<2, 2>();
  const Eigen::Matrix2d g22 = joint.bottomRightCorner<2, 2>();
  if (ridge > 0) g11 += ridge * Eigen::Matrix2d::Identity();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g11);
  const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
  if (lo <= 0 || hi / lo > 1e12)
    throw DomainError(
        "conditional_covariance: Gamma_J1 is singular or ill-conditioned; consider the "
        "ridge regularization option");

  Eigen::Matrix2d cond = g22 - g12.transpose() * g11.inverse() * g12;
  // Symmetrize away round-off; the formula is symmetric in exact arithmetic.
  cond = 0.5 * (cond + cond.transpose()).eval();
  return cond;
}

Eigen::Matrix2d subtract_readout_noise(const Eigen::Matrix2d& gamma_cond,
                                       const Eigen::Matrix2d& gamma_0,
                                       bool* negative_flag) {
  const Eigen::Matrix2d out = gamma_cond - gamma_0;
  if (negative_flag) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(out);
    *negative_flag = es.eigenvalues()[0] < 0;
  }
  return out;
}

}  // namespace pqs::pipeline
