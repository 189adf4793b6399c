#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqs/criteria.hpp"
#include "pqs/spin.hpp"

namespace pqs::pipeline {

/// Free-induction-decay readout model
/// theta(t) = g [J_z(t_e) cos(phi) - J_y(t_e) sin(phi)] e^{-(t - t_e)/T2} + theta_0,
/// phi = omega_L (t - t_e). Treated as calibrated globals; per-shot estimation
/// is then linear least squares in (J_z, J_y).
struct FidModelParams {
  double g = 1e-7;         // rad per spin unit
  double omega_L = 2.0 * 3.14159265358979323846 * 26e3;  // rad/s
  double t2 = 2e-3;        // s
  double theta_0 = 0.0;    // rad
  double t_e = 0.0;        // s, estimation reference time
};

/// Probe times: pre_samples pulses before t_e and post_samples after, spaced
/// dt, with no pulse exactly at t_e.
struct PulseSchedule {
  int pre_samples = 48;
  int post_samples = 192;
  double dt = 1e-6;  // s

  int total() const { return pre_samples + post_samples; }
  std::vector<double> times(double t_e) const;
};

struct GroupConfig {
  double photons_per_pulse = 1e6;  // n; N_L = n * (pre + post)
  int shots = 453;
};

/// Phenomenological truth model per total photon number N_L: planar variances
/// squeeze as 1/(1 + kappa N_L) and reacquire scattering noise noise_b N_L,
/// while the polarization decays as exp(-eta N_L).
struct TruthModel {
  double kappa = 0;    // per photon
  double eta = 0;      // per photon
  double noise_b = 0;  // spin-units^2 per photon
};

struct GeneratorConfig {
  double n_atoms = 1.75e6;
  SpinLabel atom_j{2};  // spin-1
  FidModelParams fid;
  PulseSchedule schedule;
  std::vector<GroupConfig> groups;
  TruthModel model;
  double readout_theta_var_coeff = 0;  // var(theta) = coeff / n per pulse
  int noise_shots = 453;               // no-atom shots for Gamma_0
  std::uint64_t seed = 1;
};

/// Solves the truth-model coefficients so the analyzed optimum group lands on
/// the given summary statistics: xi^2 = xi_opt and |<J_par>| = coherence_opt
/// * N at N_L = photons_opt, with the xi^2 minimum at photons_opt.
TruthModel calibrate_truth_model(double n_atoms, SpinLabel atom_j, double photons_opt,
                                 double xi_opt, double coherence_opt);

struct Sample {
  double t = 0;      // s
  double theta = 0;  // rad
};

struct MeasurementRecord {
  long shot_id = 0;
  double photons_per_pulse = 0;
  std::vector<Sample> samples;
};

/// Exact per-group quantities implied by the configuration; ground truth for
/// estimator tests. Vectors and matrices are in (J_z, J_y) component order.
struct GroupTruth {
  double photon_total = 0;                      // N_L
  double coherence = 0;                         // |<J_par>| / (N j)
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma_target = Eigen::Matrix2d::Zero();  // conditional (recovered) covariance
  Eigen::Matrix2d sigma_draw = Eigen::Matrix2d::Zero();    // per-shot spread actually drawn
  Eigen::Matrix2d r_pre = Eigen::Matrix2d::Zero();         // pre-segment estimator covariance
  Eigen::Matrix2d r_post = Eigen::Matrix2d::Zero();        // post-segment estimator covariance
  double xi_sq = 0;
};

GroupTruth group_truth(const GeneratorConfig& config, const GroupConfig& group);

struct SyntheticRun {
  GeneratorConfig config;
  std::vector<MeasurementRecord> records;        // with atoms
  std::vector<MeasurementRecord> noise_records;  // without atoms (theta_0 + readout only)
};

/// Deterministic given the seed: each shot derives its own random stream, so
/// records are bit-identical across runs and evaluation orders.
SyntheticRun generate_synthetic_run(const GeneratorConfig& config);

struct FitResult {
  Eigen::Vector2d j_zy = Eigen::Vector2d::Zero();  // (J_z(t_e), J_y(t_e))
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

/// Weighted linear least squares in the two spin amplitudes.
/// theta_noise_var scales the returned estimator covariance
/// (A^T A)^{-1} theta_noise_var. Throws DomainError on a rank-deficient
/// design (fewer than 2 samples or all phases at multiples of pi).
FitResult fit_fid_segment(std::span<const Sample> segment, const FidModelParams& fid,
                          double theta_noise_var = 1.0);

/// Calibration pre-fit for the model globals: grid search over (omega_L, T2)
/// around the given initial values with the linear (J_z, J_y, theta_0) solve
/// inside, minimizing the summed squared residual over whole records. The
/// per-shot pipeline then treats the result as calibrated constants.
struct CalibrationGrid {
  double omega_span = 0.05;  // relative half-width around the initial omega_L
  int omega_points = 41;
  double t2_span = 0.5;      // relative half-width around the initial T2
  int t2_points = 21;
};

FidModelParams calibrate_fid(std::span<const MeasurementRecord> records,
                             const FidModelParams& initial,
                             const CalibrationGrid& grid = {});

struct SpinEstimatePair {
  Eigen::Vector2d j1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d j2 = Eigen::Vector2d::Zero();
};

/// Gamma_{J2|J1} = Gamma_{J2} - Gamma_{J2 J1} Gamma_{J1}^{-1} Gamma_{J1 J2}
/// from sample covariances. Guards on cond(Gamma_{J1}) <= 1e12; the optional
/// ridge adds epsilon to the Gamma_{J1} diagonal (off by default).
Eigen::Matrix2d conditional_covariance(const std::vector<SpinEstimatePair>& pairs,
                                       double ridge = 0.0);

/// Gamma = Gamma_cond - Gamma_0, element-wise. No clamping: a negative
/// eigenvalue sets *negative_flag instead of being hidden.
Eigen::Matrix2d subtract_readout_noise(const Eigen::Matrix2d& gamma_cond,
                                       const Eigen::Matrix2d& gamma_0,
                                       bool* negative_flag = nullptr);

struct AnalysisConfig {
  CriterionConfig criterion{5, Criterion::LinearZeta, 1e-9};
  int bootstrap_resamples = 500;
  std::uint64_t bootstrap_seed = 99;
  int min_shots = 8;
  double ridge = 0.0;
};

struct GroupReport {
  double photon_total = 0;
  int shots = 0;
  double xi_sq = 0;
  double xi_sigma = 0;       // bootstrap 1-sigma on xi^2
  double coherence = 0;      // |<J_par>| / (N j)
  double readout_level = 0;  // tr(Gamma_0)/2
  DepthVerdict verdict;
  bool negative_covariance = false;
  std::vector<std::string> warnings;
};

struct PipelineReport {
  std::vector<GroupReport> groups;  // sorted by photon_total
  std::vector<std::string> warnings;
};

/// Full analysis: per-shot fits, conditional covariance, readout-noise
/// subtraction, planar moments in the polarization frame, squeezing parameter
/// with a bootstrap confidence band, and the depth verdict per N_L group.
PipelineReport analyze_run(const SyntheticRun& run, const AnalysisConfig& config,
                           CurveLibrary& library);

}  // namespace pqs::pipeline
