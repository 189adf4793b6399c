#include <cmath>

#include "pqs/pipeline.hpp"
#include "pqs/rng.hpp"

namespace pqs::pipeline {

std::vector<double> PulseSchedule::times(double t_e) const {
  std::vector<double> out;
  out.reserve(total());
  // Pulses at half-step offsets so none lands exactly on t_e.
  for (int k = pre_samples; k >= 1; --k) out.push_back(t_e - (k - 0.5) * dt);
  for (int k = 1; k <= post_samples; ++k) out.push_back(t_e + (k - 0.5) * dt);
  return out;
}

namespace {

// Design-matrix normal equations for one segment; the estimator covariance is
// (A^T A)^{-1} sigma_theta^2.
Eigen::Matrix2d segment_information(const GeneratorConfig& cfg, bool pre) {
  const auto& fid = cfg.fid;
  const std::vector<double> ts = cfg.schedule.times(fid.t_e);
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  const int begin = pre ? 0 : cfg.schedule.pre_samples;
  const int end = pre ? cfg.schedule.pre_samples : cfg.schedule.total();
  for (int i = begin; i < end; ++i) {
    const double tr = ts[i] - fid.t_e;
    const double phi = fid.omega_L * tr;
    const double env = std::exp(-tr / fid.t2);
    const double az = fid.g * std::cos(phi) * env;
    const double ay = -fid.g * std::sin(phi) * env;
    ata(0, 0) += az * az;
    ata(0, 1) += az * ay;
    ata(1, 0) += az * ay;
    ata(1, 1) += ay * ay;
  }
  return ata;
}

}  // namespace

TruthModel calibrate_truth_model(double n_atoms, SpinLabel atom_j, double photons_opt,
                                 double xi_opt, double coherence_opt) {
  if (photons_opt <= 0 || xi_opt <= 0 || coherence_opt <= 0 || coherence_opt > 1)
    throw DomainError("calibrate_truth_model: invalid targets");
  const double nj = n_atoms * atom_j.j();
  const double css_half = 0.5 * nj;                          // coherent-state variance per component
  const double var_half_opt = 0.5 * xi_opt * coherence_opt * nj;  // target, per component
  if (var_half_opt >= css_half)
    throw DomainError("calibrate_truth_model: target is not squeezed below the coherent level");

  TruthModel model;
  model.eta = -std::log(coherence_opt) / photons_opt;

  // Solve for u = kappa N_L_opt such that the xi^2 minimum sits at
  // photons_opt: var_half'(N*) + eta var_half(N*) = 0 with
  // var_half(N_L) = css/(1+kappa N_L) + b N_L and var_half(N*) pinned.
  auto mismatch = [&](double u) {
    const double kappa = u / photons_opt;
    const double b = (var_half_opt - css_half / (1.0 + u)) / photons_opt;
    return -css_half * kappa / ((1.0 + u) * (1.0 + u)) + b + model.eta * var_half_opt;
  };
  double lo = css_half / var_half_opt - 1.0 + 1e-9;  // smallest u with b >= 0
  double hi = lo + 1.0;
  while (mismatch(hi) < 0 && hi < 1e6) hi *= 2.0;
  if (mismatch(lo) > 0 || mismatch(hi) < 0)
    throw DomainError("calibrate_truth_model: no interior optimum for these targets");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mismatch(mid) < 0 ? lo : hi) = mid;
  }
  const double u = 0.5 * (lo + hi);
  model.kappa = u / photons_opt;
  model.noise_b = (var_half_opt - css_half / (1.0 + u)) / photons_opt;
  return model;
}

GroupTruth group_truth(const GeneratorConfig& cfg, const GroupConfig& group) {
  GroupTruth t;
  const double nj = cfg.n_atoms * cfg.atom_j.j();
  t.photon_total = group.photons_per_pulse * cfg.schedule.total();
  t.coherence = std::exp(-cfg.model.eta * t.photon_total);
  t.mean = Eigen::Vector2d(0.0, t.coherence * nj);

  const double css_half = 0.5 * nj;
  const double var_half = css_half / (1.0 + cfg.model.kappa * t.photon_total) +
                          cfg.model.noise_b * t.photon_total;
  t.sigma_target = var_half * Eigen::Matrix2d::Identity();
  t.xi_sq = 2.0 * var_half / (t.coherence * nj);

  const double theta_var = cfg.readout_theta_var_coeff / group.photons_per_pulse;
  if (theta_var <= 0) {
    // Noiseless readout: the per-shot fits are exact, conditioning is
    // degenerate, and the spread is drawn from the target directly.
    t.sigma_draw = t.sigma_target;
    return t;
  }
  t.r_pre = segment_information(cfg, true).inverse() * theta_var;
  t.r_post = segment_information(cfg, false).inverse() * theta_var;

  // The conditional-covariance analysis recovers (sigma_draw^-1 + r_pre^-1)^-1;
  // drawing with the inflated spread makes it recover sigma_target exactly.
  const Eigen::Matrix2d inv = t.sigma_target.inverse() - t.r_pre.inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(inv);
  if (es.eigenvalues().minCoeff() <= 0)
    throw DomainError(
        "group_truth: pre-segment readout is more precise than the target conditional "
        "variance; raise readout_theta_var_coeff or shorten the pre segment");
  t.sigma_draw = inv.inverse();
  return t;
}

SyntheticRun generate_synthetic_run(const GeneratorConfig& cfg) {
  if (cfg.groups.empty()) throw DomainError("generate_synthetic_run: no groups configured");
  if (cfg.schedule.pre_samples < 2 || cfg.schedule.post_samples < 2 ||
      cfg.schedule.dt <= 0)
    throw DomainError("generate_synthetic_run: invalid pulse schedule");
  if (cfg.fid.t2 <= 0) throw DomainError("generate_synthetic_run: T2 must be positive");
  if (cfg.fid.g == 0) throw DomainError("generate_synthetic_run: coupling g must be nonzero");

  SyntheticRun run;
  run.config = cfg;
  SplitMix64 root(cfg.seed);

  const std::vector<double> ts = cfg.schedule.times(cfg.fid.t_e);
  long shot_id = 0;

  for (size_t gi = 0; gi < cfg.groups.size(); ++gi) {
    const GroupConfig& group = cfg.groups[gi];
    const GroupTruth truth = group_truth(cfg, group);
    const Eigen::Matrix2d chol = Eigen::LLT<Eigen::Matrix2d>(truth.sigma_draw).matrixL();
    const double theta_sigma =
        std::sqrt(cfg.readout_theta_var_coeff / group.photons_per_pulse);

    for (int s = 0; s < group.shots; ++s, ++shot_id) {
      SplitMix64 rng = root.split((gi + 1) * 0x100000ULL + s);
      const Eigen::Vector2d jzy =
          truth.mean + chol * Eigen::Vector2d(rng.normal(), rng.normal());

      MeasurementRecord rec;
      rec.shot_id = shot_id;
      rec.photons_per_pulse = group.photons_per_pulse;
      rec.samples.reserve(ts.size());
      for (double t : ts) {
        const double tr = t - cfg.fid.t_e;
        const double phi = cfg.fid.omega_L * tr;
        const double env = std::exp(-tr / cfg.fid.t2);
        const double clean =
            cfg.fid.g * (jzy[0] * std::cos(phi) - jzy[1] * std::sin(phi)) * env +
            cfg.fid.theta_0;
        rec.samples.push_back({t, clean + theta_sigma * rng.normal()});
      }
      run.records.push_back(std::move(rec));
    }

    // No-atom shots for this group's readout-noise floor.
    for (int s = 0; s < cfg.noise_shots; ++s) {
      SplitMix64 rng = root.split(0xA0000000ULL + (gi + 1) * 0x100000ULL + s);
      MeasurementRecord rec;
      rec.shot_id = shot_id++;
      rec.photons_per_pulse = group.photons_per_pulse;
      rec.samples.reserve(ts.size());
      for (double t : ts)
        rec.samples.push_back({t, cfg.fid.theta_0 + theta_sigma * rng.normal()});
      run.noise_records.push_back(std::move(rec));
    }
  }
  return run;
}

}  // namespace pqs::pipeline
