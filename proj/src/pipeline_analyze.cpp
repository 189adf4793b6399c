#include <algorithm>
#include <cmath>
#include <map>

#include "pqs/pipeline.hpp"
#include "pqs/rng.hpp"

namespace pqs::pipeline {

namespace {

struct GroupData {
  double photons_per_pulse = 0;
  std::vector<SpinEstimatePair> pairs;
  std::vector<Eigen::Vector2d> noise_j2;
};

Eigen::Matrix2d sample_covariance(const std::vector<Eigen::Vector2d>& vs) {
  const int n = static_cast<int>(vs.size());
  if (n < 2) throw DomainError("sample_covariance: need at least two vectors");
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& v : vs) mean += v;
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& v : vs) cov += (v - mean) * (v - mean).transpose();
  return cov / (n - 1);
}

struct XiEstimate {
  double xi_sq = 0;
  double coherence = 0;
  PlanarMoments moments;
  bool negative = false;
};

// Core estimator: conditional covariance of the post estimates given the pre
// estimates, minus the readout floor, rotated into the polarization frame.
XiEstimate estimate_xi(const std::vector<SpinEstimatePair>& pairs,
                       const Eigen::Matrix2d& gamma0, double n_atoms, SpinLabel j,
                       double ridge) {
  const Eigen::Matrix2d cond = conditional_covariance(pairs, ridge);
  bool negative = false;
  const Eigen::Matrix2d gamma = subtract_readout_noise(cond, gamma0, &negative);

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pairs) mean += p.j2;
  mean /= static_cast<double>(pairs.size());

  PlanarMoments m;
  m.mean_z = mean[0];
  m.mean_y = mean[1];
  m.var_z = gamma(0, 0);
  m.var_y = gamma(1, 1);
  m.cov_yz = gamma(0, 1);
  m.mean_n = n_atoms;
  m.spin = j;

  XiEstimate out;
  out.moments = rotate_to_polarization_axis(m);
  out.xi_sq = out.moments.var_sum() / out.moments.mean_y;
  out.coherence = out.moments.mean_y / (n_atoms * j.j());
  out.negative = negative;
  return out;
}

}  // namespace

PipelineReport analyze_run(const SyntheticRun& run, const AnalysisConfig& config,
                           CurveLibrary& library) {
  const GeneratorConfig& cfg = run.config;
  const double t_e = cfg.fid.t_e;

  // Group shots by photons per pulse (the N_L label of the schedule).
  std::map<double, GroupData> groups;
  for (const MeasurementRecord& rec : run.records) {
    GroupData& g = groups[rec.photons_per_pulse];
    g.photons_per_pulse = rec.photons_per_pulse;

    std::vector<Sample> pre, post;
    for (const Sample& s : rec.samples) (s.t < t_e ? pre : post).push_back(s);
    const double theta_var = cfg.readout_theta_var_coeff / rec.photons_per_pulse;
    SpinEstimatePair pair;
    pair.j1 = fit_fid_segment(pre, cfg.fid, theta_var).j_zy;
    pair.j2 = fit_fid_segment(post, cfg.fid, theta_var).j_zy;
    g.pairs.push_back(pair);
  }
  for (const MeasurementRecord& rec : run.noise_records) {
    auto it = groups.find(rec.photons_per_pulse);
    if (it == groups.end()) continue;
    std::vector<Sample> post;
    for (const Sample& s : rec.samples)
      if (s.t >= t_e) post.push_back(s);
    it->second.noise_j2.push_back(fit_fid_segment(post, cfg.fid).j_zy);
  }

  if (groups.size() < 2)
    throw DomainError("analyze_run: at least two N_L groups are required");

  PipelineReport report;
  SplitMix64 boot_root(config.bootstrap_seed);

  for (auto& [n_photons, g] : groups) {
    const double photon_total = n_photons * cfg.schedule.total();
    if (static_cast<int>(g.pairs.size()) < config.min_shots) {
      report.warnings.push_back("group N_L = " + std::to_string(photon_total) +
                                " skipped: fewer than minimum shots");
      continue;
    }
    if (g.noise_j2.size() < 3)
      throw DomainError("analyze_run: no-atom records missing for a group");

    const Eigen::Matrix2d gamma0 = sample_covariance(g.noise_j2);

    GroupReport gr;
    gr.photon_total = photon_total;
    gr.shots = static_cast<int>(g.pairs.size());
    gr.readout_level = 0.5 * gamma0.trace();

    XiEstimate est = estimate_xi(g.pairs, gamma0, cfg.n_atoms, cfg.atom_j, config.ridge);
    gr.xi_sq = est.xi_sq;
    gr.coherence = est.coherence;
    gr.negative_covariance = est.negative;
    if (est.negative)
      gr.warnings.push_back("noise-subtracted covariance has a negative eigenvalue");

    // Shot bootstrap (atom and no-atom resampled together) for the 1-sigma band.
    if (config.bootstrap_resamples > 1) {
      SplitMix64 rng = boot_root.split(static_cast<std::uint64_t>(photon_total));
      std::vector<double> xis;
      xis.reserve(config.bootstrap_resamples);
      const size_t np = g.pairs.size(), nn = g.noise_j2.size();
      std::vector<SpinEstimatePair> rp(np);
      std::vector<Eigen::Vector2d> rn(nn);
      for (int b = 0; b < config.bootstrap_resamples; ++b) {
        for (size_t i = 0; i < np; ++i) rp[i] = g.pairs[rng.next() % np];
        for (size_t i = 0; i < nn; ++i) rn[i] = g.noise_j2[rng.next() % nn];
        try {
          xis.push_back(estimate_xi(rp, sample_covariance(rn), cfg.n_atoms, cfg.atom_j,
                                    config.ridge)
                            .xi_sq);
        } catch (const DomainError&) {
          // Degenerate resample; skip it.
        }
      }
      if (xis.size() > 8) {
        double mean = 0;
        for (double x : xis) mean += x;
        mean /= xis.size();
        double var = 0;
        for (double x : xis) var += (x - mean) * (x - mean);
        gr.xi_sigma = std::sqrt(var / (xis.size() - 1));
      }
    }

    PlanarMoments m = est.moments;
    if (gr.xi_sigma > 0) m.sigma_xi = gr.xi_sigma;
    gr.verdict = entanglement_depth(m, config.criterion, library);
    report.groups.push_back(std::move(gr));
  }

  std::sort(report.groups.begin(), report.groups.end(),
            [](const GroupReport& a, const GroupReport& b) {
              return a.photon_total < b.photon_total;
            });
  return report;
}

}  // namespace pqs::pipeline
