#pragma once

// Shared synthetic-run scenario: an atom-number and coupling configuration
// whose analyzed optimum group reproduces the reference summary statistics
// (xi^2 = 0.32, coherence 0.83 at N_L = 2.47e8). Seed 72 is frozen as the
// regression realization: its estimate lands within 5e-4 of the tuned value.

#include "pqs/pipeline.hpp"

namespace pqs_test {

inline pqs::pipeline::GeneratorConfig experiment_scenario(int shots = 453,
                                                          bool full_sweep = true) {
  using namespace pqs::pipeline;
  GeneratorConfig cfg;
  cfg.n_atoms = 1.75e6;
  cfg.atom_j = pqs::SpinLabel{2};
  cfg.fid.g = 3e-7;
  cfg.fid.omega_L = 2 * 3.14159265358979323846 * 26e3;
  cfg.fid.t2 = 2e-3;
  cfg.fid.theta_0 = 0.01;
  cfg.schedule.pre_samples = 12;
  cfg.schedule.post_samples = 228;
  cfg.schedule.dt = 1e-6;
  cfg.fid.t_e = cfg.schedule.pre_samples * cfg.schedule.dt;
  cfg.readout_theta_var_coeff = 0.5;
  cfg.noise_shots = shots;
  cfg.model = calibrate_truth_model(cfg.n_atoms, cfg.atom_j, 2.47e8, 0.32, 0.83);
  const int pulses = cfg.schedule.total();
  if (full_sweep) {
    for (double nl : {0.6e8, 1.2e8, 1.8e8, 2.47e8, 3.2e8, 4.0e8})
      cfg.groups.push_back({nl / pulses, shots});
  } else {
    cfg.groups.push_back({1.2e8 / pulses, shots});
    cfg.groups.push_back({2.47e8 / pulses, shots});
  }
  cfg.seed = 72;
  return cfg;
}

inline constexpr int kOptimumGroupFull = 3;   // index after sorting by N_L
inline constexpr int kOptimumGroupSmall = 1;

}  // namespace pqs_test
