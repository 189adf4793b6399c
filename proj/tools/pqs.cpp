// Command-line front end: bound-curve and zeta-table generation, entanglement
// depth certification from measured moments, criterion comparison grids, and
// the synthetic QND measurement pipeline.
//
// Exit codes: 0 success, 2 usage, 3 data/schema, 4 numerical non-convergence.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "pqs/cache.hpp"
#include "pqs/criteria.hpp"
#include "pqs/curves.hpp"
#include "pqs/io.hpp"
#include "pqs/metrology.hpp"
#include "pqs/pipeline.hpp"
#include "pqs/version.hpp"

namespace {

using namespace pqs;

struct GlobalOptions {
  bool force = false;
  bool json = false;
  int threads = 1;
  std::string cache_dir;  // overrides PQS_CACHE_DIR when set
};

std::shared_ptr<const CurveCache> open_cache(const GlobalOptions& g) {
  if (!g.cache_dir.empty()) return std::make_shared<CurveCache>(g.cache_dir);
  if (auto env = CurveCache::from_env())
    return std::make_shared<CurveCache>(std::move(*env));
  return nullptr;
}

void emit(const GlobalOptions& g, const std::string& path, const std::string& content,
          const std::string& stdout_fallback) {
  if (!path.empty()) {
    io::write_file(path, content, g.force);
  } else {
    std::cout << (g.json ? content : stdout_fallback);
  }
}

std::vector<double> parse_grid(const std::string& spec, bool geometric) {
  // "min:max:count"
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw SchemaError("grid must be min:max:count, got: " + spec);
  const double lo = std::stod(spec.substr(0, c1));
  const double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const int n = std::stoi(spec.substr(c2 + 1));
  if (n < 1 || hi < lo) throw SchemaError("invalid grid range: " + spec);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"planar spin squeezing entanglement-depth toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_flag("--force", g.force, "overwrite existing output files");
  app.add_flag("--json", g.json, "machine-readable JSON on stdout");
  app.add_option("--threads", g.threads, "worker cap for table generation")
      ->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", g.cache_dir,
                 "curve cache directory (default: PQS_CACHE_DIR)");

  // --- zeta-table ---
  auto* zt = app.add_subcommand("zeta-table", "tabulate zeta^2_J up to J max");
  double zt_jmax = 27;
  bool zt_half = false;
  std::string zt_out;
  zt->add_option("--j-max", zt_jmax, "largest J (half-integers allowed)")->required();
  zt->add_flag("--half-integers", zt_half, "half-integer steps instead of integer");
  zt->add_option("--out", zt_out, "output CSV path");
  zt->callback([&] {
    const SpinLabel jmax = SpinLabel::from_j(zt_jmax);
    const ZetaTable table = zeta_table(jmax, zt_half, {}, g.threads);
    emit(g, zt_out, io::zeta_table_to_csv(table),
         g.json ? io::zeta_table_to_json(table) : io::zeta_table_to_csv(table));
  });

  // --- bound-curve ---
  auto* bc = app.add_subcommand("bound-curve", "producibility bound curve");
  int bc_k = 1;
  double bc_j = 1;
  int bc_samples = 0;
  bool bc_true = false;
  std::string bc_out, bc_format = "csv";
  bc->add_option("--k", bc_k, "producibility index")->required()->check(CLI::PositiveNumber);
  bc->add_option("--j", bc_j, "single-particle spin")->required();
  bc->add_option("--samples", bc_samples, "X samples for the true-curve diagnostic");
  bc->add_flag("--true-curve", bc_true, "non-convex diagnostic curve instead of the hull");
  bc->add_option("--out", bc_out, "output path");
  bc->add_option("--format", bc_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  bc->callback([&] {
    const SpinLabel j = SpinLabel::from_j(bc_j);
    BoundCurve curve;
    if (bc_true) {
      std::vector<double> xs;
      const int n = bc_samples > 1 ? bc_samples : 201;
      for (int i = 0; i < n; ++i) xs.push_back(static_cast<double>(i) / (n - 1));
      curve = true_producibility_curve(bc_k, j, xs);
    } else {
      CurveLibrary lib({}, open_cache(g));
      curve = lib.hull(bc_k, j);
    }
    const std::string body =
        bc_format == "json" ? io::curve_to_json(curve) : io::curve_to_csv(curve);
    emit(g, bc_out, body, g.json ? io::curve_to_json(curve) : body);
  });

  // --- sm-curve ---
  auto* sc = app.add_subcommand("sm-curve", "extreme-squeezing curve F_J");
  double sc_j = 1;
  std::string sc_out, sc_format = "csv";
  sc->add_option("--J", sc_j, "block spin")->required();
  sc->add_option("--out", sc_out, "output path");
  sc->add_option("--format", sc_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sc->callback([&] {
    CurveLibrary lib({}, open_cache(g));
    const BoundCurve& curve = lib.sm(SpinLabel::from_j(sc_j));
    const std::string body =
        sc_format == "json" ? io::curve_to_json(curve) : io::curve_to_csv(curve);
    emit(g, sc_out, body, g.json ? io::curve_to_json(curve) : body);
  });

  // --- depth ---
  auto* dp = app.add_subcommand("depth", "certify entanglement depth from moments");
  std::string dp_moments, dp_criterion = "linear", dp_out;
  int dp_kmax = 10;
  dp->add_option("--moments", dp_moments, "moments JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  dp->add_option("--criterion", dp_criterion, "linear | obs1 | sm | he")
      ->check(CLI::IsMember({"linear", "obs1", "sm", "he"}));
  dp->add_option("--k-max", dp_kmax, "largest tested producibility")
      ->check(CLI::PositiveNumber);
  dp->add_option("--out", dp_out, "verdict JSON path");
  dp->callback([&] {
    const PlanarMoments m = io::moments_from_json(io::read_file(dp_moments));
    CurveLibrary lib({}, open_cache(g));
    CriterionConfig cfg;
    cfg.k_max = dp_kmax;
    cfg.which = criterion_from_string(dp_criterion == "he" ? "he_k1" : dp_criterion);
    const DepthVerdict v = entanglement_depth(m, cfg, lib);
    const std::string json = io::verdict_to_json(v);
    std::string text = "certified depth: " + std::to_string(v.certified_depth) +
                       "  (criterion " + to_string(v.criterion_used) +
                       ", xi^2 = " + std::to_string(v.xi_parallel_sq) + ")\n";
    if (v.depth_interval)
      text += "depth interval under 1 sigma: [" +
              std::to_string(v.depth_interval->first) + ", " +
              std::to_string(v.depth_interval->second) + "]\n";
    emit(g, dp_out, json, g.json ? json : text);
  });

  // --- compare ---
  auto* cp = app.add_subcommand("compare", "planar vs extreme-squeezing bounds");
  int cp_k = 5;
  double cp_j = 1;
  std::string cp_alpha = "0.01:100:50", cp_beta, cp_out;
  cp->add_option("--k", cp_k, "producibility index")->required();
  cp->add_option("--j", cp_j, "single-particle spin")->required();
  cp->add_option("--alpha-grid", cp_alpha, "variance ratio grid min:max:count (geometric)");
  cp->add_option("--beta-grid", cp_beta, "polarization grid min:max:count (linear)");
  cp->add_option("--out", cp_out, "output CSV path");
  cp->callback([&] {
    const SpinLabel j = SpinLabel::from_j(cp_j);
    const std::string beta_spec =
        cp_beta.empty() ? "0.02:" + std::to_string(j.j()) + ":50" : cp_beta;
    CurveLibrary lib({}, open_cache(g));
    const ComparisonGrid grid = compare_criteria(
        cp_k, j, parse_grid(cp_alpha, true), parse_grid(beta_spec, false), lib);
    const std::string csv = io::comparison_to_csv(grid);
    emit(g, cp_out, csv, csv);
  });

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "generate a synthetic measurement run");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  sim->add_option("--config", sim_config, "generator config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "output run directory")->required();
  sim->add_option("--seed", sim_seed, "override the config seed")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->callback([&] {
    pipeline::GeneratorConfig cfg =
        io::generator_config_from_json(io::read_file(sim_config));
    if (sim_seed_set) cfg.seed = sim_seed;
    const pipeline::SyntheticRun run = pipeline::generate_synthetic_run(cfg);
    io::write_run_dir(sim_out, run, g.force);
    if (g.json)
      std::cout << "{\"records\": " << run.records.size()
                << ", \"noise_records\": " << run.noise_records.size() << "}\n";
    else
      std::cout << "wrote " << run.records.size() << " shots ("
                << run.noise_records.size() << " no-atom) to " << sim_out << "\n";
  });

  // --- analyze ---
  auto* an = app.add_subcommand("analyze", "run the estimation pipeline on records");
  std::string an_records, an_criterion = "linear", an_out_json, an_out_csv;
  int an_kmax = 5, an_bootstrap = 500;
  an->add_option("--records", an_records, "run directory (run.json + records.csv)")
      ->required()
      ->check(CLI::ExistingDirectory);
  an->add_option("--criterion", an_criterion, "linear | obs1 | sm | he")
      ->check(CLI::IsMember({"linear", "obs1", "sm", "he"}));
  an->add_option("--k-max", an_kmax, "largest tested producibility");
  an->add_option("--bootstrap", an_bootstrap, "bootstrap resamples for the 1-sigma band");
  an->add_option("--out-json", an_out_json, "report JSON path");
  an->add_option("--out-csv", an_out_csv, "report CSV path");
  an->callback([&] {
    const pipeline::SyntheticRun run = io::read_run_dir(an_records);
    CurveLibrary lib({}, open_cache(g));
    pipeline::AnalysisConfig cfg;
    cfg.criterion.k_max = an_kmax;
    cfg.criterion.which =
        criterion_from_string(an_criterion == "he" ? "he_k1" : an_criterion);
    cfg.bootstrap_resamples = an_bootstrap;
    const pipeline::PipelineReport rep = pipeline::analyze_run(run, cfg, lib);
    if (!an_out_json.empty()) io::write_file(an_out_json, io::report_to_json(rep), g.force);
    if (!an_out_csv.empty()) io::write_file(an_out_csv, io::report_to_csv(rep), g.force);
    if (g.json)
      std::cout << io::report_to_json(rep);
    else
      std::cout << io::report_to_csv(rep);
  });

  // --- sensitivity ---
  auto* sn = app.add_subcommand("sensitivity", "SQL-normalized phase sensitivity sweep");
  std::string sn_moments, sn_out;
  int sn_samples = 256;
  sn->add_option("--moments", sn_moments, "moments JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sn->add_option("--samples", sn_samples, "phi samples over one turn");
  sn->add_option("--out", sn_out, "output CSV path");
  sn->callback([&] {
    const PlanarMoments m = io::moments_from_json(io::read_file(sn_moments));
    const std::string csv = io::sensitivity_csv(m, sn_samples);
    std::string summary = "phase-averaged enhancement: " +
                          std::to_string(phase_averaged_enhancement(m)) + "\n";
    emit(g, sn_out, csv, g.json ? csv : summary + csv);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConvergenceError& e) {
    std::cerr << "error (numerics): " << e.what() << "\n";
    return 4;
  } catch (const SchemaError& e) {
    std::cerr << "error (schema): " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
