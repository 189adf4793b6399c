#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "pqs/io.hpp"
#include "support/scenario.hpp"

using namespace pqs;

TEST_CASE("spin formatting round trip") {
  CHECK(io::format_spin(SpinLabel{6}) == "3");
  CHECK(io::format_spin(SpinLabel{3}) == "3/2");
  CHECK(io::parse_spin("3").two_j == 6);
  CHECK(io::parse_spin("3/2").two_j == 3);
  CHECK(io::parse_spin("0.5").two_j == 1);
  CHECK_THROWS_AS(io::parse_spin("abc"), SchemaError);
}

TEST_CASE("curve JSON round trip preserves points and metadata") {
  const BoundCurve hull = producibility_hull(2, SpinLabel{1});
  const BoundCurve back = io::curve_from_json(io::curve_to_json(hull));
  CHECK(back.kind == hull.kind);
  CHECK(back.k == hull.k);
  CHECK(back.block_spin == hull.block_spin);
  CHECK(back.particle_j == hull.particle_j);
  REQUIRE(back.points.size() == hull.points.size());
  for (size_t i = 0; i < hull.points.size(); ++i) {
    CHECK(back.points[i].x == hull.points[i].x);
    CHECK(back.points[i].value == hull.points[i].value);
  }
  CHECK(back.meta.solver_version == hull.meta.solver_version);
  CHECK(back.meta.hull_consistency == hull.meta.hull_consistency);

  CHECK_THROWS_AS(io::curve_from_json("{"), SchemaError);
  CHECK_THROWS_AS(io::curve_from_json("{\"schema_version\": 1}"), SchemaError);
}

TEST_CASE("curve CSV has the documented two-column layout") {
  const BoundCurve c = symmetric_curve(SpinLabel{2});
  const std::string csv = io::curve_to_csv(c);
  CHECK(csv.rfind("X,value\n", 0) == 0);
  size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == c.points.size() + 1);
}

TEST_CASE("zeta table CSV and JSON round trips") {
  ZetaTable t;
  t.solver_version = "test";
  t.entries[2] = 0.449059;
  t.entries[4] = 0.389454;
  t.entries[3] = 0.414836;  // half-integer row formats as 3/2

  const ZetaTable csv_back = io::zeta_table_from_csv(io::zeta_table_to_csv(t));
  REQUIRE(csv_back.entries.size() == 3);
  CHECK(csv_back.entries.at(2) == doctest::Approx(0.449059).epsilon(1e-12));
  CHECK(csv_back.entries.at(3) == doctest::Approx(0.414836).epsilon(1e-12));

  const ZetaTable json_back = io::zeta_table_from_json(io::zeta_table_to_json(t));
  CHECK(json_back.entries == t.entries);
  CHECK(json_back.solver_version == "test");

  CHECK_THROWS_AS(io::zeta_table_from_csv("bad header\n1,2\n"), SchemaError);
}

TEST_CASE("moments JSON: round trip, defaults, validation") {
  PlanarMoments m;
  m.spin = SpinLabel{2};
  m.mean_n = 1.75e6;
  m.mean_y = 0.83 * m.mean_n;
  m.mean_z = 12.5;
  m.var_y = 1e5;
  m.var_z = 2e5;
  m.cov_yz = -3e4;
  m.sigma_xi = 0.02;
  const PlanarMoments back = io::moments_from_json(io::moments_to_json(m));
  CHECK(back.mean_y == m.mean_y);
  CHECK(back.cov_yz == m.cov_yz);
  CHECK(back.spin == m.spin);
  REQUIRE(back.sigma_xi.has_value());
  CHECK(*back.sigma_xi == 0.02);

  // cov and sigma are optional
  const PlanarMoments minimal = io::moments_from_json(
      R"({"mean_y": 1, "mean_z": 0, "var_y": 0.1, "var_z": 0.1, "mean_n": 2, "two_j": 1})");
  CHECK(minimal.cov_yz == 0.0);
  CHECK(!minimal.sigma_xi.has_value());

  CHECK_THROWS_AS(io::moments_from_json(R"({"mean_y": 1})"), SchemaError);
  CHECK_THROWS_AS(
      io::moments_from_json(
          R"({"mean_y": 1, "mean_z": 0, "var_y": -0.1, "var_z": 0, "mean_n": 2, "two_j": 1})"),
      SchemaError);
}

TEST_CASE("verdict JSON carries all fields") {
  CurveLibrary lib;
  PlanarMoments m;
  m.spin = SpinLabel{2};
  m.mean_n = 1.75e6;
  m.mean_y = 0.83 * m.mean_n;
  m.var_y = m.var_z = 0.16 * m.mean_y;
  m.sigma_xi = 0.02;
  const DepthVerdict v = entanglement_depth(m, {5, Criterion::LinearZeta, 1e-9}, lib);
  const std::string json = io::verdict_to_json(v);
  CHECK(json.find("\"certified_depth\": 5") != std::string::npos);
  CHECK(json.find("\"criterion\": \"linear_zeta\"") != std::string::npos);
  CHECK(json.find("\"depth_interval\"") != std::string::npos);
  CHECK(json.find("\"fractions\"") != std::string::npos);
  CHECK(json.find("equal_polarization_split") != std::string::npos);
}

TEST_CASE("records CSV round trip is lossless") {
  pipeline::GeneratorConfig cfg = pqs_test::experiment_scenario(3, false);
  const pipeline::SyntheticRun run = pipeline::generate_synthetic_run(cfg);
  const auto back = io::records_from_csv(io::records_to_csv(run.records));
  REQUIRE(back.size() == run.records.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].shot_id == run.records[i].shot_id);
    CHECK(back[i].photons_per_pulse == run.records[i].photons_per_pulse);
    REQUIRE(back[i].samples.size() == run.records[i].samples.size());
    for (size_t k = 0; k < back[i].samples.size(); ++k) {
      CHECK(back[i].samples[k].t == run.records[i].samples[k].t);
      CHECK(back[i].samples[k].theta == run.records[i].samples[k].theta);
    }
  }
  CHECK_THROWS_AS(io::records_from_csv("wrong\n"), SchemaError);
  CHECK_THROWS_AS(io::records_from_csv("shot_id,t,theta,n,pulse_index\n1,2\n"), SchemaError);
  CHECK_THROWS_AS(io::records_from_csv("shot_id,t,theta,n,pulse_index\n1,2,x,4,5\n"),
                  SchemaError);
}

TEST_CASE("run directory round trip and overwrite protection") {
  const auto dir = std::filesystem::temp_directory_path() / "pqs_run_test";
  std::filesystem::remove_all(dir);

  pipeline::GeneratorConfig cfg = pqs_test::experiment_scenario(3, false);
  const pipeline::SyntheticRun run = pipeline::generate_synthetic_run(cfg);
  io::write_run_dir(dir, run, false);
  CHECK_THROWS_AS(io::write_run_dir(dir, run, false), IoError);
  io::write_run_dir(dir, run, true);

  const pipeline::SyntheticRun back = io::read_run_dir(dir);
  CHECK(back.config.seed == cfg.seed);
  CHECK(back.config.model.kappa == cfg.model.kappa);
  CHECK(back.config.fid.omega_L == cfg.fid.omega_L);
  REQUIRE(back.records.size() == run.records.size());
  CHECK(back.records.back().samples.back().theta ==
        run.records.back().samples.back().theta);
  REQUIRE(back.noise_records.size() == run.noise_records.size());

  // analysis on the re-ingested run gives identical numbers
  CurveLibrary lib;
  pipeline::AnalysisConfig acfg;
  acfg.criterion.k_max = 2;
  acfg.bootstrap_resamples = 0;
  acfg.min_shots = 2;
  const auto rep_a = pipeline::analyze_run(run, acfg, lib);
  const auto rep_b = pipeline::analyze_run(back, acfg, lib);
  REQUIRE(rep_a.groups.size() == rep_b.groups.size());
  for (size_t i = 0; i < rep_a.groups.size(); ++i)
    CHECK(rep_a.groups[i].xi_sq == rep_b.groups[i].xi_sq);

  std::filesystem::remove_all(dir);
}

TEST_CASE("report JSON and CSV") {
  CurveLibrary lib;
  pipeline::GeneratorConfig cfg = pqs_test::experiment_scenario(40, false);
  pipeline::AnalysisConfig acfg;
  acfg.criterion.k_max = 3;
  acfg.bootstrap_resamples = 50;
  const auto rep = pipeline::analyze_run(pipeline::generate_synthetic_run(cfg), acfg, lib);

  const std::string json = io::report_to_json(rep);
  CHECK(json.find("\"N_L\"") != std::string::npos);
  CHECK(json.find("\"xi_sq\"") != std::string::npos);
  CHECK(json.find("\"verdict\"") != std::string::npos);

  const std::string csv = io::report_to_csv(rep);
  CHECK(csv.rfind("N_L,xi_sq,xi_sigma,depth,f_2,f_3,f_4\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(rep.groups.size()));
}

TEST_CASE("comparison CSV layout") {
  CurveLibrary lib;
  const ComparisonGrid grid =
      compare_criteria(2, SpinLabel{1}, {0.5, 2.0}, {0.2, 0.4}, lib);
  const std::string csv = io::comparison_to_csv(grid);
  CHECK(csv.rfind("alpha,beta,planar_bound,sm_bound,winner\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK((csv.find("planar") != std::string::npos || csv.find("sm") != std::string::npos));
}

TEST_CASE("sweep JSON serialization") {
  const SweepResult sweep = sweep_lambda(SpinLabel{2});
  const std::string json = io::sweep_to_json(sweep);
  CHECK(json.find("\"two_j\": 2") != std::string::npos);
  CHECK(json.find("\"samples\"") != std::string::npos);
  CHECK(json.find("\"lambda\"") != std::string::npos);
}
