#include "pqs/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "pqs/metrology.hpp"
#include "pqs/version.hpp"

namespace pqs::io {

using nlohmann::json;

namespace {

json require(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field: ") + key);
  return j.at(key);
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("malformed JSON document");
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json points_to_json(const std::vector<HullPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.value});
  return arr;
}

std::vector<HullPoint> points_from_json(const json& arr) {
  std::vector<HullPoint> pts;
  for (const auto& p : arr) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), 0});
  return pts;
}

}  // namespace

std::string format_spin(SpinLabel spin) {
  if (spin.is_integer()) return std::to_string(spin.two_j / 2);
  return std::to_string(spin.two_j) + "/2";
}

SpinLabel parse_spin(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      const double j = std::stod(text);
      return SpinLabel::from_j(j);
    }
    const int num = std::stoi(text.substr(0, slash));
    const int den = std::stoi(text.substr(slash + 1));
    if (den != 2) throw SchemaError("spin denominators other than 2 are not supported");
    return SpinLabel::from_two_j(num);
  } catch (const std::invalid_argument&) {
    throw SchemaError("cannot parse spin value: " + text);
  } catch (const std::out_of_range&) {
    throw SchemaError("spin value out of range: " + text);
  }
}

std::string sweep_to_json(const SweepResult& sweep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["two_j"] = sweep.spin.two_j;
  j["objective"] = sweep.objective == VarianceObjective::PlanarSum ? "planar_sum" : "z_only";
  json samples = json::array();
  for (const auto& s : sweep.samples) {
    samples.push_back({{"lambda", s.params.lambda},
                       {"X", s.x},
                       {"var_sum", s.var_sum},
                       {"converged", s.converged}});
  }
  j["samples"] = samples;
  return dump(j);
}

std::string curve_to_json(const BoundCurve& curve) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = to_string(curve.kind);
  j["two_J"] = curve.block_spin.two_j;
  j["k"] = curve.k;
  j["two_j_particle"] = curve.particle_j.two_j;
  j["points"] = points_to_json(curve.points);
  j["metadata"] = {{"lambda_min", curve.meta.lambda_min},
                   {"lambda_max", curve.meta.lambda_max},
                   {"delta_x", curve.meta.delta_x},
                   {"initial_points", curve.meta.initial_points},
                   {"solver_version", curve.meta.solver_version},
                   {"hull_consistency", curve.meta.hull_consistency},
                   {"exact", curve.meta.exact}};
  return dump(j);
}

BoundCurve curve_from_json(const std::string& text) {
  const json j = parse(text);
  if (require(j, "schema_version").get<int>() != kSchemaVersion)
    throw SchemaError("unsupported curve schema version");
  BoundCurve c;
  c.kind = curve_kind_from_string(require(j, "kind").get<std::string>());
  c.block_spin = SpinLabel::from_two_j(require(j, "two_J").get<int>());
  c.k = require(j, "k").get<int>();
  c.particle_j = SpinLabel::from_two_j(require(j, "two_j_particle").get<int>());
  c.points = points_from_json(require(j, "points"));
  const json meta = require(j, "metadata");
  c.meta.lambda_min = meta.value("lambda_min", 0.0);
  c.meta.lambda_max = meta.value("lambda_max", 0.0);
  c.meta.delta_x = meta.value("delta_x", 0.0);
  c.meta.initial_points = meta.value("initial_points", 0);
  c.meta.solver_version = meta.value("solver_version", "");
  c.meta.hull_consistency = meta.value("hull_consistency", 0.0);
  c.meta.exact = meta.value("exact", false);
  return c;
}

std::string curve_to_csv(const BoundCurve& curve) {
  std::ostringstream os;
  os << "X,value\n" << std::setprecision(17);
  for (const auto& p : curve.points) os << p.x << ',' << p.value << '\n';
  return os.str();
}

std::string zeta_table_to_csv(const ZetaTable& table) {
  std::ostringstream os;
  os << "J,zeta_squared\n" << std::setprecision(17);
  for (const auto& [two_j, z] : table.entries)
    os << format_spin(SpinLabel{two_j}) << ',' << z << '\n';
  return os.str();
}

ZetaTable zeta_table_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("J,zeta_squared", 0) != 0)
    throw SchemaError("zeta table CSV: bad header");
  ZetaTable table;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw SchemaError("zeta table CSV: missing comma on line " + std::to_string(lineno));
    const SpinLabel spin = parse_spin(line.substr(0, comma));
    table.entries[spin.two_j] = std::stod(line.substr(comma + 1));
  }
  return table;
}

std::string zeta_table_to_json(const ZetaTable& table) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["solver_version"] = table.solver_version;
  json entries = json::array();
  for (const auto& [two_j, z] : table.entries)
    entries.push_back({{"two_J", two_j}, {"zeta_squared", z}});
  j["entries"] = entries;
  return dump(j);
}

ZetaTable zeta_table_from_json(const std::string& text) {
  const json j = parse(text);
  ZetaTable table;
  table.solver_version = j.value("solver_version", "");
  for (const auto& e : require(j, "entries"))
    table.entries[require(e, "two_J").get<int>()] = require(e, "zeta_squared").get<double>();
  return table;
}

PlanarMoments moments_from_json(const std::string& text) {
  const json j = parse(text);
  PlanarMoments m;
  m.mean_y = require(j, "mean_y").get<double>();
  m.mean_z = require(j, "mean_z").get<double>();
  m.var_y = require(j, "var_y").get<double>();
  m.var_z = require(j, "var_z").get<double>();
  m.cov_yz = j.value("cov_yz", 0.0);
  m.mean_n = require(j, "mean_n").get<double>();
  m.spin = SpinLabel::from_two_j(require(j, "two_j").get<int>());
  if (j.contains("sigma_xi")) m.sigma_xi = j.at("sigma_xi").get<double>();
  if (m.var_y < 0 || m.var_z < 0) throw SchemaError("moments: negative variance");
  if (m.mean_n <= 0) throw SchemaError("moments: mean_n must be positive");
  return m;
}

std::string moments_to_json(const PlanarMoments& m) {
  json j;
  j["mean_y"] = m.mean_y;
  j["mean_z"] = m.mean_z;
  j["var_y"] = m.var_y;
  j["var_z"] = m.var_z;
  j["cov_yz"] = m.cov_yz;
  j["mean_n"] = m.mean_n;
  j["two_j"] = m.spin.two_j;
  if (m.sigma_xi) j["sigma_xi"] = *m.sigma_xi;
  return dump(j);
}

std::string verdict_to_json(const DepthVerdict& v) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["certified_depth"] = v.certified_depth;
  j["criterion"] = to_string(v.criterion_used);
  j["xi_parallel_sq"] = v.xi_parallel_sq;
  j["k_max"] = v.k_max;
  j["assumptions"] = v.assumption == PolarizationAssumption::EqualSplit
                         ? "equal_polarization_split"
                         : "worst_case_polarization";
  if (v.depth_interval)
    j["depth_interval"] = {v.depth_interval->first, v.depth_interval->second};
  else
    j["depth_interval"] = nullptr;
  json fr = json::object();
  for (const auto& [k, f] : v.fractions) fr[std::to_string(k + 1)] = f;
  j["fractions"] = fr;
  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"k", c.k}, {"violated", c.violated}, {"margin", c.margin}});
  j["checks"] = checks;
  return dump(j);
}

std::string comparison_to_csv(const ComparisonGrid& grid) {
  std::ostringstream os;
  os << "alpha,beta,planar_bound,sm_bound,winner\n" << std::setprecision(12);
  for (size_t ia = 0; ia < grid.alpha.size(); ++ia)
    for (size_t ib = 0; ib < grid.beta.size(); ++ib) {
      const int w = grid.winner(ia, ib);
      os << grid.alpha[ia] << ',' << grid.beta[ib] << ','
         << grid.planar_bound(ia, ib) << ',' << grid.sm_bound(ia, ib) << ','
         << (w > 0 ? "planar" : (w < 0 ? "sm" : "tie")) << '\n';
    }
  return os.str();
}

std::string sensitivity_csv(const PlanarMoments& moments, int phi_samples) {
  std::ostringstream os;
  os << "phi,sensitivity_ratio\n" << std::setprecision(12);
  for (int i = 0; i < phi_samples; ++i) {
    const double phi = 6.283185307179586 * i / phi_samples;
    os << phi << ',' << normalized_sensitivity(moments, phi) << '\n';
  }
  return os.str();
}

std::string records_to_csv(const std::vector<pipeline::MeasurementRecord>& records) {
  std::ostringstream os;
  os << "shot_id,t,theta,n,pulse_index\n" << std::setprecision(17);
  for (const auto& rec : records) {
    int idx = 0;
    for (const auto& s : rec.samples)
      os << rec.shot_id << ',' << s.t << ',' << s.theta << ',' << rec.photons_per_pulse
         << ',' << idx++ << '\n';
  }
  return os.str();
}

std::vector<pipeline::MeasurementRecord> records_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("shot_id,t,theta,n,pulse_index", 0) != 0)
    throw SchemaError("records CSV: bad header");
  std::vector<pipeline::MeasurementRecord> out;
  long current_id = -1;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    double vals[5];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(ls, field, ','))
        throw SchemaError("records CSV: line " + std::to_string(lineno) +
                          ": expected 5 fields");
      try {
        vals[i] = std::stod(field);
      } catch (const std::exception&) {
        throw SchemaError("records CSV: line " + std::to_string(lineno) + ", field " +
                          std::to_string(i + 1) + ": not a number");
      }
    }
    const long id = static_cast<long>(vals[0]);
    if (out.empty() || id != current_id) {
      out.push_back({id, vals[3], {}});
      current_id = id;
    }
    out.back().samples.push_back({vals[1], vals[2]});
  }
  return out;
}

std::string generator_config_to_json(const pipeline::GeneratorConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n_atoms"] = c.n_atoms;
  j["two_j"] = c.atom_j.two_j;
  j["fid"] = {{"g", c.fid.g},
              {"omega_L", c.fid.omega_L},
              {"T2", c.fid.t2},
              {"theta_0", c.fid.theta_0},
              {"t_e", c.fid.t_e}};
  j["schedule"] = {{"pre_samples", c.schedule.pre_samples},
                   {"post_samples", c.schedule.post_samples},
                   {"dt", c.schedule.dt}};
  json groups = json::array();
  for (const auto& g : c.groups)
    groups.push_back({{"photons_per_pulse", g.photons_per_pulse}, {"shots", g.shots}});
  j["groups"] = groups;
  j["model"] = {{"kappa", c.model.kappa}, {"eta", c.model.eta}, {"noise_b", c.model.noise_b}};
  j["readout_theta_var_coeff"] = c.readout_theta_var_coeff;
  j["noise_shots"] = c.noise_shots;
  j["seed"] = c.seed;
  return dump(j);
}

pipeline::GeneratorConfig generator_config_from_json(const std::string& text) {
  const json j = parse(text);
  pipeline::GeneratorConfig c;
  c.n_atoms = require(j, "n_atoms").get<double>();
  c.atom_j = SpinLabel::from_two_j(require(j, "two_j").get<int>());
  const json fid = require(j, "fid");
  c.fid.g = require(fid, "g").get<double>();
  c.fid.omega_L = require(fid, "omega_L").get<double>();
  c.fid.t2 = require(fid, "T2").get<double>();
  c.fid.theta_0 = require(fid, "theta_0").get<double>();
  c.fid.t_e = require(fid, "t_e").get<double>();
  const json sched = require(j, "schedule");
  c.schedule.pre_samples = require(sched, "pre_samples").get<int>();
  c.schedule.post_samples = require(sched, "post_samples").get<int>();
  c.schedule.dt = require(sched, "dt").get<double>();
  for (const auto& g : require(j, "groups"))
    c.groups.push_back({require(g, "photons_per_pulse").get<double>(),
                        require(g, "shots").get<int>()});
  const json model = require(j, "model");
  c.model.kappa = require(model, "kappa").get<double>();
  c.model.eta = require(model, "eta").get<double>();
  c.model.noise_b = require(model, "noise_b").get<double>();
  c.readout_theta_var_coeff = require(j, "readout_theta_var_coeff").get<double>();
  c.noise_shots = require(j, "noise_shots").get<int>();
  c.seed = require(j, "seed").get<std::uint64_t>();
  return c;
}

std::string report_to_json(const pipeline::PipelineReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json groups = json::array();
  for (const auto& g : report.groups) {
    json e;
    e["N_L"] = g.photon_total;
    e["shots"] = g.shots;
    e["xi_sq"] = g.xi_sq;
    e["xi_sigma"] = g.xi_sigma;
    e["coherence"] = g.coherence;
    e["readout_level"] = g.readout_level;
    e["negative_covariance"] = g.negative_covariance;
    e["warnings"] = g.warnings;
    e["verdict"] = json::parse(verdict_to_json(g.verdict));
    groups.push_back(e);
  }
  j["groups"] = groups;
  j["warnings"] = report.warnings;
  return dump(j);
}

std::string report_to_csv(const pipeline::PipelineReport& report) {
  int k_max = 0;
  for (const auto& g : report.groups)
    k_max = std::max(k_max, g.verdict.k_max);
  std::ostringstream os;
  os << "N_L,xi_sq,xi_sigma,depth";
  for (int k = 1; k <= k_max; ++k) os << ",f_" << k + 1;
  os << '\n' << std::setprecision(12);
  for (const auto& g : report.groups) {
    os << g.photon_total << ',' << g.xi_sq << ',' << g.xi_sigma << ','
       << g.verdict.certified_depth;
    for (int k = 1; k <= k_max; ++k) {
      auto it = g.verdict.fractions.find(k);
      os << ',' << (it != g.verdict.fractions.end() ? it->second : 0.0);
    }
    os << '\n';
  }
  return os.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content, bool force) {
  if (!force && std::filesystem::exists(path))
    throw IoError("refusing to overwrite existing file (use --force): " + path.string());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << content;
}

void write_run_dir(const std::filesystem::path& dir, const pipeline::SyntheticRun& run,
                   bool force) {
  std::filesystem::create_directories(dir);
  write_file(dir / "run.json", generator_config_to_json(run.config), force);
  write_file(dir / "records.csv", records_to_csv(run.records), force);
  write_file(dir / "noise_records.csv", records_to_csv(run.noise_records), force);
}

pipeline::SyntheticRun read_run_dir(const std::filesystem::path& dir) {
  pipeline::SyntheticRun run;
  run.config = generator_config_from_json(read_file(dir / "run.json"));
  run.records = records_from_csv(read_file(dir / "records.csv"));
  run.noise_records = records_from_csv(read_file(dir / "noise_records.csv"));
  return run;
}

}  // namespace pqs::io
