#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pqs/criteria.hpp"
#include "pqs/curves.hpp"
#include "pqs/pipeline.hpp"

// External file formats. All JSON documents carry schema_version; every
// emitted file re-ingests through the matching reader.

namespace pqs::io {

std::string format_spin(SpinLabel spin);  // "3" or "3/2"
SpinLabel parse_spin(const std::string& text);

// --- sweeps ---
std::string sweep_to_json(const SweepResult& sweep);

// --- bound curves ---
std::string curve_to_json(const BoundCurve& curve);
BoundCurve curve_from_json(const std::string& text);
std::string curve_to_csv(const BoundCurve& curve);  // columns: X,value

// --- zeta tables ---
std::string zeta_table_to_csv(const ZetaTable& table);  // columns: J,zeta_squared
ZetaTable zeta_table_from_csv(const std::string& text);
std::string zeta_table_to_json(const ZetaTable& table);
ZetaTable zeta_table_from_json(const std::string& text);

// --- planar moments and verdicts ---
PlanarMoments moments_from_json(const std::string& text);
std::string moments_to_json(const PlanarMoments& moments);
std::string verdict_to_json(const DepthVerdict& verdict);

// --- comparison grids ---
std::string comparison_to_csv(const ComparisonGrid& grid);

// --- metrology ---
std::string sensitivity_csv(const PlanarMoments& moments, int phi_samples);

// --- pipeline records and reports ---
std::string records_to_csv(const std::vector<pipeline::MeasurementRecord>& records);
std::vector<pipeline::MeasurementRecord> records_from_csv(const std::string& text);
std::string generator_config_to_json(const pipeline::GeneratorConfig& config);
pipeline::GeneratorConfig generator_config_from_json(const std::string& text);
std::string report_to_json(const pipeline::PipelineReport& report);
std::string report_to_csv(const pipeline::PipelineReport& report);

/// Writes a complete run directory: records.csv, noise_records.csv, run.json.
void write_run_dir(const std::filesystem::path& dir, const pipeline::SyntheticRun& run,
                   bool force);
pipeline::SyntheticRun read_run_dir(const std::filesystem::path& dir);

// --- helpers ---
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content, bool force);

}  // namespace pqs::io
