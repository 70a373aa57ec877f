#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cslab/experiments.hpp"
#include "cslab/field.hpp"
#include "cslab/test_function.hpp"

namespace cslab {

struct RunConfig {
  Scenario scenario;
  std::string output_dir;  // empty: the caller decides
  std::uint64_t seed = 0;
};

/// Parses and validates a JSON run configuration.
///
/// Keys left out fall back to the scenario preset (default_scenario), whose
/// base values are dt = 1e-3 and a clamp radius of two grid spacings.
/// Unknown keys are rejected with their full path. A single-field family
/// names a snapshot file, resolved against base_dir when relative.
RunConfig parse_config(std::string_view document, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// The JSON summary written by write_report.
std::string report_json(const ScenarioReport& report);
/// One sweep as CSV with the columns
/// scenario,member_id,R_or_t,value,reference_norm,ratio,resolution_tag.
std::string sweep_csv(const std::string& scenario, const SweepTable& table);
/// File name used for a sweep: <scenario>_<sweep>.csv with '/' mapped to '_'.
std::string sweep_file_name(const std::string& scenario, const SweepTable& table);

/// Writes report.json and one CSV per sweep into dir (created if needed).
/// Returns the written paths in write order.
std::vector<std::filesystem::path> write_report(const ScenarioReport& report, const std::filesystem::path& dir);

std::string property_report_json(const PropertyReport& report);

// Snapshot files: "CSLF", u32 version, u32 dim, u32 N, f64 L, f64 time, then
// N^3 complex values as interleaved f64 pairs, all little-endian, row-major.
inline constexpr std::uint32_t snapshot_version = 1;

std::string encode_snapshot(const Field& field);
Field decode_snapshot(std::string_view bytes);
void write_snapshot(const Field& field, const std::filesystem::path& path);
Field read_snapshot(const std::filesystem::path& path);

}  // namespace cslab
