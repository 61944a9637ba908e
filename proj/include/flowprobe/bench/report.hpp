#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowprobe/bench/runner.hpp"

namespace flowprobe::bench {

struct ReportFormats {
    bool csv = true;
    bool json = true;
};

/// Parses a comma-separated list of "csv" and "json". Throws ConfigError.
ReportFormats parse_formats(std::string_view list);

inline constexpr std::string_view kCsvHeader =
    "run_id,solver,field,steps,nfe,solver_time_s,error,success,probe_similarity,scheduled_N";

/// One row per (solver, field, run), in bundle order. Absent values are empty
/// cells; success is 0 or 1.
std::string to_csv(const ReportBundle& bundle);

void to_json(nlohmann::json& j, const ReportBundle& bundle);
/// Throws SchemaError on a document that does not describe a bundle.
void from_json(const nlohmann::json& j, ReportBundle& bundle);

/// Copy of a serialized bundle without the timestamp and every wall-clock
/// measurement, for determinism comparisons.
nlohmann::json without_volatile_fields(nlohmann::json j);

/// Two-column whitespace-separated curves, one file per curve:
///   sweep_<parameter>_{steps,success,failure,error}.dat   value vs quantity
///   schedule_vs_curvature.dat                             |omega| vs mean scheduled N
/// Returns (file name, contents) pairs; nothing is returned for absent data.
std::vector<std::pair<std::string, std::string>> plot_data(const ReportBundle& bundle);

/// Writes results.csv, bundle.json and the plot-data files into `dir`,
/// creating it if needed. Throws Error naming the path on I/O failure.
std::vector<std::filesystem::path> emit_reports(const ReportBundle& bundle,
                                                const std::filesystem::path& dir,
                                                const ReportFormats& formats);

}  // namespace flowprobe::bench
