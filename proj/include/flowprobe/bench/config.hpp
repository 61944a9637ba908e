#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowprobe/adaptive.hpp"
#include "flowprobe/bench/corpus.hpp"
#include "flowprobe/solvers.hpp"

namespace flowprobe::bench {

enum class SolverKind { euler, ab2, rk45, adaptive };

std::string_view to_string(SolverKind kind) noexcept;
SolverKind parse_solver_kind(std::string_view name);

struct SolverConfig {
    SolverKind kind = SolverKind::euler;
    /// Unique within a config; the `solver` column of every report.
    std::string label;
    std::size_t steps = 0;  // euler, ab2
    Rk45Config rk45;        // rk45
    ScheduleParams schedule;  // adaptive
};

/// Label used when the config gives none: euler-50, ab2-10, rk45, adaptive.
std::string default_label(const SolverConfig& solver);

struct ExperimentConfig {
    std::vector<CorpusEntry> corpus;
    std::vector<SolverConfig> solvers;
    std::size_t runs_per_cell = 10;
    std::uint64_t seed = 0;
    double success_threshold = 1e-2;
    std::filesystem::path output_dir = "out";
    /// Repetitions per timed solve; the median is reported.
    std::size_t timing_repeats = 3;
    std::vector<double> epsilon_values;
    std::vector<double> dt_values;
    /// Probe settings the sweeps start from before overriding one parameter.
    ScheduleParams sweep_schedule;
    /// The document the config was parsed from, echoed into the report bundle.
    nlohmann::json source;
};

/// Throws ConfigError on any broken invariant: no solver, no field, zero runs,
/// duplicate field names or solver labels, or an invalid field or solver.
void validate(const ExperimentConfig& config);

/// Relative weight paths are resolved against `base_dir`. Generated families
/// are expanded here. Every failure surfaces as ConfigError naming the entry.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// `seed_override` replaces the document's seed before parsing, so it also
/// reseeds generated families that do not pin their own seed.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace flowprobe::bench
