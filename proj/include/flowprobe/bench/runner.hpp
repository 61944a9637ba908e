#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowprobe/bench/config.hpp"
#include "flowprobe/metrics.hpp"

namespace flowprobe::bench {

/// Builds the field for one corpus entry, loading weights for learned fields.
/// Failures become ConfigError naming the entry.
std::unique_ptr<VectorField> build_field(const CorpusEntry& entry);

/// Ground truth for one start: the closed form when the field has one,
/// reference_solve otherwise.
StateVector oracle_endpoint(const CorpusEntry& entry, const VectorField& field,
                            std::span<const double> x0);

SolveReport run_solver(const SolverConfig& solver, const VectorField& field,
                       std::span<const double> x0, const Condition& c);

/// One (solver, field, run). A run whose solve threw has `failure` set and
/// no steps, nfe, time or error.
struct RunRecord {
    std::size_t run_id = 0;
    std::string solver;
    std::string field;
    std::string x0_hash;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> nfe;
    std::optional<double> solver_time_s;
    std::optional<double> error;
    bool success = false;
    std::optional<double> probe_similarity;
    std::optional<std::size_t> scheduled_n;
    std::optional<std::string> failure;

    bool operator==(const RunRecord&) const = default;
};

struct CellResult {
    std::string field;
    std::string solver;
    /// Over the runs that completed; success_rate counts failed runs as
    /// unsuccessful. Absent when every run failed.
    std::optional<RunAggregate> aggregate;
    std::size_t failed_runs = 0;
    /// Time spent building the field and computing oracles for this field row.
    double field_setup_time_s = 0.0;
    double oracle_time_s = 0.0;
    std::vector<RunRecord> runs;

    bool operator==(const CellResult&) const = default;
};

struct SweepRow {
    double value = 0.0;
    double mean_steps = 0.0;
    std::optional<double> mean_solver_time_s;
    double mean_error = 0.0;
    double success_rate = 0.0;
    double failure_rate = 0.0;  // 1 - success_rate

    bool operator==(const SweepRow&) const = default;
};

struct SweepTable {
    std::string parameter;  // "epsilon" or "dt_probe"
    std::vector<SweepRow> rows;

    bool operator==(const SweepTable&) const = default;
};

/// Mean scheduled N of one adaptive cell against the field's turning rate |omega|.
struct SchedulePoint {
    std::string field;
    std::string solver;
    double curvature = 0.0;
    double mean_scheduled_n = 0.0;

    bool operator==(const SchedulePoint&) const = default;
};

struct ReportBundle {
    std::string tool_version;
    std::string timestamp;
    nlohmann::json config;
    std::vector<CellResult> cells;  // sorted by (field, solver)
    std::vector<SweepTable> sweeps;
    std::vector<SchedulePoint> schedule_vs_curvature;

    bool operator==(const ReportBundle&) const = default;
    /// Cells whose every run failed.
    std::size_t failed_cells() const;
};

struct RunOptions {
    /// Worker threads for cells. Timing is still per solve, but co-scheduled
    /// work inflates it; serial_timing forces one worker.
    std::size_t jobs = 1;
    bool serial_timing = false;
};

/// Runs every solver on every field for runs_per_cell paired starts: run r of
/// field row i starts from draw_start(seed, i, r) for every solver.
ReportBundle run_matrix(const ExperimentConfig& config, const RunOptions& options = {});

/// Adaptive solver (config.sweep_schedule with epsilon replaced) over the whole
/// corpus for each value. Needs at least two positive values.
SweepTable sweep_epsilon(const ExperimentConfig& config, std::span<const double> epsilon_values);

/// Delegates to sweep_probe_horizon; success_rate is 1 - failure rate. Values
/// must lie in (0, 1).
SweepTable sweep_horizon(const ExperimentConfig& config, std::span<const double> dt_values);

/// Header fields every bundle carries.
ReportBundle make_bundle(const ExperimentConfig& config);

}  // namespace flowprobe::bench
