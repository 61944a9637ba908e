#include "flowprobe/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "flowprobe/analytic_fields.hpp"
#include "flowprobe/errors.hpp"
#include "flowprobe/mlp.hpp"
#include "flowprobe/version.hpp"
#include "flowprobe/weights_io.hpp"

namespace flowprobe::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                       tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
}

/// Runs the solve `repeats` times and reports the median wall time. The solves
/// are deterministic, so every other field comes from the first one.
SolveReport timed_solve(const SolverConfig& solver, const VectorField& field,
                        std::span<const double> x0, const Condition& c, std::size_t repeats) {
    SolveReport first = run_solver(solver, field, x0, c);
    std::vector<double> times{first.wall_time};
    for (std::size_t k = 1; k < repeats; ++k) {
        times.push_back(run_solver(solver, field, x0, c).wall_time);
    }
    std::sort(times.begin(), times.end());
    first.wall_time = times[(times.size() - 1) / 2];
    return first;
}

/// Everything a field row needs before any solver runs.
struct FieldRow {
    std::unique_ptr<VectorField> field;
    std::vector<StateVector> starts;
    std::vector<std::optional<StateVector>> oracles;
    std::vector<std::string> oracle_failures;
    double setup_time = 0.0;
    double oracle_time = 0.0;
};

FieldRow prepare_row(const ExperimentConfig& config, std::size_t index) {
    const auto& entry = config.corpus[index];
    FieldRow row;
    auto start = Clock::now();
    row.field = build_field(entry);
    row.setup_time = seconds_since(start);

    start = Clock::now();
    for (std::size_t r = 0; r < config.runs_per_cell; ++r) {
        row.starts.push_back(draw_start(config.seed, index, r, row.field->dimension()));
        try {
            row.oracles.emplace_back(oracle_endpoint(entry, *row.field, row.starts.back()));
            row.oracle_failures.emplace_back();
        } catch (const std::exception& e) {
            row.oracles.emplace_back();
            row.oracle_failures.emplace_back(fmt::format("oracle: {}", e.what()));
        }
    }
    row.oracle_time = seconds_since(start);
    return row;
}

CellResult run_cell(const ExperimentConfig& config, const FieldRow& row, const CorpusEntry& entry,
                    const SolverConfig& solver) {
    CellResult cell;
    cell.field = entry.name;
    cell.solver = solver.label;
    cell.field_setup_time_s = row.setup_time;
    cell.oracle_time_s = row.oracle_time;

    // Private instance: evaluation counters are never shared between workers.
    const auto field = row.field->clone();
    std::vector<SolveReport> reports;
    std::vector<StateVector> oracles;
    std::size_t successes = 0;
    for (std::size_t r = 0; r < config.runs_per_cell; ++r) {
        RunRecord rec;
        rec.run_id = r;
        rec.solver = solver.label;
        rec.field = entry.name;
        rec.x0_hash = hash_state(row.starts[r]);
        if (!row.oracles[r]) {
            rec.failure = row.oracle_failures[r];
        } else {
            try {
                SolveReport rep = timed_solve(solver, *field, row.starts[r], entry.condition,
                                              config.timing_repeats);
                rec.steps = rep.steps_taken;
                rec.nfe = rep.nfe;
                rec.solver_time_s = rep.wall_time;
                rec.error = endpoint_error(rep, *row.oracles[r]);
                rec.success = *rec.error < config.success_threshold;
                rec.probe_similarity = rep.probe_similarity;
                rec.scheduled_n = rep.scheduled_n;
                if (rec.success) ++successes;
                rep.solver_name = solver.label;
                reports.push_back(std::move(rep));
                oracles.push_back(*row.oracles[r]);
            } catch (const std::exception& e) {
                rec.failure = e.what();
            }
        }
        if (rec.failure) ++cell.failed_runs;
        cell.runs.push_back(std::move(rec));
    }
    if (!reports.empty()) {
        cell.aggregate = aggregate(reports, oracles, config.success_threshold);
        cell.aggregate->success_rate =
            static_cast<double>(successes) / static_cast<double>(config.runs_per_cell);
    }
    return cell;
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> workers;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double field_curvature(const FieldSpec& spec) {
    return std::abs(spec.omega);
}

bool has_curvature_parameter(const FieldSpec& spec) {
    return spec.kind == FieldKind::rotation || spec.kind == FieldKind::piecewise_curvature;
}

struct PreparedCorpus {
    std::vector<std::shared_ptr<const VectorField>> fields;
    std::vector<std::vector<StateVector>> starts;
    std::vector<std::vector<StateVector>> oracles;
};

PreparedCorpus prepare_corpus(const ExperimentConfig& config) {
    PreparedCorpus pc;
    for (std::size_t i = 0; i < config.corpus.size(); ++i) {
        const auto& entry = config.corpus[i];
        std::shared_ptr<const VectorField> field = build_field(entry);
        std::vector<StateVector> starts;
        std::vector<StateVector> oracles;
        for (std::size_t r = 0; r < config.runs_per_cell; ++r) {
            starts.push_back(draw_start(config.seed, i, r, field->dimension()));
            oracles.push_back(oracle_endpoint(entry, *field, starts.back()));
        }
        pc.fields.push_back(std::move(field));
        pc.starts.push_back(std::move(starts));
        pc.oracles.push_back(std::move(oracles));
    }
    return pc;
}

}  // namespace

std::unique_ptr<VectorField> build_field(const CorpusEntry& entry) {
    try {
        if (entry.spec.kind == FieldKind::learned) {
            return std::make_unique<MlpField>(load_weights_file(entry.spec.weights));
        }
        return make_analytic_field(entry.spec);
    } catch (const Error& e) {
        throw ConfigError(fmt::format("field '{}': {}", entry.name, e.what()));
    }
}

StateVector oracle_endpoint(const CorpusEntry& entry, const VectorField& field,
                            std::span<const double> x0) {
    if (entry.spec.kind == FieldKind::learned) return reference_solve(field, x0, entry.condition);
    return exact_endpoint(entry.spec, x0);
}

SolveReport run_solver(const SolverConfig& solver, const VectorField& field,
                       std::span<const double> x0, const Condition& c) {
    switch (solver.kind) {
        case SolverKind::euler: return euler_solve(field, x0, c, solver.steps);
        case SolverKind::ab2: return ab2_solve(field, x0, c, solver.steps);
        case SolverKind::rk45: return rk45_solve(field, x0, c, solver.rk45);
        case SolverKind::adaptive: return adaptive_solve(field, x0, c, solver.schedule);
    }
    throw ContractViolation("unknown solver kind");
}

std::size_t ReportBundle::failed_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) {
        return !c.runs.empty() && c.failed_runs == c.runs.size();
    }));
}

ReportBundle make_bundle(const ExperimentConfig& config) {
    ReportBundle b;
    b.tool_version = std::string(kToolVersion);
    b.timestamp = utc_timestamp();
    b.config = config.source;
    return b;
}

ReportBundle run_matrix(const ExperimentConfig& config, const RunOptions& options) {
    validate(config);
    std::vector<FieldRow> rows;
    rows.reserve(config.corpus.size());
    for (std::size_t i = 0; i < config.corpus.size(); ++i) rows.push_back(prepare_row(config, i));

    const std::size_t n_solvers = config.solvers.size();
    std::vector<CellResult> cells(config.corpus.size() * n_solvers);
    parallel_for(cells.size(), options.serial_timing ? 1 : options.jobs, [&](std::size_t k) {
        const std::size_t i = k / n_solvers;
        cells[k] = run_cell(config, rows[i], config.corpus[i], config.solvers[k % n_solvers]);
    });
    std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
        return std::tie(a.field, a.solver) < std::tie(b.field, b.solver);
    });

    ReportBundle bundle = make_bundle(config);
    for (std::size_t i = 0; i < config.corpus.size(); ++i) {
        const auto& entry = config.corpus[i];
        if (!has_curvature_parameter(entry.spec)) continue;
        for (const auto& solver : config.solvers) {
            if (solver.kind != SolverKind::adaptive) continue;
            const auto it = std::find_if(cells.begin(), cells.end(), [&](const CellResult& c) {
                return c.field == entry.name && c.solver == solver.label;
            });
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& r : it->runs) {
                if (r.scheduled_n) {
                    sum += static_cast<double>(*r.scheduled_n);
                    ++n;
                }
            }
            if (n > 0) {
                bundle.schedule_vs_curvature.push_back(
                    {entry.name, solver.label, field_curvature(entry.spec),
                     sum / static_cast<double>(n)});
            }
        }
    }
    std::sort(bundle.schedule_vs_curvature.begin(), bundle.schedule_vs_curvature.end(),
              [](const SchedulePoint& a, const SchedulePoint& b) {
                  return std::tie(a.field, a.solver) < std::tie(b.field, b.solver);
              });
    bundle.cells = std::move(cells);
    return bundle;
}

SweepTable sweep_epsilon(const ExperimentConfig& config, std::span<const double> epsilon_values) {
    if (epsilon_values.size() < 2) throw ContractViolation("epsilon sweep needs at least two values");
    for (double e : epsilon_values) {
        if (!(e > 0.0)) throw ContractViolation("epsilon values must be positive");
    }
    validate(config);
    const PreparedCorpus pc = prepare_corpus(config);

    SweepTable table;
    table.parameter = "epsilon";
    for (double eps : epsilon_values) {
        SolverConfig solver;
        solver.kind = SolverKind::adaptive;
        solver.schedule = config.sweep_schedule;
        solver.schedule.epsilon = eps;

        std::vector<double> steps;
        std::vector<double> times;
        std::vector<double> errors;
        std::size_t successes = 0;
        std::size_t total = 0;
        for (std::size_t i = 0; i < pc.fields.size(); ++i) {
            const auto& cond = config.corpus[i].condition;
            for (std::size_t r = 0; r < pc.starts[i].size(); ++r) {
                ++total;
                try {
                    const SolveReport rep = timed_solve(solver, *pc.fields[i], pc.starts[i][r],
                                                        cond, config.timing_repeats);
                    const double err = endpoint_error(rep, pc.oracles[i][r]);
                    steps.push_back(static_cast<double>(rep.steps_taken));
                    times.push_back(rep.wall_time);
                    errors.push_back(err);
                    if (err < config.success_threshold) ++successes;
                } catch (const Error&) {
                    // Counted as unsuccessful.
                }
            }
        }
        if (steps.empty()) throw Error(fmt::format("every run failed at epsilon = {}", eps));
        SweepRow row;
        row.value = eps;
        row.mean_steps = mean(steps);
        row.mean_solver_time_s = mean(times);
        row.mean_error = mean(errors);
        row.success_rate = static_cast<double>(successes) / static_cast<double>(total);
        row.failure_rate = 1.0 - row.success_rate;
        table.rows.push_back(row);
    }
    return table;
}

SweepTable sweep_horizon(const ExperimentConfig& config, std::span<const double> dt_values) {
    for (double dt : dt_values) {
        if (!(dt > 0.0 && dt < 1.0)) throw ContractViolation("dt_probe values must lie in (0, 1)");
    }
    validate(config);
    const PreparedCorpus pc = prepare_corpus(config);
    std::vector<ProbeCase> cases;
    for (std::size_t i = 0; i < pc.fields.size(); ++i) {
        for (std::size_t r = 0; r < pc.starts[i].size(); ++r) {
            cases.push_back({pc.fields[i], pc.starts[i][r], config.corpus[i].condition,
                             pc.oracles[i][r]});
        }
    }
    const auto rows =
        sweep_probe_horizon(cases, dt_values, config.sweep_schedule, config.success_threshold);

    SweepTable table;
    table.parameter = "dt_probe";
    for (const auto& h : rows) {
        SweepRow row;
        row.value = h.dt_probe;
        row.mean_steps = h.mean_steps;
        row.mean_error = h.mean_error;
        row.success_rate = 1.0 - h.failure_rate;
        row.failure_rate = h.failure_rate;
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace flowprobe::bench
