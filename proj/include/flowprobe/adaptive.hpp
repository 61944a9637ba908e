#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "flowprobe/solvers.hpp"
#include "flowprobe/vector_field.hpp"

namespace flowprobe {

/// Configuration of the lookahead probe and the similarity-to-steps map.
/// Defaults: epsilon 0.008, N in [2, 10] in increments of 2, probe horizon 0.5.
struct ScheduleParams {
    double epsilon = 0.008;
    double dt_probe = 0.5;
    std::size_t n_min = 2;
    std::size_t n_max = 10;
    std::size_t delta_n = 2;
};

/// Throws ContractViolation unless epsilon > 0, 0 < dt_probe < 1,
/// 2 <= n_min <= n_max and delta_n >= 1.
void validate(const ScheduleParams& params);

struct ProbeResult {
    Velocity v_start;
    StateVector x_probe;
    Velocity v_probe;
    double similarity = 0.0;
};

/// Velocities shorter than this make the cosine meaningless; similarity is
/// then reported as 0 so the scheduler picks a dense schedule.
inline constexpr double kDegenerateNorm = 1e-12;

/// Cosine of the angle between two velocities, clamped to [-1, 1], with the
/// degenerate-norm rule above.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Two evaluations: v_start at (x0, 0), then v_probe at
/// (x0 + dt_probe * v_start, dt_probe).
ProbeResult probe(const VectorField& field, std::span<const double> x0, const Condition& c,
                  const ScheduleParams& params);

/// N = clip(n_min + floor((1 - S) / epsilon) * delta_n, n_min, n_max).
std::size_t schedule_steps(double similarity, const ScheduleParams& params);

/// Probe once, schedule N, then either finish from the probe state with the
/// probe velocity (N = n_min, 2 evaluations in total) or restart from x0 and
/// run N Euler steps whose first step reuses v_start (N + 1 evaluations).
SolveReport adaptive_solve(const VectorField& field, std::span<const double> x0,
                           const Condition& c, const ScheduleParams& params);

/// One element of a probe-horizon sweep corpus. Without an oracle the sweep
/// computes one with reference_solve.
struct ProbeCase {
    std::shared_ptr<const VectorField> field;
    StateVector x0;
    Condition condition;
    std::optional<StateVector> oracle;
};

struct HorizonRow {
    double dt_probe = 0.0;
    double mean_steps = 0.0;
    double mean_error = 0.0;    // over runs that did not throw
    double failure_rate = 0.0;  // error >= threshold, or the solve threw
};

/// For each horizon, runs adaptive_solve over every case with dt_probe replaced
/// and reports one row. Cases may share a field instance; evaluation counts on
/// shared instances are not used here.
std::vector<HorizonRow> sweep_probe_horizon(std::span<const ProbeCase> corpus,
                                            std::span<const double> dt_values,
                                            const ScheduleParams& params_template,
                                            double success_threshold = 1e-2);

}  // namespace flowprobe
