#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowprobe/vector_field.hpp"

namespace flowprobe {

/// One point on a solve trajectory. `v` is the velocity the solver used from
/// this point; the terminal entry at t = 1 carries an empty `v` because
/// nothing is evaluated there.
struct StepRecord {
    double t = 0.0;
    StateVector x;
    Velocity v;
};

struct SolveReport {
    StateVector endpoint;
    std::size_t steps_taken = 0;
    std::uint64_t nfe = 0;
    std::vector<StepRecord> step_record;
    double wall_time = 0.0;  // seconds, monotonic clock
    std::string solver_name;
    // Set only by the adaptive probe solver.
    std::optional<double> probe_similarity;
    std::optional<std::size_t> scheduled_n;
};

struct Rk45Config {
    double atol = 1e-6;
    double rtol = 1e-3;
    double initial_step = 0.5;
    double min_step = 1e-12;
    double max_step = 1.0;
};

/// Throws ContractViolation unless tolerances > 0 and min <= initial <= max.
void validate(const Rk45Config& cfg);

/// Forward Euler on the uniform grid t_i = i / N. nfe = N.
SolveReport euler_solve(const VectorField& field, std::span<const double> x0,
                        const Condition& c, std::size_t n);

/// Two-step Adams-Bashforth, Euler bootstrap for the first step. nfe = N.
SolveReport ab2_solve(const VectorField& field, std::span<const double> x0,
                      const Condition& c, std::size_t n);

/// Dormand-Prince 5(4) with the classical tableau.
///
/// Error norm: RMS over components of err_i / (atol + rtol * max(|x_i|, |x_new_i|)).
/// Step update: h *= clamp(0.9 * err^(-1/5), 0.2, 5.0), and never grows right
/// after a rejection. The last stage of an accepted step is reused as the first
/// stage of the next (FSAL), so the first attempt costs 7 evaluations and every
/// later attempt, accepted or rejected, costs 6. Every evaluation, including
/// those of rejected attempts, is counted in nfe. The final step is shortened
/// to land on t = 1.
SolveReport rk45_solve(const VectorField& field, std::span<const double> x0,
                       const Condition& c, const Rk45Config& cfg);

/// Tolerance of the reference oracle.
inline constexpr double kReferenceTolerance = 1e-10;

/// Ground-truth endpoint for fields without a closed form: rk45_solve with
/// atol = rtol = 1e-10, initial step 1e-3 and minimum step 1e-14.
StateVector reference_solve(const VectorField& field, std::span<const double> x0,
                            const Condition& c);

}  // namespace flowprobe
