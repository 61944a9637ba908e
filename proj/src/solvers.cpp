#include "flowprobe/solvers.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_start(const VectorField& field, std::span<const double> x0) {
    if (x0.size() != field.dimension()) {
        throw ContractViolation(fmt::format("x0 has dimension {}, field expects {}", x0.size(),
                                            field.dimension()));
    }
    if (!all_finite(x0)) throw ContractViolation("x0 has non-finite components");
}

}  // namespace

void validate(const Rk45Config& cfg) {
    if (!(cfg.atol > 0.0 && cfg.rtol > 0.0)) {
        throw ContractViolation("rk45 tolerances must be positive");
    }
    if (!(cfg.min_step > 0.0 && cfg.min_step <= cfg.initial_step &&
          cfg.initial_step <= cfg.max_step)) {
        throw ContractViolation("rk45 steps must satisfy 0 < min <= initial <= max");
    }
}

SolveReport euler_solve(const VectorField& field, std::span<const double> x0, const Condition& c,
                        std::size_t n) {
    if (n == 0) throw ContractViolation("euler_solve needs N >= 1");
    check_start(field, x0);
    const auto start = Clock::now();

    SolveReport report;
    report.solver_name = "euler";
    report.step_record.reserve(n + 1);
    const double dt = 1.0 / static_cast<double>(n);
    StateVector x(x0.begin(), x0.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        Velocity v = field.evaluate(x, t, c);
        ++report.nfe;
        StateVector next(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) next[j] = x[j] + dt * v[j];
        report.step_record.push_back({t, std::move(x), std::move(v)});
        if (!all_finite(next)) throw NumericalBlowup("euler", i + 1);
        x = std::move(next);
    }
    report.step_record.push_back({1.0, x, {}});
    report.endpoint = std::move(x);
    report.steps_taken = n;
    report.wall_time = seconds_since(start);
    return report;
}

SolveReport ab2_solve(const VectorField& field, std::span<const double> x0, const Condition& c,
                      std::size_t n) {
    if (n < 2) throw ContractViolation("ab2_solve needs N >= 2");
    check_start(field, x0);
    const auto start = Clock::now();

    SolveReport report;
    report.solver_name = "ab2";
    report.step_record.reserve(n + 1);
    const double dt = 1.0 / static_cast<double>(n);
    StateVector x(x0.begin(), x0.end());
    Velocity previous;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        Velocity v = field.evaluate(x, t, c);
        ++report.nfe;
        StateVector next(x.size());
        if (i == 0) {
            for (std::size_t j = 0; j < x.size(); ++j) next[j] = x[j] + dt * v[j];
        } else {
            for (std::size_t j = 0; j < x.size(); ++j) {
                next[j] = x[j] + dt * (1.5 * v[j] - 0.5 * previous[j]);
            }
        }
        report.step_record.push_back({t, std::move(x), v});
        if (!all_finite(next)) throw NumericalBlowup("ab2", i + 1);
        previous = std::move(v);
        x = std::move(next);
    }
    report.step_record.push_back({1.0, x, {}});
    report.endpoint = std::move(x);
    report.steps_taken = n;
    report.wall_time = seconds_since(start);
    return report;
}

namespace {

// Dormand & Prince (1980), RK5(4)7M.
constexpr std::array<double, 7> kNodes{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Fifth-order weights minus embedded fourth-order weights.
constexpr std::array<double, 7> kErr{71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                     -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

}  // namespace

SolveReport rk45_solve(const VectorField& field, std::span<const double> x0, const Condition& c,
                       const Rk45Config& cfg) {
    validate(cfg);
    check_start(field, x0);
    const auto start = Clock::now();
    const std::size_t dim = x0.size();

    SolveReport report;
    report.solver_name = "rk45";
    StateVector x(x0.begin(), x0.end());
    double t = 0.0;
    double h = cfg.initial_step;
    std::array<Velocity, 7> k;
    k[0] = field.evaluate(x, t, c);
    ++report.nfe;
    StateVector stage(dim);
    StateVector next(dim);
    bool just_rejected = false;
    std::size_t attempts = 0;

    while (t < 1.0) {
        ++attempts;
        const bool last = t + h >= 1.0;
        if (last) h = 1.0 - t;

        for (std::size_t s = 1; s < 7; ++s) {
            for (std::size_t j = 0; j < dim; ++j) {
                double acc = 0.0;
                for (std::size_t m = 0; m < s; ++m) acc += kA[s][m] * k[m][j];
                stage[j] = x[j] + h * acc;
            }
            if (!all_finite(stage)) throw NumericalBlowup("rk45", attempts);
            k[s] = field.evaluate(stage, std::min(1.0, t + kNodes[s] * h), c);
            ++report.nfe;
        }
        // Stage 7 is evaluated at the fifth-order solution.
        next = stage;

        double err_sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double e = 0.0;
            for (std::size_t m = 0; m < 7; ++m) e += kErr[m] * k[m][j];
            const double scale = cfg.atol + cfg.rtol * std::max(std::abs(x[j]), std::abs(next[j]));
            const double r = h * e / scale;
            err_sq += r * r;
        }
        const double err = std::sqrt(err_sq / static_cast<double>(dim));
        if (!std::isfinite(err)) throw NumericalBlowup("rk45", attempts);

        double factor = err == 0.0 ? kMaxFactor : kSafety * std::pow(err, -0.2);
        factor = std::clamp(factor, kMinFactor, kMaxFactor);

        if (err <= 1.0) {
            report.step_record.push_back({t, x, k[0]});
            t = last ? 1.0 : t + h;
            x = next;
            k[0] = std::move(k[6]);
            ++report.steps_taken;
            if (just_rejected) factor = std::min(factor, 1.0);
            just_rejected = false;
            h = std::min(h * factor, cfg.max_step);
        } else {
            just_rejected = true;
            h *= factor;
            if (h < cfg.min_step) throw StiffnessError(t, h);
        }
    }
    report.step_record.push_back({1.0, x, {}});
    report.endpoint = std::move(x);
    report.wall_time = seconds_since(start);
    return report;
}

StateVector reference_solve(const VectorField& field, std::span<const double> x0,
                            const Condition& c) {
    Rk45Config cfg;
    cfg.atol = kReferenceTolerance;
    cfg.rtol = kReferenceTolerance;
    cfg.initial_step = 1e-3;
    cfg.min_step = 1e-14;
    cfg.max_step = 1.0;
    return rk45_solve(field, x0, c, cfg).endpoint;
}

}  // namespace flowprobe
