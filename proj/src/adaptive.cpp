#include "flowprobe/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"
#include "flowprobe/metrics.hpp"

namespace flowprobe {

void validate(const ScheduleParams& params) {
    if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
        throw ContractViolation("epsilon must be a positive finite number");
    }
    if (!(params.dt_probe > 0.0 && params.dt_probe < 1.0)) {
        throw ContractViolation("dt_probe must lie strictly inside (0, 1)");
    }
    if (params.n_min < 2) {
        throw ContractViolation("n_min must be >= 2: the probe already spends two evaluations");
    }
    if (params.n_min > params.n_max) throw ContractViolation("n_min must not exceed n_max");
    if (params.delta_n == 0) throw ContractViolation("delta_n must be >= 1");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("cosine_similarity: dimension mismatch");
    double dot = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (std::sqrt(aa) < kDegenerateNorm || std::sqrt(bb) < kDegenerateNorm) return 0.0;
    // One square root of the product keeps S exactly 1 for identical vectors.
    return std::clamp(dot / std::sqrt(aa * bb), -1.0, 1.0);
}

ProbeResult probe(const VectorField& field, std::span<const double> x0, const Condition& c,
                  const ScheduleParams& params) {
    validate(params);
    if (!all_finite(x0)) throw ContractViolation("probe: x0 has non-finite components");
    ProbeResult result;
    result.v_start = field.evaluate(x0, 0.0, c);
    if (!all_finite(result.v_start)) throw NumericalBlowup("probe", 0);
    result.x_probe.resize(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        result.x_probe[i] = x0[i] + result.v_start[i] * params.dt_probe;
    }
    if (!all_finite(result.x_probe)) throw NumericalBlowup("probe", 0);
    result.v_probe = field.evaluate(result.x_probe, params.dt_probe, c);
    if (!all_finite(result.v_probe)) throw NumericalBlowup("probe", 1);
    result.similarity = cosine_similarity(result.v_start, result.v_probe);
    return result;
}

std::size_t schedule_steps(double similarity, const ScheduleParams& params) {
    validate(params);
    if (!(similarity >= -1.0 && similarity <= 1.0)) {
        throw ContractViolation(fmt::format("similarity {} outside [-1, 1]", similarity));
    }
    // In double: floor((1 - S) / eps) reaches 2e12 for eps = 1e-12.
    const double raw = static_cast<double>(params.n_min) +
                       std::floor((1.0 - similarity) / params.epsilon) *
                           static_cast<double>(params.delta_n);
    const double clipped =
        std::clamp(raw, static_cast<double>(params.n_min), static_cast<double>(params.n_max));
    return static_cast<std::size_t>(clipped);
}

SolveReport adaptive_solve(const VectorField& field, std::span<const double> x0,
                           const Condition& c, const ScheduleParams& params) {
    validate(params);
    if (x0.size() != field.dimension()) {
        throw ContractViolation(fmt::format("x0 has dimension {}, field expects {}", x0.size(),
                                            field.dimension()));
    }
    const auto start = std::chrono::steady_clock::now();

    ProbeResult pr = probe(field, x0, c, params);
    const std::size_t n = schedule_steps(pr.similarity, params);

    SolveReport report;
    report.solver_name = "adaptive";
    report.probe_similarity = pr.similarity;
    report.scheduled_n = n;
    report.steps_taken = n;
    report.nfe = 2;

    if (n == params.n_min) {
        // Straight enough: finish from the probe state with the probe velocity.
        StateVector x1(x0.size());
        const double remaining = 1.0 - params.dt_probe;
        for (std::size_t i = 0; i < x1.size(); ++i) {
            x1[i] = pr.x_probe[i] + pr.v_probe[i] * remaining;
        }
        if (!all_finite(x1)) throw NumericalBlowup("adaptive", 1);
        report.step_record.push_back({0.0, StateVector(x0.begin(), x0.end()), pr.v_start});
        report.step_record.push_back({params.dt_probe, pr.x_probe, pr.v_probe});
        report.step_record.push_back({1.0, x1, {}});
        report.endpoint = std::move(x1);
    } else {
        // Dense route restarts from x0; the first Euler step reuses v_start and
        // the probe state and velocity are dropped.
        report.step_record.reserve(n + 1);
        const double dt = 1.0 / static_cast<double>(n);
        StateVector x(x0.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + pr.v_start[i] * dt;
        report.step_record.push_back({0.0, StateVector(x0.begin(), x0.end()), pr.v_start});
        if (!all_finite(x)) throw NumericalBlowup("adaptive", 1);
        for (std::size_t step = 1; step < n; ++step) {
            const double t = static_cast<double>(step) * dt;
            Velocity v = field.evaluate(x, t, c);
            ++report.nfe;
            StateVector next(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + v[i] * dt;
            report.step_record.push_back({t, std::move(x), std::move(v)});
            if (!all_finite(next)) throw NumericalBlowup("adaptive", step + 1);
            x = std::move(next);
        }
        report.step_record.push_back({1.0, x, {}});
        report.endpoint = std::move(x);
    }
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<HorizonRow> sweep_probe_horizon(std::span<const ProbeCase> corpus,
                                            std::span<const double> dt_values,
                                            const ScheduleParams& params_template,
                                            double success_threshold) {
    if (corpus.empty()) throw ContractViolation("sweep_probe_horizon: empty corpus");
    if (dt_values.empty()) throw ContractViolation("sweep_probe_horizon: no horizons");

    std::vector<StateVector> oracles;
    oracles.reserve(corpus.size());
    for (const auto& pc : corpus) {
        if (!pc.field) throw ContractViolation("sweep_probe_horizon: case without a field");
        oracles.push_back(pc.oracle ? *pc.oracle : reference_solve(*pc.field, pc.x0, pc.condition));
    }

    std::vector<HorizonRow> rows;
    rows.reserve(dt_values.size());
    for (double dt : dt_values) {
        ScheduleParams params = params_template;
        params.dt_probe = dt;
        validate(params);
        double steps_sum = 0.0;
        double error_sum = 0.0;
        std::size_t completed = 0;
        std::size_t failures = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto& pc = corpus[i];
            try {
                const SolveReport r = adaptive_solve(*pc.field, pc.x0, pc.condition, params);
                const double err = endpoint_error(r, oracles[i]);
                steps_sum += static_cast<double>(r.steps_taken);
                error_sum += err;
                ++completed;
                if (!(err < success_threshold)) ++failures;
            } catch (const NumericalBlowup&) {
                ++failures;
            }
        }
        HorizonRow row;
        row.dt_probe = dt;
        row.mean_steps = completed ? steps_sum / static_cast<double>(completed) : 0.0;
        row.mean_error = completed ? error_sum / static_cast<double>(completed) : 0.0;
        row.failure_rate = static_cast<double>(failures) / static_cast<double>(corpus.size());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace flowprobe
