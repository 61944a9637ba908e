#include "flowprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double endpoint_error(std::span<const double> endpoint, std::span<const double> oracle) {
    if (endpoint.size() != oracle.size()) {
        throw ContractViolation(fmt::format("endpoint has dimension {}, oracle {}",
                                            endpoint.size(), oracle.size()));
    }
    return distance(endpoint, oracle) / std::max(norm(oracle), 1.0);
}

double endpoint_error(const SolveReport& report, std::span<const double> oracle) {
    return endpoint_error(report.endpoint, oracle);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw ContractViolation("mean of an empty set");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::optional<double> sample_stddev(std::span<const double> values) {
    if (values.size() < 2) return std::nullopt;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ContractViolation("percentile of an empty set");
    if (!(q > 0.0 && q <= 1.0)) throw ContractViolation("percentile q must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

RunAggregate aggregate(std::span<const SolveReport> reports, std::span<const StateVector> oracles,
                       double success_threshold) {
    if (reports.empty()) throw ContractViolation("aggregate needs at least one run");
    if (reports.size() != oracles.size()) {
        throw ContractViolation("aggregate: reports and oracles differ in length");
    }
    const std::size_t n = reports.size();
    std::vector<double> steps(n);
    std::vector<double> nfe(n);
    std::vector<double> times(n);
    std::vector<double> errors(n);
    std::size_t successes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        steps[i] = static_cast<double>(reports[i].steps_taken);
        nfe[i] = static_cast<double>(reports[i].nfe);
        times[i] = reports[i].wall_time;
        errors[i] = endpoint_error(reports[i], oracles[i]);
        if (errors[i] < success_threshold) ++successes;
    }
    // Sorted copies make the sums independent of run order.
    for (auto* v : {&steps, &nfe, &times, &errors}) std::sort(v->begin(), v->end());

    RunAggregate agg;
    agg.solver_name = reports.front().solver_name;
    agg.runs = n;
    agg.mean_steps = mean(steps);
    agg.stddev_steps = sample_stddev(steps);
    agg.mean_nfe = mean(nfe);
    agg.stddev_nfe = sample_stddev(nfe);
    agg.mean_wall_time = mean(times);
    agg.p95_wall_time = percentile(times, 0.95);
    agg.mean_error = mean(errors);
    agg.success_rate = static_cast<double>(successes) / static_cast<double>(n);
    return agg;
}

std::string_view to_string(DistanceKind kind) noexcept {
    return kind == DistanceKind::energy ? "energy-distance" : "sliced-wasserstein";
}

namespace {

double mean_pairwise(std::span<const StateVector> a, std::span<const StateVector> b) {
    double s = 0.0;
    for (const auto& x : a) {
        for (const auto& y : b) s += distance(x, y);
    }
    return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

// W1 between two 1-D empirical measures: integral of |F_a - F_b|.
double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double wa = 1.0 / static_cast<double>(a.size());
    const double wb = 1.0 / static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double fa = 0.0;
    double fb = 0.0;
    double prev = std::min(a.front(), b.front());
    double total = 0.0;
    while (i < a.size() || j < b.size()) {
        const double next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
        total += std::abs(fa - fb) * (next - prev);
        prev = next;
        while (i < a.size() && a[i] == next) { fa += wa; ++i; }
        while (j < b.size() && b[j] == next) { fb += wb; ++j; }
    }
    return total;
}

}  // namespace

DistributionDistance distribution_distance(std::span<const StateVector> a,
                                           std::span<const StateVector> b, DistanceKind kind) {
    if (a.empty() || b.empty()) throw ContractViolation("distribution_distance: empty sample set");
    const std::size_t dim = a.front().size();
    auto same_dim = [dim](const StateVector& v) { return v.size() == dim; };
    if (!std::all_of(a.begin(), a.end(), same_dim) || !std::all_of(b.begin(), b.end(), same_dim)) {
        throw ContractViolation("distribution_distance: dimension mismatch");
    }

    DistributionDistance out;
    out.kind = kind;
    if (kind == DistanceKind::energy) {
        out.value = 2.0 * mean_pairwise(a, b) - mean_pairwise(a, a) - mean_pairwise(b, b);
        // The V-statistic is a squared distance between characteristic functions;
        // cancellation can leave a tiny negative residue.
        out.value = std::max(out.value, 0.0);
        return out;
    }

    std::mt19937_64 rng(kSlicedSeed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> dir(dim);
    double total = 0.0;
    for (std::size_t p = 0; p < kSlicedProjections; ++p) {
        double len = 0.0;
        do {
            for (auto& d : dir) d = normal(rng);
            len = norm(dir);
        } while (len == 0.0);
        for (auto& d : dir) d /= len;
        auto project = [&dir](std::span<const StateVector> set) {
            std::vector<double> out;
            out.reserve(set.size());
            for (const auto& x : set) out.push_back(std::inner_product(x.begin(), x.end(), dir.begin(), 0.0));
            return out;
        };
        total += wasserstein_1d(project(a), project(b));
    }
    out.value = total / static_cast<double>(kSlicedProjections);
    return out;
}

}  // namespace flowprobe
