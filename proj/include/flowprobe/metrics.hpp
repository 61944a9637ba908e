#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowprobe/solvers.hpp"

namespace flowprobe {

/// Relative Euclidean error ||x - x*|| / max(||x*||, 1).
double endpoint_error(std::span<const double> endpoint, std::span<const double> oracle);
double endpoint_error(const SolveReport& report, std::span<const double> oracle);

/// Default success threshold on the relative endpoint error.
inline constexpr double kDefaultSuccessThreshold = 1e-2;

/// Summary of a batch of runs of one solver on one field. Standard deviations
/// are sample (n - 1) deviations and are only present for two or more runs.
struct RunAggregate {
    std::string solver_name;
    std::size_t runs = 0;
    double mean_steps = 0.0;
    std::optional<double> stddev_steps;
    double mean_nfe = 0.0;
    std::optional<double> stddev_nfe;
    double mean_wall_time = 0.0;
    double p95_wall_time = 0.0;  // nearest rank
    double mean_error = 0.0;
    double success_rate = 0.0;   // fraction with error < threshold

    bool operator==(const RunAggregate&) const = default;
};

/// `oracles[i]` is the ground truth for `reports[i]`. Throws ContractViolation on
/// empty input or length mismatch.
RunAggregate aggregate(std::span<const SolveReport> reports,
                       std::span<const StateVector> oracles,
                       double success_threshold = kDefaultSuccessThreshold);

double mean(std::span<const double> values);
std::optional<double> sample_stddev(std::span<const double> values);
/// Nearest-rank percentile, q in (0, 1].
double percentile(std::vector<double> values, double q);

enum class DistanceKind { energy, sliced_wasserstein };

std::string_view to_string(DistanceKind kind) noexcept;

struct DistributionDistance {
    double value = 0.0;
    DistanceKind kind = DistanceKind::energy;
};

/// Number of random directions used by the sliced Wasserstein distance.
inline constexpr std::size_t kSlicedProjections = 128;
inline constexpr unsigned long long kSlicedSeed = 0x5eed5eedULL;

/// energy:   2 E|X - Y| - E|X - X'| - E|Y - Y'| over all ordered pairs, including
///           i = j (V-statistic), reported without a square root. Zero for
///           identical sets.
/// sliced:   mean over kSlicedProjections fixed-seed unit directions of the 1-D
///           Wasserstein-1 distance between the projected empirical measures.
DistributionDistance distribution_distance(std::span<const StateVector> a,
                                           std::span<const StateVector> b, DistanceKind kind);

}  // namespace flowprobe
