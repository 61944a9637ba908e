#include "flowprobe/datasets.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

std::string_view to_string(Dataset dataset) noexcept {
    switch (dataset) {
        case Dataset::single_point: return "single-point";
        case Dataset::two_gaussians: return "two-gaussians";
        case Dataset::two_moons: return "two-moons";
    }
    return "unknown";
}

Dataset parse_dataset(std::string_view name) {
    for (auto d : {Dataset::single_point, Dataset::two_gaussians, Dataset::two_moons}) {
        if (to_string(d) == name) return d;
    }
    throw ContractViolation(fmt::format("unknown dataset '{}'", name));
}

StateVector sample_noise(std::size_t dimension, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    StateVector x(dimension);
    for (auto& v : x) v = normal(rng);
    return x;
}

StateVector sample_target(Dataset dataset, const DatasetParams& params, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (dataset) {
        case Dataset::single_point:
            return {params.point[0], params.point[1]};
        case Dataset::two_gaussians: {
            const auto& mean = unit(rng) < 0.5 ? params.mean_a : params.mean_b;
            const double a = normal(rng);
            const double b = normal(rng);
            return {mean[0] + params.sigma * a, mean[1] + params.sigma * b};
        }
        case Dataset::two_moons: {
            const bool upper = unit(rng) < 0.5;
            const double angle = std::numbers::pi * unit(rng);
            const double nx = params.moon_noise * normal(rng);
            const double ny = params.moon_noise * normal(rng);
            // Standard layout, recentred on the origin.
            if (upper) return {std::cos(angle) - 0.5 + nx, std::sin(angle) - 0.25 + ny};
            return {1.0 - std::cos(angle) - 0.5 + nx, 0.5 - std::sin(angle) - 0.25 + ny};
        }
    }
    throw ContractViolation("unsupported dataset");
}

std::pair<StateVector, StateVector> sample_pair(Dataset dataset, const DatasetParams& params,
                                                Rng& rng) {
    StateVector x0 = sample_noise(2, rng);
    StateVector x1 = sample_target(dataset, params, rng);
    return {std::move(x0), std::move(x1)};
}

}  // namespace flowprobe
