#pragma once

#include <array>
#include <random>
#include <string_view>
#include <utility>

#include "flowprobe/vector_field.hpp"

namespace flowprobe {

using Rng = std::mt19937_64;

enum class Dataset { single_point, two_gaussians, two_moons };

std::string_view to_string(Dataset dataset) noexcept;
Dataset parse_dataset(std::string_view name);

/// 2-D target distributions. Defaults are what the tests and CLI use.
struct DatasetParams {
    std::array<double, 2> point{3.0, 3.0};
    std::array<double, 2> mean_a{-2.0, 0.0};
    std::array<double, 2> mean_b{2.0, 0.0};
    double sigma = 0.5;
    double moon_noise = 0.05;
};

/// x0 ~ N(0, I_2), x1 ~ target. Independent coupling.
std::pair<StateVector, StateVector> sample_pair(Dataset dataset, const DatasetParams& params,
                                                Rng& rng);

StateVector sample_target(Dataset dataset, const DatasetParams& params, Rng& rng);
StateVector sample_noise(std::size_t dimension, Rng& rng);

}  // namespace flowprobe
