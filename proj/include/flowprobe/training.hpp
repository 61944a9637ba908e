#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "flowprobe/datasets.hpp"
#include "flowprobe/mlp.hpp"

namespace flowprobe {

enum class Optimizer { sgd, adam };

std::string_view to_string(Optimizer optimizer) noexcept;
Optimizer parse_optimizer(std::string_view name);

struct TrainingConfig {
    Dataset dataset = Dataset::two_gaussians;
    DatasetParams data;
    std::size_t batch_size = 256;
    std::size_t steps = 4000;
    Optimizer optimizer = Optimizer::sgd;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{64, 64, 64};
    /// Steps averaged into each TrainingTrace entry.
    std::size_t log_interval = 100;
};

struct TrainingTrace {
    std::vector<double> interval_loss;
};

struct TrainingResult {
    MlpField field;
    TrainingTrace trace;
};

/// Squared distance between v(x_t, t) and x1 - x0 at x_t = t x1 + (1 - t) x0.
/// Goes through VectorField::evaluate, so it costs one NFE.
double fm_loss(const VectorField& field, std::span<const double> x0,
               std::span<const double> x1, double t, const Condition& c = {});

/// Minibatch SGD (or Adam, beta = (0.9, 0.999)) on the flow-matching regression
/// objective with t ~ U[0, 1].
/// Throws TrainingFailure naming the first step whose loss or weights went
/// non-finite. Single-threaded and deterministic for a given config.
TrainingResult train(const TrainingConfig& config);

}  // namespace flowprobe
