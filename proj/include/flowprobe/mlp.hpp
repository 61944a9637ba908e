#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flowprobe/vector_field.hpp"

namespace flowprobe {

/// One affine map `weight * a + bias`; weight is (out x in).
struct DenseLayer {
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
};

/// Fully connected network with tanh between layers and a linear output.
///
/// Input layout per sample is [state (d), t, condition (k)], so the first
/// layer has d + 1 + k columns and the last has d rows.
class Mlp {
public:
    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation from `seed`.
    Mlp(std::size_t state_dim, std::size_t cond_dim, const std::vector<std::size_t>& hidden,
        std::uint64_t seed);
    /// Adopts explicit layers. Throws SchemaError if the shapes do not chain.
    Mlp(std::size_t state_dim, std::size_t cond_dim, std::vector<DenseLayer> layers);

    std::size_t state_dim() const noexcept { return state_dim_; }
    std::size_t cond_dim() const noexcept { return cond_dim_; }
    std::size_t input_dim() const noexcept { return state_dim_ + 1 + cond_dim_; }
    std::size_t parameter_count() const noexcept;

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    /// Column-batched forward pass: inputs is (input_dim x batch).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

    void forward_one(std::span<const double> x, double t, std::span<const double> cond,
                     std::span<double> out) const;

    bool all_finite() const noexcept;

private:
    std::size_t state_dim_;
    std::size_t cond_dim_;
    std::vector<DenseLayer> layers_;
};

/// Gradient with the same layout as Mlp::layers().
using MlpGradient = std::vector<DenseLayer>;

/// Mean over columns of ||net(inputs) - targets||^2. When `grad` is non-null it
/// receives the analytic gradient of that mean with respect to every parameter.
double batch_fm_loss(const Mlp& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, MlpGradient* grad);

/// Packs (x, t, cond) into one input column.
Eigen::VectorXd pack_input(std::span<const double> x, double t, std::span<const double> cond);

/// A trained network exposed as a VectorField.
class MlpField final : public VectorField {
public:
    explicit MlpField(Mlp net);

    const Mlp& network() const noexcept { return net_; }
    std::unique_ptr<VectorField> clone() const override;

protected:
    void compute(std::span<const double> x, double t, const Condition& c,
                 std::span<double> out) const override;

private:
    Mlp net_;
};

}  // namespace flowprobe
