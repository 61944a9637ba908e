#include "flowprobe/mlp.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

Mlp::Mlp(std::size_t state_dim, std::size_t cond_dim, const std::vector<std::size_t>& hidden,
         std::uint64_t seed)
    : state_dim_(state_dim), cond_dim_(cond_dim) {
    if (state_dim == 0) throw ContractViolation("network state dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> widths{input_dim()};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(state_dim);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(widths[l]);
        const auto fan_out = static_cast<Eigen::Index>(widths[l + 1]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
        // Fill in a fixed order so the seed alone determines the weights.
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
        }
        for (Eigen::Index r = 0; r < fan_out; ++r) layer.bias(r) = dist(rng);
        layers_.push_back(std::move(layer));
    }
}

Mlp::Mlp(std::size_t state_dim, std::size_t cond_dim, std::vector<DenseLayer> layers)
    : state_dim_(state_dim), cond_dim_(cond_dim), layers_(std::move(layers)) {
    if (state_dim == 0) throw SchemaError("network state dimension must be >= 1");
    if (layers_.empty()) throw SchemaError("network has no layers");
    auto expected_in = static_cast<Eigen::Index>(input_dim());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weight.cols() != expected_in) {
            throw SchemaError(fmt::format("layer {} expects {} inputs, previous layer gives {}", l,
                                          layer.weight.cols(), expected_in));
        }
        if (layer.bias.size() != layer.weight.rows()) {
            throw SchemaError(fmt::format("layer {} bias length {} != output width {}", l,
                                          layer.bias.size(), layer.weight.rows()));
        }
        expected_in = layer.weight.rows();
    }
    if (expected_in != static_cast<Eigen::Index>(state_dim)) {
        throw SchemaError(fmt::format("network output width {} != state dimension {}",
                                      expected_in, state_dim));
    }
}

std::size_t Mlp::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    }
    return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = layers_[l].weight * a;
        z.colwise() += layers_[l].bias;
        a = (l + 1 < layers_.size()) ? Eigen::MatrixXd(z.array().tanh()) : std::move(z);
    }
    return a;
}

Eigen::VectorXd pack_input(std::span<const double> x, double t, std::span<const double> cond) {
    Eigen::VectorXd in(static_cast<Eigen::Index>(x.size() + 1 + cond.size()));
    Eigen::Index i = 0;
    for (double v : x) in(i++) = v;
    in(i++) = t;
    for (double v : cond) in(i++) = v;
    return in;
}

void Mlp::forward_one(std::span<const double> x, double t, std::span<const double> cond,
                      std::span<double> out) const {
    Eigen::VectorXd a = pack_input(x, t, cond);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::VectorXd z = layers_[l].weight * a + layers_[l].bias;
        a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.array().tanh()) : std::move(z);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a(static_cast<Eigen::Index>(i));
}

bool Mlp::all_finite() const noexcept {
    for (const auto& layer : layers_) {
        if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    }
    return true;
}

double batch_fm_loss(const Mlp& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, MlpGradient* grad) {
    const auto& layers = net.layers();
    const std::size_t depth = layers.size();
    const double batch = static_cast<double>(inputs.cols());

    // activations[l] feeds layer l; the final entry is the network output.
    std::vector<Eigen::MatrixXd> activations;
    activations.reserve(depth + 1);
    activations.push_back(inputs);
    for (std::size_t l = 0; l < depth; ++l) {
        Eigen::MatrixXd z = layers[l].weight * activations.back();
        z.colwise() += layers[l].bias;
        if (l + 1 < depth) z = z.array().tanh();
        activations.push_back(std::move(z));
    }
    const Eigen::MatrixXd residual = activations.back() - targets;
    const double loss = residual.squaredNorm() / batch;
    if (grad == nullptr) return loss;

    grad->resize(depth);
    Eigen::MatrixXd delta = (2.0 / batch) * residual;
    for (std::size_t l = depth; l-- > 0;) {
        (*grad)[l].weight = delta * activations[l].transpose();
        (*grad)[l].bias = delta.rowwise().sum();
        if (l > 0) {
            const auto& a = activations[l].array();
            delta = (layers[l].weight.transpose() * delta).array() * (1.0 - a * a);
        }
    }
    return loss;
}

MlpField::MlpField(Mlp net) : VectorField(net.state_dim()), net_(std::move(net)) {}

std::unique_ptr<VectorField> MlpField::clone() const { return std::make_unique<MlpField>(*this); }

void MlpField::compute(std::span<const double> x, double t, const Condition& c,
                       std::span<double> out) const {
    if (c.embedding.size() != net_.cond_dim()) {
        throw ContractViolation(fmt::format("condition has {} entries, network expects {}",
                                            c.embedding.size(), net_.cond_dim()));
    }
    net_.forward_one(x, t, c.embedding, out);
}

}  // namespace flowprobe
