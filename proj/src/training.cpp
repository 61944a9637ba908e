#include "flowprobe/training.hpp"

#include <cmath>
#include <optional>

#include "flowprobe/errors.hpp"

namespace flowprobe {

std::string_view to_string(Optimizer optimizer) noexcept {
    return optimizer == Optimizer::sgd ? "sgd" : "adam";
}

Optimizer parse_optimizer(std::string_view name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw ContractViolation("unknown optimizer; expected sgd or adam");
}

namespace {

class AdamState {
public:
    explicit AdamState(const Mlp& net) {
        for (const auto& layer : net.layers()) {
            m_.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                          Eigen::VectorXd::Zero(layer.bias.size())});
        }
        v_ = m_;
    }

    void step(Mlp& net, const MlpGradient& grad, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        auto& layers = net.layers();
        for (std::size_t l = 0; l < layers.size(); ++l) {
            update(layers[l].weight, grad[l].weight, m_[l].weight, v_[l].weight, lr, c1, c2);
            update(layers[l].bias, grad[l].bias, m_[l].bias, v_[l].bias, lr, c1, c2);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    template <typename P, typename G>
    static void update(P& param, const G& g, P& m, P& v, double lr, double c1, double c2) {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
    }

    std::vector<DenseLayer> m_;
    std::vector<DenseLayer> v_;
    std::size_t t_ = 0;
};

}  // namespace

double fm_loss(const VectorField& field, std::span<const double> x0,
               std::span<const double> x1, double t, const Condition& c) {
    if (!(t >= 0.0 && t <= 1.0)) throw ContractViolation("fm_loss: t outside [0, 1]");
    if (x0.size() != x1.size()) throw ContractViolation("fm_loss: x0 and x1 differ in dimension");
    StateVector xt(x0.size());
    for (std::size_t i = 0; i < xt.size(); ++i) xt[i] = t * x1[i] + (1.0 - t) * x0[i];
    const Velocity v = field.evaluate(xt, t, c);
    double loss = 0.0;
    for (std::size_t i = 0; i < xt.size(); ++i) {
        const double r = v[i] - (x1[i] - x0[i]);
        loss += r * r;
    }
    return loss;
}

TrainingResult train(const TrainingConfig& config) {
    if (!(config.learning_rate > 0.0)) throw ContractViolation("learning rate must be > 0");
    if (config.steps == 0) throw ContractViolation("step count must be >= 1");
    if (config.batch_size == 0) throw ContractViolation("batch size must be >= 1");
    if (config.log_interval == 0) throw ContractViolation("log interval must be >= 1");

    constexpr std::size_t dim = 2;
    Rng rng(config.seed);
    // Initialisation draws from its own stream so changing the batch size
    // does not change the starting weights.
    Mlp net(dim, 0, config.hidden, config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(dim + 1), batch);
    Eigen::MatrixXd targets(static_cast<Eigen::Index>(dim), batch);
    MlpGradient grad;
    std::optional<AdamState> adam;
    if (config.optimizer == Optimizer::adam) adam.emplace(net);
    TrainingTrace trace;
    double window_sum = 0.0;
    std::size_t window_count = 0;

    for (std::size_t step = 0; step < config.steps; ++step) {
        for (Eigen::Index b = 0; b < batch; ++b) {
            auto [x0, x1] = sample_pair(config.dataset, config.data, rng);
            const double t = unit(rng);
            for (std::size_t i = 0; i < dim; ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                inputs(r, b) = t * x1[i] + (1.0 - t) * x0[i];
                targets(r, b) = x1[i] - x0[i];
            }
            inputs(static_cast<Eigen::Index>(dim), b) = t;
        }
        const double loss = batch_fm_loss(net, inputs, targets, &grad);
        if (!std::isfinite(loss)) throw TrainingFailure(step);
        if (adam) {
            adam->step(net, grad, config.learning_rate);
        } else {
            auto& layers = net.layers();
            for (std::size_t l = 0; l < layers.size(); ++l) {
                layers[l].weight -= config.learning_rate * grad[l].weight;
                layers[l].bias -= config.learning_rate * grad[l].bias;
            }
        }
        if (!net.all_finite()) throw TrainingFailure(step);

        window_sum += loss;
        if (++window_count == config.log_interval || step + 1 == config.steps) {
            trace.interval_loss.push_back(window_sum / static_cast<double>(window_count));
            window_sum = 0.0;
            window_count = 0;
        }
    }
    return TrainingResult{MlpField(std::move(net)), std::move(trace)};
}

}  // namespace flowprobe
