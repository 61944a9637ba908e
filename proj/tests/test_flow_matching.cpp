#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "flowprobe/adaptive.hpp"
#include "flowprobe/datasets.hpp"
#include "flowprobe/errors.hpp"
#include "flowprobe/mlp.hpp"
#include "flowprobe/training.hpp"
#include "flowprobe/weights_io.hpp"

using namespace flowprobe;

namespace {

class ZeroField final : public VectorField {
public:
    ZeroField() : VectorField(2) {}
    std::unique_ptr<VectorField> clone() const override {
        return std::make_unique<ZeroField>(*this);
    }

protected:
    void compute(std::span<const double>, double, const Condition&,
                 std::span<double> out) const override {
        out[0] = 0.0;
        out[1] = 0.0;
    }
};

// Marginal flow-matching velocity for x0 ~ N(0, I), x1 ~ equal mixture of
// N(m_k, s^2 I), independent coupling: u = (E[x1 | x_t = x] - x) / (1 - t).
class MixtureFlowField final : public VectorField {
public:
    explicit MixtureFlowField(const DatasetParams& p) : VectorField(2), p_(p) {}
    std::unique_ptr<VectorField> clone() const override {
        return std::make_unique<MixtureFlowField>(*this);
    }

protected:
    void compute(std::span<const double> x, double t, const Condition&,
                 std::span<double> out) const override {
        const double s2 = p_.sigma * p_.sigma;
        const double var = t * t * s2 + (1.0 - t) * (1.0 - t);
        const std::array<std::array<double, 2>, 2> means{p_.mean_a, p_.mean_b};
        std::array<double, 2> logw{};
        for (int k = 0; k < 2; ++k) {
            const double dx = x[0] - t * means[k][0];
            const double dy = x[1] - t * means[k][1];
            logw[k] = -(dx * dx + dy * dy) / (2.0 * var);
        }
        const double top = std::max(logw[0], logw[1]);
        const double w0 = std::exp(logw[0] - top);
        const double w1 = std::exp(logw[1] - top);
        for (int i = 0; i < 2; ++i) {
            double post = 0.0;
            for (int k = 0; k < 2; ++k) {
                const double mk = means[k][i];
                const double cond = mk + t * s2 / var * (x[i] - t * mk);
                post += (k == 0 ? w0 : w1) * cond;
            }
            out[i] = (post / (w0 + w1) - x[i]) / (1.0 - t);
        }
    }

private:
    DatasetParams p_;
};

double mean_probe_similarity(const VectorField& f, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += probe(f, sample_noise(2, rng), {}, {}).similarity;
    }
    return s / static_cast<double>(n);
}

bool same_weights(const Mlp& a, const Mlp& b) {
    if (a.layers().size() != b.layers().size()) return false;
    for (std::size_t l = 0; l < a.layers().size(); ++l) {
        const auto& la = a.layers()[l];
        const auto& lb = b.layers()[l];
        if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) {
            return false;
        }
        if (std::memcmp(la.weight.data(), lb.weight.data(),
                        sizeof(double) * static_cast<std::size_t>(la.weight.size())) != 0 ||
            std::memcmp(la.bias.data(), lb.bias.data(),
                        sizeof(double) * static_cast<std::size_t>(la.bias.size())) != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("sample_pair") {
    DatasetParams p;
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_pair(Dataset::single_point, p, rng).second == StateVector{3.0, 3.0});
    }

    int near = 0;
    constexpr int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i) {
        const auto x1 = sample_pair(Dataset::two_gaussians, p, rng).second;
        for (const auto& m : {p.mean_a, p.mean_b}) {
            if (std::hypot(x1[0] - m[0], x1[1] - m[1]) < 4.0 * p.sigma) {
                ++near;
                break;
            }
        }
    }
    // P(radius > 4 sigma) for a 2-D Gaussian is exp(-8) = 3.4e-4; allow 10x.
    CHECK(kDraws - near <= 34);

    Rng a(77);
    Rng b(77);
    for (auto ds : {Dataset::single_point, Dataset::two_gaussians, Dataset::two_moons}) {
        for (int i = 0; i < 50; ++i) CHECK(sample_pair(ds, p, a) == sample_pair(ds, p, b));
    }
    CHECK(parse_dataset("two-moons") == Dataset::two_moons);
    CHECK_THROWS_AS(parse_dataset("three-gaussians"), ContractViolation);
}

TEST_CASE("fm_loss examples") {
    ZeroField zero;
    CHECK(fm_loss(zero, std::vector{0.0, 0.0}, std::vector{1.0, 0.0}, 0.3) == 1.0);
    CHECK(fm_loss(zero, std::vector{1.0, 1.0}, std::vector{4.0, 5.0}, 0.7) == 25.0);
    CHECK(zero.nfe_count() == 2);

    // A constant field equal to x1 - x0 matches exactly.
    Mlp net(2, 0, {4}, 3);
    for (auto& l : net.layers()) l.weight.setZero();
    net.layers().back().bias << 2.0, -1.0;
    MlpField f(net);
    CHECK(fm_loss(f, std::vector{0.5, 0.5}, std::vector{2.5, -0.5}, 0.4) == 0.0);
}

TEST_CASE("batch loss is invariant to sample order") {
    Mlp net(2, 1, {16, 16}, 5);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd in(4, 32);
    Eigen::MatrixXd target(2, 32);
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
        in.col(j) << normal(rng), normal(rng), 0.5 + 0.4 * std::tanh(normal(rng)), normal(rng);
        target.col(j) << normal(rng), normal(rng);
    }
    const double base = batch_fm_loss(net, in, target, nullptr);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(32);
    perm.setIdentity();
    for (int k = 0; k < 10; ++k) {
        std::shuffle(perm.indices().data(), perm.indices().data() + 32, rng);
        CHECK(batch_fm_loss(net, in * perm, target * perm, nullptr) ==
              doctest::Approx(base).epsilon(1e-14));
    }
}

TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::uint64_t config = 0; config < 10; ++config) {
        const std::size_t cond = config % 2;
        Mlp net(2, cond, {64, 64, 64}, 100 + config);
        const Eigen::Index batch = 8;
        Eigen::MatrixXd in(static_cast<Eigen::Index>(net.input_dim()), batch);
        Eigen::MatrixXd target(2, batch);
        for (Eigen::Index j = 0; j < batch; ++j) {
            for (Eigen::Index i = 0; i < in.rows(); ++i) in(i, j) = normal(rng);
            in(2, j) = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            target.col(j) << 3.0 * normal(rng), 3.0 * normal(rng);
        }
        MlpGradient grad;
        batch_fm_loss(net, in, target, &grad);

        constexpr double h = 1e-5;
        double diff2 = 0.0;
        double ref2 = 0.0;
        auto probe_param = [&](double& w, double analytic) {
            const double keep = w;
            w = keep + h;
            const double up = batch_fm_loss(net, in, target, nullptr);
            w = keep - h;
            const double down = batch_fm_loss(net, in, target, nullptr);
            w = keep;
            const double numeric = (up - down) / (2.0 * h);
            diff2 += (analytic - numeric) * (analytic - numeric);
            ref2 += numeric * numeric;
        };
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto& layer = net.layers()[l];
            for (Eigen::Index k = 0; k < layer.weight.size(); ++k) {
                probe_param(layer.weight.data()[k], grad[l].weight.data()[k]);
            }
            for (Eigen::Index k = 0; k < layer.bias.size(); ++k) {
                probe_param(layer.bias.data()[k], grad[l].bias.data()[k]);
            }
        }
        CHECK(std::sqrt(diff2 / ref2) < 1e-4);
    }
}

TEST_CASE("single-point training learns the constant displacement") {
    TrainingConfig cfg;
    cfg.dataset = Dataset::single_point;
    cfg.steps = 2000;
    const auto result = train(cfg);
    const auto v = result.field.evaluate(std::vector{0.0, 0.0}, 0.0, {});
    CHECK(std::hypot(v[0] - 3.0, v[1] - 3.0) < 0.1);
    const auto& loss = result.trace.interval_loss;
    REQUIRE(loss.size() == 20);
    CHECK(loss.back() < loss.front());
    CHECK(mean_probe_similarity(result.field, 100, 3) > 0.99);
}

TEST_CASE("two-gaussians training") {
    const TrainingConfig cfg;
    const auto result = train(cfg);
    const auto& loss = result.trace.interval_loss;
    CHECK(loss.back() < loss.front());

    // With symmetric modes the exact marginal field bends: paths from the
    // middle first head toward the mean and then commit to one mode.
    const MixtureFlowField exact(cfg.data);
    const double s_exact = mean_probe_similarity(exact, 100, 3);
    const double s_learned = mean_probe_similarity(result.field, 100, 3);
    CHECK(s_exact < 0.0);
    CHECK(std::abs(s_learned - s_exact) < 0.15);

    // Modes displaced off the prior's centre give near-straight paths.
    TrainingConfig shifted = cfg;
    shifted.data.mean_a = {4.0, 1.0};
    shifted.data.mean_b = {4.0, -1.0};
    const auto straight = train(shifted);
    CHECK(mean_probe_similarity(MixtureFlowField(shifted.data), 100, 3) > 0.9);
    CHECK(mean_probe_similarity(straight.field, 100, 3) > 0.9);
}

TEST_CASE("training is bitwise deterministic") {
    TrainingConfig cfg;
    cfg.steps = 150;
    cfg.seed = 42;
    const auto a = train(cfg);
    const auto b = train(cfg);
    CHECK(same_weights(a.field.network(), b.field.network()));
    CHECK(a.trace.interval_loss == b.trace.interval_loss);

    cfg.optimizer = Optimizer::adam;
    cfg.learning_rate = 0.002;
    CHECK(same_weights(train(cfg).field.network(), train(cfg).field.network()));

    cfg.seed = 43;
    CHECK(!same_weights(train(cfg).field.network(), a.field.network()));
}

TEST_CASE("divergent training names the failing step") {
    TrainingConfig cfg;
    cfg.learning_rate = 1e6;
    cfg.steps = 100;
    try {
        train(cfg);
        FAIL("expected TrainingFailure");
    } catch (const TrainingFailure& e) {
        CHECK(e.step() < 100);
        CHECK(std::string(e.what()).find(std::to_string(e.step())) != std::string::npos);
    }
}

TEST_CASE("weights round-trip bitwise") {
    TrainingConfig cfg;
    cfg.steps = 100;
    const auto trained = train(cfg);
    const auto bytes = save_weights(trained.field.network());
    const MlpField loaded(load_weights(bytes));
    CHECK(same_weights(loaded.network(), trained.field.network()));
    CHECK(save_weights(loaded.network()) == bytes);

    Rng rng(5);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto x = sample_noise(2, rng);
        const double ti = t(rng);
        const auto a = trained.field.evaluate(x, ti, {});
        const auto b = loaded.evaluate(x, ti, {});
        CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 2) == 0);
    }

    Mlp conditioned(3, 2, {5, 7}, 9);
    CHECK(same_weights(load_weights(save_weights(conditioned)), conditioned));
}

TEST_CASE("malformed weight documents") {
    const auto bytes = save_weights(Mlp(2, 0, {8, 8}, 1));
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{8}, std::size_t{20},
                            bytes.size() / 2, bytes.size() - 1}) {
        const std::vector<std::uint8_t> truncated(bytes.begin(),
                                                  bytes.begin() + static_cast<long>(cut));
        try {
            load_weights(truncated);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.offset() <= cut);
        }
    }

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(load_weights(trailing), ParseError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(load_weights(bad_magic), ParseError);

    // Header layout: magic(8) version(4) activation(4) state(4) cond(4) count(4) widths...
    auto mismatched = bytes;
    mismatched[28 + 4] = 9;  // widths[1] = 9 while the first layer has 8 rows
    CHECK_THROWS_AS(load_weights(mismatched), SchemaError);

    auto wrong_input = bytes;
    wrong_input[28] = 4;  // widths[0] must be state + 1 + cond = 3
    CHECK_THROWS_AS(load_weights(wrong_input), SchemaError);

    auto version = bytes;
    version[8] = 2;
    CHECK_THROWS_AS(load_weights(version), ParseError);
}
