#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "flowprobe/errors.hpp"
#include "flowprobe/metrics.hpp"

using namespace flowprobe;

namespace {

SolveReport report(StateVector endpoint, std::size_t steps = 2, std::uint64_t nfe = 2,
                   double wall = 1e-6) {
    SolveReport r;
    r.endpoint = std::move(endpoint);
    r.steps_taken = steps;
    r.nfe = nfe;
    r.wall_time = wall;
    r.solver_name = "test";
    return r;
}

std::vector<StateVector> cloud(std::size_t n, double shift, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<StateVector> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({normal(rng) + shift, normal(rng)});
    return out;
}

}  // namespace

TEST_CASE("endpoint error examples") {
    CHECK(endpoint_error(std::vector{1.0, 2.0}, std::vector{1.0, 2.0}) == 0.0);
    CHECK(endpoint_error(std::vector{1.0, 0.0}, std::vector{0.0, 0.0}) == 1.0);
    const double e = std::exp(1.0);
    CHECK(endpoint_error(std::vector{2.71692}, std::vector{e}) ==
          doctest::Approx((e - 2.71692) / e).epsilon(1e-12));
    CHECK(endpoint_error(std::vector{2.71692}, std::vector{e}) ==
          doctest::Approx(5.0099e-4).epsilon(1e-3));
    CHECK_THROWS_AS(endpoint_error(std::vector{1.0}, std::vector{1.0, 2.0}), ContractViolation);
}

TEST_CASE("endpoint error is nonnegative and zero only on equality") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 500; ++i) {
        const StateVector a{u(rng), u(rng)};
        StateVector b = a;
        CHECK(endpoint_error(a, b) == 0.0);
        b[i % 2] += 1e-9;
        CHECK(endpoint_error(a, b) > 0.0);
    }
}

TEST_CASE("aggregate examples") {
    const double threshold = 1e-2;
    std::vector<SolveReport> one{report({1.0, 1.0})};
    std::vector<StateVector> truth{{1.0, 1.0}};
    auto a = aggregate(one, truth, threshold);
    CHECK(a.success_rate == 1.0);
    CHECK(a.mean_error == 0.0);
    CHECK(a.runs == 1);
    CHECK(!a.stddev_steps);
    CHECK(!a.stddev_nfe);

    std::vector<SolveReport> two{report({0.0}), report({2.0 * threshold})};
    std::vector<StateVector> zeros{{0.0}, {0.0}};
    CHECK(aggregate(two, zeros, threshold).success_rate == 0.5);

    std::vector<SolveReport> four;
    for (std::size_t s : {2, 2, 2, 10}) four.push_back(report({0.0}, s, s + (s > 2)));
    std::vector<StateVector> four_truth(4, StateVector{0.0});
    const auto b = aggregate(four, four_truth, threshold);
    CHECK(b.mean_steps == 4.0);
    CHECK(b.mean_nfe == 4.25);
    REQUIRE(b.stddev_steps);
    CHECK(*b.stddev_steps == doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS(aggregate({}, {}, threshold), ContractViolation);
    CHECK_THROWS_AS(aggregate(one, zeros, threshold), ContractViolation);
}

TEST_CASE("aggregate is permutation invariant") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 0.05);
    std::vector<SolveReport> reports;
    std::vector<StateVector> oracles;
    for (int i = 0; i < 40; ++i) {
        reports.push_back(report({u(rng)}, 2 + (i % 5) * 2, 3 + i % 7, u(rng)));
        oracles.push_back({0.0});
    }
    const auto base = aggregate(reports, oracles);
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int k = 0; k < 20; ++k) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<SolveReport> r;
        std::vector<StateVector> o;
        for (auto i : order) {
            r.push_back(reports[i]);
            o.push_back(oracles[i]);
        }
        CHECK(aggregate(r, o) == base);
    }
}

TEST_CASE("percentile and standard deviation") {
    CHECK(percentile({5.0, 1.0, 3.0, 2.0, 4.0}, 0.95) == 5.0);
    CHECK(percentile({5.0, 1.0, 3.0, 2.0, 4.0}, 0.5) == 3.0);
    CHECK(!sample_stddev(std::vector{1.0}));
    CHECK(*sample_stddev(std::vector{1.0, 3.0}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("distribution distance examples") {
    const auto a = cloud(60, 0.0, 1);
    for (auto kind : {DistanceKind::energy, DistanceKind::sliced_wasserstein}) {
        CHECK(distribution_distance(a, a, kind).value == 0.0);
        auto permuted = a;
        std::reverse(permuted.begin(), permuted.end());
        std::rotate(permuted.begin(), permuted.begin() + 17, permuted.end());
        CHECK(distribution_distance(permuted, a, kind).value ==
              doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
        CHECK(distribution_distance(a, a, kind).kind == kind);
    }

    const std::vector<StateVector> p{{0.0, 0.0}};
    const std::vector<StateVector> q{{1.0, 0.0}};
    CHECK(distribution_distance(p, q, DistanceKind::energy).value == 2.0);

    CHECK_THROWS_AS(distribution_distance(p, std::vector<StateVector>{{1.0}}, DistanceKind::energy),
                    ContractViolation);
    CHECK_THROWS_AS(distribution_distance({}, q, DistanceKind::energy), ContractViolation);
}

TEST_CASE("distribution distance is symmetric and grows with separation") {
    const auto a = cloud(80, 0.0, 2);
    for (auto kind : {DistanceKind::energy, DistanceKind::sliced_wasserstein}) {
        double previous = -1.0;
        for (double shift : {0.0, 0.5, 1.0, 2.0}) {
            const auto b = cloud(80, shift, 3);
            const double ab = distribution_distance(a, b, kind).value;
            CHECK(ab == doctest::Approx(distribution_distance(b, a, kind).value).epsilon(1e-12));
            CHECK(ab > previous);
            CHECK(ab >= 0.0);
            previous = ab;
        }
    }
    // Point masses: sliced W1 is the mean absolute projection of the offset.
    const std::vector<StateVector> p{{0.0, 0.0}};
    const std::vector<StateVector> q{{1.0, 0.0}};
    const double sw = distribution_distance(p, q, DistanceKind::sliced_wasserstein).value;
    CHECK(sw > 0.5);
    CHECK(sw < 0.78);  // E|cos U| = 2 / pi
}
