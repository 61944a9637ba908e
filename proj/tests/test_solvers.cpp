#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "flowprobe/adaptive.hpp"
#include "flowprobe/analytic_fields.hpp"
#include "flowprobe/errors.hpp"
#include "flowprobe/solvers.hpp"

using namespace flowprobe;

namespace {

double slope(const std::vector<double>& n, const std::vector<double>& err) {
    // Least-squares slope of log(err) against log(n).
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        mx += std::log(n[i]);
        my += std::log(err[i]);
    }
    mx /= static_cast<double>(n.size());
    my /= static_cast<double>(n.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        sxy += (std::log(n[i]) - mx) * (std::log(err[i]) - my);
        sxx += (std::log(n[i]) - mx) * (std::log(n[i]) - mx);
    }
    return sxy / sxx;
}

// AB2 on x' = x, x(0) = 1, written out as a scalar recurrence.
double ab2_scalar(std::size_t n) {
    const double h = 1.0 / static_cast<double>(n);
    double prev_v = 1.0;
    double x = 1.0 + h * prev_v;
    for (std::size_t i = 1; i < n; ++i) {
        const double v = x;
        x += h * (1.5 * v - 0.5 * prev_v);
        prev_v = v;
    }
    return x;
}

void check_record(const SolveReport& r) {
    REQUIRE(!r.step_record.empty());
    CHECK(r.step_record.front().t >= 0.0);
    CHECK(r.step_record.back().t == 1.0);
    CHECK(r.step_record.back().x == r.endpoint);
    for (std::size_t i = 1; i < r.step_record.size(); ++i) {
        CHECK(r.step_record[i].t > r.step_record[i - 1].t);
    }
}

}  // namespace

TEST_CASE("euler examples") {
    ConstantField constant({1.0, 0.0});
    auto r = euler_solve(constant, std::vector{0.0, 0.0}, {}, 1);
    CHECK(r.endpoint == StateVector{1.0, 0.0});
    CHECK(r.nfe == 1);
    CHECK(r.steps_taken == 1);
    CHECK(r.solver_name == "euler");
    CHECK(!r.probe_similarity);
    CHECK(!r.scheduled_n);

    AffineField identity(1.0, {0.0});
    CHECK(euler_solve(identity, std::vector{1.0}, {}, 1).endpoint[0] == 2.0);

    const auto r1000 = euler_solve(identity, std::vector{1.0}, {}, 1000);
    const double closed = std::pow(1.001, 1000);
    CHECK(r1000.endpoint[0] == doctest::Approx(closed).epsilon(1e-13));
    CHECK(closed == doctest::Approx(2.7169239322355936).epsilon(1e-15));
    CHECK(std::exp(1.0) - r1000.endpoint[0] == doctest::Approx(1.3579e-3).epsilon(1e-3));
    CHECK(r1000.nfe == 1000);
    check_record(r1000);
    CHECK(r1000.step_record.size() == 1001);
}

TEST_CASE("ab2 examples") {
    ConstantField constant({0.5, -1.5});
    for (std::size_t n : {2, 3, 7, 16}) {
        const auto r = ab2_solve(constant, std::vector{1.0, 1.0}, {}, n);
        CHECK(r.endpoint[0] == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(r.endpoint[1] == doctest::Approx(-0.5).epsilon(1e-15));
    }

    AffineField identity(1.0, {0.0});
    CHECK(ab2_solve(identity, std::vector{1.0}, {}, 2).endpoint[0] == 2.375);
    CHECK(ab2_scalar(2) == 2.375);

    const auto ab2 = ab2_solve(identity, std::vector{1.0}, {}, 10);
    const auto euler = euler_solve(identity, std::vector{1.0}, {}, 10);
    CHECK(ab2.endpoint[0] == doctest::Approx(ab2_scalar(10)).epsilon(1e-14));
    CHECK(ab2.endpoint[0] == doctest::Approx(2.6955985535865237).epsilon(1e-14));
    const double e = std::exp(1.0);
    CHECK(std::abs(ab2.endpoint[0] - e) < std::abs(euler.endpoint[0] - e));
    CHECK(std::abs(ab2.endpoint[0] - e) == doctest::Approx(0.02268).epsilon(1e-3));
    CHECK(std::abs(euler.endpoint[0] - e) == doctest::Approx(0.12454).epsilon(1e-3));
    CHECK(ab2.nfe == 10);
    check_record(ab2);

    CHECK_THROWS_AS(ab2_solve(identity, std::vector{1.0}, {}, 1), ContractViolation);
    CHECK_THROWS_AS(euler_solve(identity, std::vector{1.0}, {}, 0), ContractViolation);
}

TEST_CASE("euler and ab2 blow up with the offending step named") {
    AffineField growth(1e200, {0.0});
    try {
        euler_solve(growth, std::vector{1.0}, {}, 2);
        FAIL("expected NumericalBlowup");
    } catch (const NumericalBlowup& e) {
        CHECK(e.step() >= 1);
    }
    CHECK_THROWS_AS(ab2_solve(growth, std::vector{1.0}, {}, 2), NumericalBlowup);
}

TEST_CASE("convergence orders on the affine field") {
    AffineField identity(1.0, {0.0});
    const std::vector<double> ns{10, 100, 1000, 10000};
    std::vector<double> euler_err;
    std::vector<double> ab2_err;
    for (double n : ns) {
        const auto k = static_cast<std::size_t>(n);
        euler_err.push_back(std::abs(euler_solve(identity, std::vector{1.0}, {}, k).endpoint[0] -
                                     std::exp(1.0)));
        ab2_err.push_back(std::abs(ab2_solve(identity, std::vector{1.0}, {}, k).endpoint[0] -
                                   std::exp(1.0)));
    }
    CHECK(slope(ns, euler_err) == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(slope(ns, ab2_err) == doctest::Approx(-2.0).epsilon(0.1));
}

TEST_CASE("rk45 examples") {
    ConstantField constant({1.0, -2.0});
    const auto c = rk45_solve(constant, std::vector{0.5, 0.5}, {}, {});
    CHECK(c.nfe <= 13);
    CHECK(c.endpoint[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c.endpoint[1] == doctest::Approx(-1.5).epsilon(1e-15));
    check_record(c);

    AffineField identity(1.0, {0.0});
    const auto a = rk45_solve(identity, std::vector{1.0}, {},
                              {.atol = 1e-8, .rtol = 1e-8, .initial_step = 0.1});
    CHECK(std::abs(a.endpoint[0] - std::exp(1.0)) < 1e-6);
    check_record(a);

    // Tight tolerance on a full turn costs far more than one probe and a dense pass.
    RotationField turn(2.0 * std::numbers::pi);
    const auto tight = rk45_solve(turn, std::vector{1.0, 0.0}, {}, {.atol = 1e-8, .rtol = 1e-8});
    const auto adaptive = adaptive_solve(turn, std::vector{1.0, 0.0}, {}, {});
    CHECK(tight.nfe > 5 * adaptive.nfe);
}

TEST_CASE("rk45 counts rejected attempts and honours the step floor") {
    RotationField turn(2.0 * std::numbers::pi);
    // First attempt h = 1 over a full turn is rejected, so the count exceeds 7 + 6 * accepted.
    const auto r = rk45_solve(turn, std::vector{1.0, 0.0}, {},
                              {.atol = 1e-6, .rtol = 1e-6, .initial_step = 1.0});
    CHECK(r.nfe > 1 + 6 * r.steps_taken);
    CHECK((r.nfe - 1) % 6 == 0);

    CHECK_THROWS_AS(rk45_solve(turn, std::vector{1.0, 0.0}, {},
                               {.atol = 1e-14, .rtol = 1e-14, .initial_step = 0.1,
                                .min_step = 0.05}),
                    StiffnessError);
    CHECK_THROWS_AS(validate(Rk45Config{.atol = 0.0}), ContractViolation);
    CHECK_THROWS_AS(validate(Rk45Config{.initial_step = 2.0, .max_step = 1.0}), ContractViolation);
}

TEST_CASE("reference solve cross-validates the closed forms") {
    const std::vector<FieldSpec> specs{
        affine_spec(1.0, {0.0}),
        affine_spec(-1.3, {0.4, -0.2}),
        rotation_spec(2.0 * std::numbers::pi),
        piecewise_spec({1.2, -0.6}, 5.0, {0.3, 0.45}),
        piecewise_spec({1.0, 0.0, 0.5}, -2.0, {0.1, 0.2, 0.7}),
    };
    for (const auto& spec : specs) {
        const auto field = make_analytic_field(spec);
        StateVector x0(spec.dimension, 0.3);
        x0[0] = 1.0;
        const auto ref = reference_solve(*field, x0, {});
        const auto exact = exact_endpoint(spec, x0);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            num += (ref[i] - exact[i]) * (ref[i] - exact[i]);
            den += exact[i] * exact[i];
        }
        CHECK(std::sqrt(num) / std::max(std::sqrt(den), 1.0) < 1e-8);
        CHECK(reference_solve(*field, x0, {}) == ref);
    }
    ConstantField constant({1.0, 0.0});
    const auto x = reference_solve(constant, std::vector{0.0, 0.0}, {});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[1] == 0.0);
}

TEST_CASE("every solver reports exactly the field's counter delta") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::vector<FieldSpec> specs{constant_spec({1.0, 0.5}), affine_spec(0.8, {0.1, 0.0}),
                                       rotation_spec(3.0),
                                       piecewise_spec({1.0, 1.0}, 2.5, {0.3, 0.6})};
    for (const auto& spec : specs) {
        const auto f = make_analytic_field(spec);
        for (int trial = 0; trial < 10; ++trial) {
            const StateVector x0{u(rng), u(rng)};
            auto check_delta = [&](auto&& solve) {
                const auto before = f->nfe_count();
                const SolveReport r = solve();
                CHECK(r.nfe == f->nfe_count() - before);
            };
            check_delta([&] { return euler_solve(*f, x0, {}, 7); });
            check_delta([&] { return ab2_solve(*f, x0, {}, 7); });
            check_delta([&] { return rk45_solve(*f, x0, {}, {}); });
            check_delta([&] { return adaptive_solve(*f, x0, {}, {}); });
        }
    }
}

TEST_CASE("all solvers agree on a constant field") {
    // Dyadic velocity, start and grid keep every fixed-step sum exact.
    ConstantField f({1.0, -0.5});
    const StateVector x0{0.25, 2.0};
    const StateVector expected{1.25, 1.5};
    for (std::size_t n : {2, 4, 8, 64}) {
        CHECK(euler_solve(f, x0, {}, n).endpoint == expected);
        CHECK(ab2_solve(f, x0, {}, n).endpoint == expected);
    }
    CHECK(adaptive_solve(f, x0, {}, {}).endpoint == expected);
    const auto rk = rk45_solve(f, x0, {}, {});
    CHECK(rk.endpoint[0] == doctest::Approx(expected[0]).epsilon(1e-15));
    CHECK(rk.endpoint[1] == doctest::Approx(expected[1]).epsilon(1e-15));
}
