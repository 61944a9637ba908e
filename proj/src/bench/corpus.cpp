#include "flowprobe/bench/corpus.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "flowprobe/datasets.hpp"
#include "flowprobe/errors.hpp"

namespace flowprobe::bench {

PiecewiseFamily curved_family(std::size_t count) {
    PiecewiseFamily f;
    f.count = count;
    return f;
}

PiecewiseFamily near_straight_family(std::size_t count) {
    PiecewiseFamily f;
    f.count = count;
    f.omega_lo = 0.001;
    f.omega_hi = 0.01;
    return f;
}

std::vector<CorpusEntry> generate_piecewise(const PiecewiseFamily& family, std::uint64_t seed,
                                            const std::string& prefix) {
    if (!(family.omega_lo > 0.0 && family.omega_lo <= family.omega_hi)) {
        throw ContractViolation("piecewise family needs 0 < omega_lo <= omega_hi");
    }
    if (!(family.start_lo > 0.0 && family.start_lo <= family.start_hi &&
          family.length_lo > 0.0 && family.length_lo <= family.length_hi &&
          family.start_hi + family.length_hi < 1.0)) {
        throw ContractViolation("piecewise family turn window must fit strictly inside (0, 1)");
    }
    if (!(family.speed_lo > 0.0 && family.speed_lo <= family.speed_hi)) {
        throw ContractViolation("piecewise family needs 0 < speed_lo <= speed_hi");
    }
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    std::vector<CorpusEntry> out;
    out.reserve(family.count);
    for (std::size_t i = 0; i < family.count; ++i) {
        const double omega =
            std::exp(between(std::log(family.omega_lo), std::log(family.omega_hi)));
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        const double heading = 2.0 * std::numbers::pi * unit(rng);
        const double speed = between(family.speed_lo, family.speed_hi);
        const double start = between(family.start_lo, family.start_hi);
        const double length = between(family.length_lo, family.length_hi);
        CorpusEntry e;
        e.name = fmt::format("{}-{:03}", prefix, i);
        e.spec = piecewise_spec({speed * std::cos(heading), speed * std::sin(heading)},
                                sign * omega, {start, start + length});
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<CorpusEntry> mixed_corpus(std::size_t count, double curved_fraction,
                                      std::uint64_t seed) {
    if (!(curved_fraction >= 0.0 && curved_fraction <= 1.0)) {
        throw ContractViolation("curved fraction must lie in [0, 1]");
    }
    const auto curved_count =
        static_cast<std::size_t>(std::llround(curved_fraction * static_cast<double>(count)));
    auto curved = generate_piecewise(curved_family(curved_count), seed, "curved");
    auto straight =
        generate_piecewise(near_straight_family(count - curved_count), seed + 1, "straight");

    // Bresenham-style interleave keeps any prefix close to the requested mix.
    std::vector<CorpusEntry> out;
    out.reserve(count);
    std::size_t ci = 0;
    std::size_t si = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto want = static_cast<std::size_t>(
            std::floor(curved_fraction * static_cast<double>(i + 1) + 1e-9));
        if (ci < curved.size() && (ci < want || si >= straight.size())) {
            out.push_back(std::move(curved[ci++]));
        } else {
            out.push_back(std::move(straight[si++]));
        }
    }
    return out;
}

std::vector<CorpusEntry> rotation_corpus(const std::vector<double>& omegas) {
    std::vector<CorpusEntry> out;
    out.reserve(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        out.push_back({fmt::format("rotation-{:03}", i), rotation_spec(omegas[i]), {}});
    }
    return out;
}

StateVector draw_start(std::uint64_t seed, std::size_t field_index, std::size_t run,
                       std::size_t dimension) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(field_index), static_cast<std::uint32_t>(run)};
    Rng rng(seq);
    return sample_noise(dimension, rng);
}

std::string hash_state(const StateVector& x) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : x) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

}  // namespace flowprobe::bench
