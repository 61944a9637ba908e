#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "flowprobe/field_spec.hpp"
#include "flowprobe/vector_field.hpp"

namespace flowprobe::bench {

/// One named field of an experiment corpus.
struct CorpusEntry {
    std::string name;
    FieldSpec spec;
    Condition condition;
};

/// Random piecewise-curvature fields: straight, then one turn of rate omega over
/// [turn_start, turn_start + turn_length), then straight again. omega is drawn
/// log-uniformly with a random sign, the heading uniformly and the speed uniformly.
struct PiecewiseFamily {
    std::size_t count = 0;
    double omega_lo = 0.1;
    double omega_hi = 6.283185307179586;
    double start_lo = 0.25;
    double start_hi = 0.45;
    double length_lo = 0.05;
    double length_hi = 0.2;
    double speed_lo = 1.0;
    double speed_hi = 2.0;
};

/// Turning rates spanning [0.1, 2 pi].
PiecewiseFamily curved_family(std::size_t count);
/// Same layout with omega in [0.001, 0.01]: visibly straight to the probe.
PiecewiseFamily near_straight_family(std::size_t count);

std::vector<CorpusEntry> generate_piecewise(const PiecewiseFamily& family, std::uint64_t seed,
                                            const std::string& prefix);

/// `count` fields, the first round(curved_fraction * count) curved and the rest
/// near-straight, interleaved deterministically.
std::vector<CorpusEntry> mixed_corpus(std::size_t count, double curved_fraction,
                                      std::uint64_t seed);

std::vector<CorpusEntry> rotation_corpus(const std::vector<double>& omegas);

/// Standard-normal start for run `run` of field row `field_index`. Every solver
/// sees the same start for the same (seed, field_index, run).
StateVector draw_start(std::uint64_t seed, std::size_t field_index, std::size_t run,
                       std::size_t dimension);

/// FNV-1a over the bytes of the state, as 16 hex digits.
std::string hash_state(const StateVector& x);

}  // namespace flowprobe::bench
