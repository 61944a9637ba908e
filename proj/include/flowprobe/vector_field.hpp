#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace flowprobe {

/// A point in sample space. All arithmetic is double precision.
using StateVector = std::vector<double>;
/// dx/dt at some (x, t); same dimension as the state it was evaluated at.
using Velocity = std::vector<double>;

/// Opaque conditioning context. Empty for unconditional fields.
struct Condition {
    std::vector<double> embedding;
};

/// Evaluation counter shared by every VectorField.
///
/// The counter is atomic, so one field instance may be shared by concurrent
/// solves; the per-solve NFE is then only meaningful when each solve owns its
/// instance (see VectorField::clone). Copying a counter copies its value.
class NfeCounter {
public:
    NfeCounter() = default;
    NfeCounter(const NfeCounter& other) noexcept : count_(other.load()) {}
    NfeCounter& operator=(const NfeCounter& other) noexcept {
        count_.store(other.load(), std::memory_order_relaxed);
        return *this;
    }

    void increment() noexcept { count_.fetch_add(1, std::memory_order_relaxed); }
    std::uint64_t load() const noexcept { return count_.load(std::memory_order_relaxed); }
    void reset() noexcept { count_.store(0, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> count_{0};
};

/// A time-dependent velocity field v(x, t, c) on t in [0, 1].
///
/// `evaluate` validates its inputs, bumps the NFE counter exactly once and
/// dispatches to `compute`. Solvers must go through `evaluate` so the
/// counter sees every network-equivalent call.
class VectorField {
public:
    explicit VectorField(std::size_t dimension);
    virtual ~VectorField() = default;

    VectorField(const VectorField&) = default;
    VectorField& operator=(const VectorField&) = default;

    std::size_t dimension() const noexcept { return dimension_; }

    Velocity evaluate(std::span<const double> x, double t, const Condition& c) const;

    std::uint64_t nfe_count() const noexcept { return nfe_.load(); }
    void reset_nfe() noexcept { nfe_.reset(); }

    /// Independent copy with its own counter (starting from this one's value).
    virtual std::unique_ptr<VectorField> clone() const = 0;

protected:
    virtual void compute(std::span<const double> x, double t, const Condition& c,
                         std::span<double> out) const = 0;

private:
    std::size_t dimension_;
    mutable NfeCounter nfe_;
};

bool all_finite(std::span<const double> values) noexcept;

}  // namespace flowprobe
