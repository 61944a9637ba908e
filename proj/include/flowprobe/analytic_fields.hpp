#pragma once

#include <memory>
#include <vector>

#include "flowprobe/field_spec.hpp"
#include "flowprobe/vector_field.hpp"

namespace flowprobe {

class ConstantField final : public VectorField {
public:
    explicit ConstantField(std::vector<double> velocity);
    std::unique_ptr<VectorField> clone() const override;

protected:
    void compute(std::span<const double> x, double t, const Condition& c,
                 std::span<double> out) const override;

private:
    std::vector<double> velocity_;
};

/// v = rate * x + offset.
class AffineField final : public VectorField {
public:
    AffineField(double rate, std::vector<double> offset);
    std::unique_ptr<VectorField> clone() const override;

protected:
    void compute(std::span<const double> x, double t, const Condition& c,
                 std::span<double> out) const override;

private:
    double rate_;
    std::vector<double> offset_;
};

/// Planar rigid rotation about the origin, v = omega * (-x1, x0).
class RotationField final : public VectorField {
public:
    explicit RotationField(double omega);
    std::unique_ptr<VectorField> clone() const override;

protected:
    void compute(std::span<const double> x, double t, const Condition& c,
                 std::span<double> out) const override;

private:
    double omega_;
};

/// Straight segments alternating with turning segments. The velocity is
/// state-independent: its direction in the (x0, x1) plane is rotated by
/// theta(t), which grows at rate omega inside turning segments only.
class PiecewiseCurvatureField final : public VectorField {
public:
    PiecewiseCurvatureField(std::vector<double> velocity, double omega,
                            std::vector<double> breakpoints);
    std::unique_ptr<VectorField> clone() const override;

    /// Accumulated turning angle at time t.
    double angle_at(double t) const noexcept;

protected:
    void compute(std::span<const double> x, double t, const Condition& c,
                 std::span<double> out) const override;

private:
    std::vector<double> velocity_;
    double omega_;
    std::vector<double> breakpoints_;
};

/// Builds the field for any non-learned spec. Throws UnsupportedOracle for learned.
std::unique_ptr<VectorField> make_analytic_field(const FieldSpec& spec);

/// Closed-form x(1) of dx/dt = v(x, t) from x(0) = x0.
StateVector exact_endpoint(const FieldSpec& spec, std::span<const double> x0);

}  // namespace flowprobe
