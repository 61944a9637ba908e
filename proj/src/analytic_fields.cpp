#include "flowprobe/analytic_fields.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

ConstantField::ConstantField(std::vector<double> velocity)
    : VectorField(velocity.size()), velocity_(std::move(velocity)) {}

std::unique_ptr<VectorField> ConstantField::clone() const {
    return std::make_unique<ConstantField>(*this);
}

void ConstantField::compute(std::span<const double>, double, const Condition&,
                            std::span<double> out) const {
    std::copy(velocity_.begin(), velocity_.end(), out.begin());
}

AffineField::AffineField(double rate, std::vector<double> offset)
    : VectorField(offset.size()), rate_(rate), offset_(std::move(offset)) {}

std::unique_ptr<VectorField> AffineField::clone() const {
    return std::make_unique<AffineField>(*this);
}

void AffineField::compute(std::span<const double> x, double, const Condition&,
                          std::span<double> out) const {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = rate_ * x[i] + offset_[i];
}

RotationField::RotationField(double omega) : VectorField(2), omega_(omega) {}

std::unique_ptr<VectorField> RotationField::clone() const {
    return std::make_unique<RotationField>(*this);
}

void RotationField::compute(std::span<const double> x, double, const Condition&,
                            std::span<double> out) const {
    out[0] = -omega_ * x[1];
    out[1] = omega_ * x[0];
}

PiecewiseCurvatureField::PiecewiseCurvatureField(std::vector<double> velocity, double omega,
                                                 std::vector<double> breakpoints)
    : VectorField(velocity.size()),
      velocity_(std::move(velocity)),
      omega_(omega),
      breakpoints_(std::move(breakpoints)) {
    if (dimension() < 2) {
        throw ContractViolation("piecewise-curvature field needs dimension >= 2");
    }
}

std::unique_ptr<VectorField> PiecewiseCurvatureField::clone() const {
    return std::make_unique<PiecewiseCurvatureField>(*this);
}

double PiecewiseCurvatureField::angle_at(double t) const noexcept {
    double turning = 0.0;
    // Segment k spans [edge(k), edge(k+1)); odd segments turn.
    for (std::size_t k = 1; k <= breakpoints_.size(); k += 2) {
        const double begin = breakpoints_[k - 1];
        const double end = k < breakpoints_.size() ? breakpoints_[k] : 1.0;
        if (t <= begin) break;
        turning += std::min(t, end) - begin;
    }
    return omega_ * turning;
}

void PiecewiseCurvatureField::compute(std::span<const double>, double t, const Condition&,
                                      std::span<double> out) const {
    const double theta = angle_at(t);
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    out[0] = cs * velocity_[0] - sn * velocity_[1];
    out[1] = sn * velocity_[0] + cs * velocity_[1];
    std::copy(velocity_.begin() + 2, velocity_.end(), out.begin() + 2);
}

std::unique_ptr<VectorField> make_analytic_field(const FieldSpec& spec) {
    validate(spec);
    switch (spec.kind) {
        case FieldKind::constant: return std::make_unique<ConstantField>(spec.velocity);
        case FieldKind::affine: return std::make_unique<AffineField>(spec.rate, spec.offset);
        case FieldKind::rotation: return std::make_unique<RotationField>(spec.omega);
        case FieldKind::piecewise_curvature:
            return std::make_unique<PiecewiseCurvatureField>(spec.velocity, spec.omega,
                                                             spec.breakpoints);
        case FieldKind::learned: break;
    }
    throw UnsupportedOracle("learned fields are not analytic; load them from a weights file");
}

namespace {

// Integral of R(theta0 + omega s) u over s in [0, length], first two components.
void add_turning_segment(double theta0, double omega, double length, double u0, double u1,
                         double& x0, double& x1) {
    if (omega == 0.0) {
        x0 += length * (std::cos(theta0) * u0 - std::sin(theta0) * u1);
        x1 += length * (std::sin(theta0) * u0 + std::cos(theta0) * u1);
        return;
    }
    // integral of cos = (sin(theta1) - sin(theta0)) / omega, of sin = -(cos(theta1) - cos(theta0)) / omega
    const double theta1 = theta0 + omega * length;
    const double dc = std::cos(theta1) - std::cos(theta0);
    const double ds = std::sin(theta1) - std::sin(theta0);
    x0 += (ds * u0 + dc * u1) / omega;
    x1 += -(dc * u0 - ds * u1) / omega;
}

}  // namespace

StateVector exact_endpoint(const FieldSpec& spec, std::span<const double> x0) {
    validate(spec);
    if (spec.kind == FieldKind::learned) {
        throw UnsupportedOracle("no closed-form endpoint for a learned field");
    }
    if (x0.size() != spec.dimension) {
        throw ContractViolation(fmt::format("x0 has dimension {}, spec declares {}", x0.size(),
                                            spec.dimension));
    }
    StateVector x(x0.begin(), x0.end());
    switch (spec.kind) {
        case FieldKind::constant:
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += spec.velocity[i];
            break;
        case FieldKind::affine: {
            // x(1) = e^a x0 + b (e^a - 1) / a
            const double a = spec.rate;
            const double growth = std::exp(a);
            const double drift = a == 0.0 ? 1.0 : std::expm1(a) / a;
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] = growth * x[i] + drift * spec.offset[i];
            }
            break;
        }
        case FieldKind::rotation: {
            const double cs = std::cos(spec.omega);
            const double sn = std::sin(spec.omega);
            x[0] = cs * x0[0] - sn * x0[1];
            x[1] = sn * x0[0] + cs * x0[1];
            break;
        }
        case FieldKind::piecewise_curvature: {
            std::vector<double> edges{0.0};
            edges.insert(edges.end(), spec.breakpoints.begin(), spec.breakpoints.end());
            edges.push_back(1.0);
            double theta = 0.0;
            for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
                const double length = edges[k + 1] - edges[k];
                const bool turning = (k % 2) == 1;
                add_turning_segment(theta, turning ? spec.omega : 0.0, length, spec.velocity[0],
                                    spec.velocity[1], x[0], x[1]);
                if (turning) theta += spec.omega * length;
            }
            for (std::size_t i = 2; i < x.size(); ++i) x[i] += spec.velocity[i];
            break;
        }
        case FieldKind::learned: break;
    }
    return x;
}

}  // namespace flowprobe
