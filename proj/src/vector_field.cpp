#include "flowprobe/vector_field.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

VectorField::VectorField(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) {
        throw ContractViolation("vector field dimension must be at least 1");
    }
}

Velocity VectorField::evaluate(std::span<const double> x, double t, const Condition& c) const {
    if (x.size() != dimension_) {
        throw ContractViolation(
            fmt::format("state has dimension {}, field expects {}", x.size(), dimension_));
    }
    if (!(t >= 0.0 && t <= 1.0)) {
        throw ContractViolation(fmt::format("flow time {} outside [0, 1]", t));
    }
    if (!all_finite(x)) {
        throw ContractViolation("state passed to evaluate has non-finite components");
    }
    nfe_.increment();
    Velocity v(dimension_);
    compute(x, t, c, v);
    return v;
}

bool all_finite(std::span<const double> values) noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace flowprobe
