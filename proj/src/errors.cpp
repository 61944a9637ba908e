#include "flowprobe/errors.hpp"

#include <fmt/format.h>

namespace flowprobe {

NumericalBlowup::NumericalBlowup(std::string solver, std::size_t step)
    : Error(fmt::format("{}: non-finite state at step {}", solver, step)),
      solver_(std::move(solver)),
      step_(step) {}

StiffnessError::StiffnessError(double t, double step)
    : Error(fmt::format("step size {:.3e} fell below the minimum at t = {:.17g}", step, t)),
      t_(t) {}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : Error(fmt::format("{} (at byte offset {})", what, offset)), offset_(offset) {}

TrainingFailure::TrainingFailure(std::size_t step)
    : Error(fmt::format("training diverged: non-finite loss or weights at step {}", step)),
      step_(step) {}

}  // namespace flowprobe
