#include "nlcl/velocity.hpp"

#include <fmt/format.h>

#include <utility>

namespace nlcl {

Velocity::Velocity(std::string name, Fn value, Fn derivative)
    : name_(std::move(name)), value_(std::move(value)), derivative_(std::move(derivative)) {}

Velocity Velocity::affine(double intercept, double slope) {
  return Velocity(
      fmt::format("affine({:.17g},{:.17g})", intercept, slope),
      [intercept, slope](double w) { return intercept + slope * w; },
      [slope](double) { return slope; });
}

}  // namespace nlcl
