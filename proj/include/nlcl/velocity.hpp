#pragma once

#include <functional>
#include <string>

namespace nlcl {

/// Velocity law V(w) together with its derivative V'(w).
///
/// The adjoint needs V' explicitly, so both are supplied by the caller.
/// Instances are immutable and the callables must be pure, since solver
/// kernels evaluate them from several threads.
class Velocity {
 public:
  using Fn = std::function<double(double)>;

  Velocity(std::string name, Fn value, Fn derivative);

  /// V(w) = intercept + slope * w.
  static Velocity affine(double intercept, double slope);
  /// V(w) = 1 - w.
  static Velocity greenshields() { return affine(1.0, -1.0); }
  static Velocity constant(double c) { return affine(c, 0.0); }

  double operator()(double w) const { return value_(w); }
  double derivative(double w) const { return derivative_(w); }
  const std::string& name() const { return name_; }

  /// Flux f(q) = q V(q) of the local conservation law.
  double flux(double q) const { return q * value_(q); }

 private:
  std::string name_;
  Fn value_;
  Fn derivative_;
};

}  // namespace nlcl
