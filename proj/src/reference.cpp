#include "nlcl/reference.hpp"

#include "nlcl/matrix.hpp"

namespace nlcl::reference {

namespace {

// S_{l,m,r} = sum_{k=l}^{m} gamma_k q_{k+r}
double partial_sum(std::span<const double> q, const KernelWeights& kernel, long l, long m,
                   long r) {
  double acc = 0.0;
  for (long k = l; k <= m; ++k) acc += kernel.gamma[k] * q[k + r];
  return acc;
}

}  // namespace

std::vector<double> step(std::span<const double> q, const Discretization& disc) {
  const std::size_t n = disc.grid.cells();
  require_length(q, n, "reference::step");
  const long P = static_cast<long>(n) - 1;
  const double dx = disc.grid.dx;
  const double dt = disc.grid.dt;
  const double alpha = disc.params.alpha;
  const Velocity& V = disc.velocity;

  std::vector<double> out(n, 0.0);
  for (long j = 1; j <= P - 1; ++j) {
    double upwind = 0.0;
    for (long k = 0; k <= P - j + 1; ++k) upwind += disc.kernel.gamma[k] * q[j - 1 + k];
    double downwind = 0.0;
    for (long k = 0; k <= P - j - 1; ++k) downwind += disc.kernel.gamma[k] * q[j + 1 + k];
    out[j] = q[j] + alpha * dt / (2.0 * dx) * (q[j - 1] - 2.0 * q[j] + q[j + 1]) +
             dt / (2.0 * dx) * (q[j - 1] * V(upwind) - q[j + 1] * V(downwind));
  }
  return out;
}

std::vector<double> adjoint_step(std::span<const double> q, std::span<const double> p,
                                 const Discretization& disc) {
  const std::size_t n = disc.grid.cells();
  require_length(q, n, "reference::adjoint_step state row");
  require_length(p, n, "reference::adjoint_step adjoint row");
  if (n < 5) throw ValidationError("reference::adjoint_step: needs P >= 4");

  const long P = static_cast<long>(n) - 1;
  const auto& g = disc.kernel.gamma;
  const Velocity& V = disc.velocity;
  const double a = disc.params.alpha * disc.grid.dt / (2.0 * disc.grid.dx);
  const double b = disc.grid.dt / (2.0 * disc.grid.dx);
  auto S = [&](long l, long m, long r) { return partial_sum(q, disc.kernel, l, m, r); };

  // sum_{l=0}^{upper} q_l V'(S_{0,P-l,l}) gamma_{shift-l} p_{l+1}
  auto first_sum = [&](long upper, long shift) {
    double acc = 0.0;
    for (long l = 0; l <= upper; ++l) {
      acc += q[l] * V.derivative(S(0, P - l, l)) * g[shift - l] * p[l + 1];
    }
    return acc;
  };
  // sum_{l=0}^{upper} q_{2+l} V'(S_{0,P-l-2,2+l}) gamma_{shift-l} p_{l+1}
  auto second_sum = [&](long upper, long shift) {
    double acc = 0.0;
    for (long l = 0; l <= upper; ++l) {
      acc += q[2 + l] * V.derivative(S(0, P - l - 2, 2 + l)) * g[shift - l] * p[l + 1];
    }
    return acc;
  };

  std::vector<double> out(n);

  const double s0 = S(0, P, 0);
  out[0] = a * p[1] + b * V(s0) * p[1] + b * V.derivative(s0) * g[0] * q[0] * p[1];

  out[1] = p[1] + a * (-2.0 * p[1] + p[2]) + b * V(S(0, P - 1, 1)) * p[2] + b * first_sum(1, 1);

  for (long j = 2; j <= P - 2; ++j) {
    out[j] = p[j] + a * (p[j - 1] - 2.0 * p[j] + p[j + 1]) +
             b * V(S(0, P - j, j)) * (p[j + 1] - p[j - 1]) +
             b * (first_sum(j, j) - second_sum(j - 2, j - 2));
  }

  out[P - 1] = p[P - 1] + a * (p[P - 2] - 2.0 * p[P - 1]) - b * V(S(0, 1, P - 1)) * p[P - 2] +
               b * (first_sum(P - 2, P - 1) - second_sum(P - 3, P - 3));

  out[P] = a * p[P - 1] - b * V(S(0, 0, P)) * p[P - 1] +
           b * (first_sum(P - 2, P) - second_sum(P - 2, P - 2));
  return out;
}

}  // namespace nlcl::reference
