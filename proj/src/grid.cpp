#include "nlcl/grid.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>

#include "nlcl/matrix.hpp"

namespace nlcl {

namespace {

int steps_for(double T, double dt_hint) {
  if (dt_hint >= T) return 1;
  // Tolerate the rounding of T / (T / N) so that refitting an already fitted
  // step keeps N.
  return static_cast<int>(std::ceil(T / dt_hint * (1.0 - 1e-13)));
}

}  // namespace

Grid Grid::with_time_step(double dt_hint) const {
  if (!(dt_hint > 0.0)) throw ValidationError("time step hint must be positive");
  Grid g = *this;
  g.N = steps_for(T, dt_hint);
  g.dt = T / g.N;
  return g;
}

Grid build_grid(double x_lo, double x_hi, double dx, double T, double dt_hint) {
  if (!(x_hi > x_lo)) throw ValidationError("grid: x_hi must exceed x_lo");
  if (!(dx > 0.0)) throw ValidationError("grid: dx must be positive");
  if (!(T > 0.0)) throw ValidationError("grid: horizon T must be positive");
  if (!(dt_hint > 0.0)) throw ValidationError("grid: dt_hint must be positive");

  const double ratio = (x_hi - x_lo) / dx;
  const double cells = std::round(ratio);
  if (std::abs(ratio - cells) > 1e-9 || cells < 1.0) {
    throw ValidationError(fmt::format(
        "grid: interval [{}, {}] is not a whole number of cells of width dx = {} ({} cells)", x_lo,
        x_hi, dx, ratio));
  }

  Grid g;
  g.x_lo = x_lo;
  g.x_hi = x_hi;
  g.dx = dx;
  g.P = static_cast<int>(cells) - 1;
  g.centers.resize(g.cells());
  for (std::size_t j = 0; j < g.centers.size(); ++j) {
    g.centers[j] = x_lo + (static_cast<double>(j) + 0.5) * dx;
  }
  g.T = T;
  g.N = steps_for(T, dt_hint);
  g.dt = T / g.N;
  return g;
}

KernelWeights build_kernel(const Grid& grid, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ValidationError(fmt::format("kernel: eta must be positive, got {}", eta));
  }
  KernelWeights k;
  k.eta = eta;
  const double h = grid.dx / eta;
  k.ratio = std::exp(-h);
  // exp(-kh) - exp(-(k+1)h) = exp(-kh) * (1 - exp(-h)); expm1 avoids the
  // cancellation for small h.
  const double first = -std::expm1(-h);
  k.gamma.resize(grid.cells());
  for (std::size_t i = 0; i < k.gamma.size(); ++i) {
    k.gamma[i] = std::exp(-static_cast<double>(i) * h) * first;
  }
  k.tail_mass = std::exp(-static_cast<double>(grid.cells()) * h);
  return k;
}

SchemeParams scheme_params(const Grid& grid, const KernelWeights& kernel, const Velocity& V,
                           double q_max, double cfl_safety, int samples) {
  if (!(q_max > 0.0)) throw ValidationError("scheme: q_max must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
    throw ValidationError("scheme: cfl_safety must lie in (0, 1]");
  }
  if (samples < 2) throw ValidationError("scheme: need at least two samples");

  SchemeParams p;
  p.q_max = q_max;
  p.cfl_safety = cfl_safety;
  const double upper = q_max + 1.0;
  for (int i = 0; i < samples; ++i) {
    const double w = upper * static_cast<double>(i) / (samples - 1);
    p.v_inf = std::max(p.v_inf, std::abs(V(w)));
    p.vp_inf = std::max(p.vp_inf, std::abs(V.derivative(w)));
  }
  const double nonlocal_term = p.vp_inf * grid.dx * upper / kernel.eta;
  p.alpha = p.v_inf + nonlocal_term;
  if (!std::isfinite(p.alpha) || !(p.alpha > 0.0)) {
    throw ValidationError(fmt::format("scheme: diffusion coefficient alpha = {} is unusable", p.alpha));
  }
  p.dt_bound = std::min(2.0 * grid.dx / (2.0 * p.alpha + nonlocal_term), grid.dx / p.alpha);
  const double target = std::min(grid.dt, cfl_safety * p.dt_bound);
  if (!(target > 0.0)) throw ValidationError("scheme: no admissible time step");
  p.dt = grid.with_time_step(target).dt;
  return p;
}

bool admits_time_step(const SchemeParams& params, double dx, double dt) {
  constexpr double slack = 1.0 + 1e-12;
  return dt > 0.0 && dt <= params.dt_bound * slack && dt * params.alpha / dx <= slack;
}

Discretization discretize(const GridSpec& spec, double eta, Velocity V, double q_max,
                          double cfl_safety) {
  Grid grid = build_grid(spec);
  KernelWeights kernel = build_kernel(grid, eta);
  SchemeParams params = scheme_params(grid, kernel, V, q_max, cfl_safety);
  grid = grid.with_time_step(params.dt);
  params.dt = grid.dt;
  return Discretization{std::move(grid), std::move(kernel), params, std::move(V)};
}

}  // namespace nlcl
