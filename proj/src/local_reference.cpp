#include "nlcl/local_reference.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace nlcl {

namespace {

enum class Shape { concave, convex, mixed };

struct FluxInfo {
  Shape shape = Shape::mixed;
  double extremum = 0.0;  // argmax (concave) or argmin (convex) on [0, q_max]
  double max_speed = 0.0;
};

FluxInfo analyze_flux(const Velocity& V, double q_max, int samples) {
  FluxInfo info;
  const double h = q_max / (samples - 1);
  std::vector<double> f(samples);
  double scale = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double q = i * h;
    f[i] = V.flux(q);
    scale = std::max(scale, std::abs(f[i]));
    info.max_speed = std::max(info.max_speed, std::abs(V(q) + q * V.derivative(q)));
  }
  const double tol = 1e-12 * std::max(scale, 1.0);
  bool concave = true;
  bool convex = true;
  for (int i = 1; i + 1 < samples; ++i) {
    const double d2 = f[i - 1] - 2.0 * f[i] + f[i + 1];
    if (d2 > tol) concave = false;
    if (d2 < -tol) convex = false;
  }
  if (!concave && !convex) return info;
  info.shape = concave ? Shape::concave : Shape::convex;

  // Coarse search on the samples, then golden-section refinement.
  const double sign = concave ? 1.0 : -1.0;
  int best = 0;
  for (int i = 1; i < samples; ++i) {
    if (sign * f[i] > sign * f[best]) best = i;
  }
  double a = std::max(0.0, (best - 1) * h);
  double b = std::min(q_max, (best + 1) * h);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, q_max); ++it) {
    const double c = b - inv_phi * (b - a);
    const double d = a + inv_phi * (b - a);
    if (sign * V.flux(c) >= sign * V.flux(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  info.extremum = 0.5 * (a + b);
  return info;
}

}  // namespace

LocalTrajectory solve_local(std::span<const double> q0, const Grid& grid, const Velocity& V,
                            double q_max, double T, const LocalOptions& options) {
  require_length(q0, grid.cells(), "solve_local");
  if (!(q_max > 0.0)) throw ValidationError("solve_local: q_max must be positive");
  if (!(T > 0.0)) throw ValidationError("solve_local: T must be positive");
  if (!(options.cfl_safety > 0.0 && options.cfl_safety <= 1.0)) {
    throw ValidationError("solve_local: cfl_safety must lie in (0, 1]");
  }
  for (std::size_t j = 0; j < q0.size(); ++j) {
    if (!(q0[j] >= 0.0 && q0[j] <= q_max)) {
      throw ValidationError(fmt::format("solve_local: q0[{}] = {} outside [0, {}]", j, q0[j], q_max));
    }
  }

  const FluxInfo info = analyze_flux(V, q_max, std::max(options.flux_samples, 3));
  LocalTrajectory out;
  const double speed = std::max(info.max_speed, 1e-300);
  const double dt_max = options.cfl_safety * grid.dx / speed;
  out.steps = dt_max >= T ? 1 : static_cast<int>(std::ceil(T / dt_max * (1.0 - 1e-13)));
  out.dt = T / out.steps;

  const double qs = info.extremum;
  auto godunov_flux = [&](double l, double r) {
    switch (info.shape) {
      case Shape::concave:
        return std::min(V.flux(std::min(l, qs)), V.flux(std::max(r, qs)));
      case Shape::convex:
        return std::max(V.flux(std::max(l, qs)), V.flux(std::min(r, qs)));
      case Shape::mixed:
        break;
    }
    return 0.5 * (V.flux(l) + V.flux(r)) - 0.5 * speed * (r - l);
  };
  switch (info.shape) {
    case Shape::concave: out.flux_scheme = "godunov-concave"; break;
    case Shape::convex: out.flux_scheme = "godunov-convex"; break;
    case Shape::mixed:
      out.flux_scheme = "lax-friedrichs";
      out.used_fallback = true;
      break;
  }

  const std::size_t n = grid.cells();
  out.q = Matrix(static_cast<std::size_t>(out.steps) + 1, n);
  std::copy(q0.begin(), q0.end(), out.q.row(0).begin());
  std::vector<double> F(n + 1);
  const double ratio = out.dt / grid.dx;
  for (int step = 0; step < out.steps; ++step) {
    const auto cur = out.q.row(step);
    auto next = out.q.row(step + 1);
    // F[j] is the flux through the left edge of cell j; ghosts are zero.
    F[0] = godunov_flux(0.0, cur[0]);
    F[n] = godunov_flux(cur[n - 1], 0.0);
#pragma omp parallel for schedule(static) if (n >= 4096)
    for (std::size_t j = 1; j < n; ++j) F[j] = godunov_flux(cur[j - 1], cur[j]);
    for (std::size_t j = 0; j < n; ++j) next[j] = cur[j] - ratio * (F[j + 1] - F[j]);
  }
  return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b, const Grid& grid,
                   double lo, double hi) {
  require_length(a, grid.cells(), "l1_distance");
  require_length(b, grid.cells(), "l1_distance");
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double x = grid.centers[j];
    if (x >= lo && x <= hi) acc += std::abs(a[j] - b[j]);
  }
  return grid.dx * acc;
}

double total_variation(std::span<const double> q) {
  if (q.empty()) return 0.0;
  double tv = std::abs(q.front()) + std::abs(q.back());
  for (std::size_t j = 1; j < q.size(); ++j) tv += std::abs(q[j] - q[j - 1]);
  return tv;
}

}  // namespace nlcl
