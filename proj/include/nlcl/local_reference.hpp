#pragma once

#include <span>
#include <string>
#include <vector>

#include "nlcl/grid.hpp"
#include "nlcl/matrix.hpp"

namespace nlcl {

/// Entropy solution of the local law q_t + (q V(q))_x = 0 on the same
/// spatial mesh, with its own time step.
struct LocalTrajectory {
  Matrix q;  // rows 0..M
  double dt = 0.0;
  int steps = 0;
  /// "godunov-concave", "godunov-convex" or "lax-friedrichs" when the flux
  /// changes convexity on [0, q_max] and the fallback was used.
  std::string flux_scheme;
  bool used_fallback = false;

  std::span<const double> terminal() const { return q.row(q.rows() - 1); }
};

struct LocalOptions {
  double cfl_safety = 0.9;
  int flux_samples = 2001;
};

/// Godunov scheme with the exact Riemann flux of f(q) = q V(q) (closed form
/// for fluxes that are concave or convex on [0, q_max]); zero Dirichlet ghost
/// cells on both sides; dt = T / ceil(T / (cfl dx / max |f'|)).
LocalTrajectory solve_local(std::span<const double> q0, const Grid& grid, const Velocity& V,
                            double q_max, double T, const LocalOptions& options = {});

/// dx * sum_j |a_j - b_j| over cells whose centers lie in [lo, hi].
double l1_distance(std::span<const double> a, std::span<const double> b, const Grid& grid,
                   double lo, double hi);

/// sum_j |q_{j+1} - q_j| including the jumps to the zero ghost cells.
double total_variation(std::span<const double> q);

}  // namespace nlcl
