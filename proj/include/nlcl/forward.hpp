#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nlcl/grid.hpp"
#include "nlcl/matrix.hpp"

namespace nlcl {

/// Initial datum sampled at cell centers, with box bounds [lower, upper].
struct Control {
  std::vector<double> q0;
  double lower = 0.0;
  double upper = 1.0;

  /// Throws ValidationError when an entry leaves the box.
  void validate() const;
};

/// Pointwise sampling q0(x_j). A center sitting exactly on a jump gets
/// whatever value the callable returns there; the indicator helpers below
/// use the right-continuous representative.
Control sample_control(const Grid& grid, const std::function<double(double)>& q0, double q_max);

/// chi_[a,b) evaluated right-continuously: 1 on [a, b), 0 elsewhere.
double indicator(double x, double a = 0.0, double b = 1.0);

/// Rows 0..N of the forward scheme. Row 0 is the sampled initial datum.
struct StateTrajectory {
  Matrix q;
  double dt = 0.0;
  double eta = 0.0;

  std::span<const double> terminal() const { return q.row(q.rows() - 1); }
};

struct ForwardOptions {
  bool validate = true;        // max-principle check after every step
  double tol_mp = 1e-9;
};

/// One step of the Lax-Friedrichs-type scheme for the nonlocal law.
/// Interior j = 1..P-1:
///   q'_j = q_j + (alpha dt / 2dx)(q_{j-1} - 2q_j + q_{j+1})
///        + (dt / 2dx)(q_{j-1} V(W_{j-1}) - q_{j+1} V(W_{j+1})),
/// boundary entries of the output are zero.
std::vector<double> step(std::span<const double> q_row, const Discretization& disc);

/// Allocation-free step; `W` is scratch of length P+1. Interior cells are
/// updated in parallel.
void step_into(std::span<const double> q_row, const Discretization& disc, std::span<double> W,
               std::span<double> out);

StateTrajectory solve_forward(const Control& control, const Discretization& disc,
                              const ForwardOptions& options = {});

/// Terminal row only, without storing the trajectory.
std::vector<double> solve_forward_terminal(std::span<const double> q0, const Discretization& disc);

/// dx * sum_j q_j.
double mass(std::span<const double> q_row, const Grid& grid);

}  // namespace nlcl
