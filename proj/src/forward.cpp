#include "nlcl/forward.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "nlcl/nonlocal.hpp"

namespace nlcl {

namespace {

constexpr std::size_t kParallelCells = 4096;

void check_finite(std::span<const double> row, int n) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!std::isfinite(row[j])) {
      throw SolverError(fmt::format("forward solve: non-finite value at step {}, cell {}", n, j));
    }
  }
}

void check_max_principle(std::span<const double> row, int n, double q_max, double tol) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] < -tol || row[j] > q_max + tol) {
      throw SolverError(fmt::format(
          "forward solve: max principle violated at step {}, cell {} (value {:.17g}, bounds "
          "[0, {}]); the time step interpretation does not hold for this setup",
          n, j, row[j], q_max));
    }
  }
}

}  // namespace

void Control::validate() const {
  if (!(lower <= upper)) throw ValidationError("control: lower bound exceeds upper bound");
  for (std::size_t j = 0; j < q0.size(); ++j) {
    if (!(q0[j] >= lower && q0[j] <= upper)) {
      throw ValidationError(
          fmt::format("control: entry {} = {} outside [{}, {}]", j, q0[j], lower, upper));
    }
  }
}

double indicator(double x, double a, double b) { return (x >= a && x < b) ? 1.0 : 0.0; }

Control sample_control(const Grid& grid, const std::function<double(double)>& q0, double q_max) {
  Control c;
  c.upper = q_max;
  c.q0.resize(grid.cells());
  for (std::size_t j = 0; j < c.q0.size(); ++j) c.q0[j] = q0(grid.centers[j]);
  return c;
}

void step_into(std::span<const double> q_row, const Discretization& disc, std::span<double> W,
               std::span<double> out) {
  const std::size_t n = disc.grid.cells();
  require_length(q_row, n, "step");
  require_length(out, n, "step output");
  nonlocal_fast_into(q_row, disc.kernel, W);

  const double diff = disc.params.alpha * disc.grid.dt / (2.0 * disc.grid.dx);
  const double adv = disc.grid.dt / (2.0 * disc.grid.dx);
  const Velocity& V = disc.velocity;
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(n) - 1;

#pragma omp parallel for schedule(static) if (n >= kParallelCells)
  for (std::ptrdiff_t j = 1; j < last; ++j) {
    const double qm = q_row[j - 1];
    const double q = q_row[j];
    const double qp = q_row[j + 1];
    out[j] = q + diff * (qm - 2.0 * q + qp) + adv * (qm * V(W[j - 1]) - qp * V(W[j + 1]));
  }
  out[0] = 0.0;
  out[n - 1] = 0.0;
}

std::vector<double> step(std::span<const double> q_row, const Discretization& disc) {
  std::vector<double> W(disc.grid.cells());
  std::vector<double> out(disc.grid.cells());
  step_into(q_row, disc, W, out);
  return out;
}

StateTrajectory solve_forward(const Control& control, const Discretization& disc,
                              const ForwardOptions& options) {
  const std::size_t cells = disc.grid.cells();
  require_length(control.q0, cells, "solve_forward initial datum");
  control.validate();
  if (!admits_time_step(disc.params, disc.grid.dx, disc.grid.dt)) {
    throw ValidationError(fmt::format("solve_forward: dt = {} violates the stability bound {}",
                                      disc.grid.dt, disc.params.dt_bound));
  }

  StateTrajectory traj;
  traj.dt = disc.grid.dt;
  traj.eta = disc.kernel.eta;
  traj.q = Matrix(static_cast<std::size_t>(disc.grid.N) + 1, cells);
  std::copy(control.q0.begin(), control.q0.end(), traj.q.row(0).begin());
  check_finite(traj.q.row(0), 0);

  std::vector<double> W(cells);
  const double bound = std::max(disc.params.q_max, control.upper);
  for (int n = 0; n < disc.grid.N; ++n) {
    auto next = traj.q.row(n + 1);
    step_into(traj.q.row(n), disc, W, next);
    check_finite(next, n + 1);
    if (options.validate) check_max_principle(next, n + 1, bound, options.tol_mp);
  }
  return traj;
}

std::vector<double> solve_forward_terminal(std::span<const double> q0, const Discretization& disc) {
  const std::size_t cells = disc.grid.cells();
  require_length(q0, cells, "solve_forward_terminal");
  std::vector<double> cur(q0.begin(), q0.end());
  std::vector<double> next(cells);
  std::vector<double> W(cells);
  for (int n = 0; n < disc.grid.N; ++n) {
    step_into(cur, disc, W, next);
    cur.swap(next);
  }
  check_finite(cur, disc.grid.N);
  return cur;
}

double mass(std::span<const double> q_row, const Grid& grid) {
  return grid.dx * std::accumulate(q_row.begin(), q_row.end(), 0.0);
}

}  // namespace nlcl
