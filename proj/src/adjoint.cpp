#include "nlcl/adjoint.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "nlcl/nonlocal.hpp"

namespace nlcl {

namespace {

constexpr std::size_t kParallelCells = 4096;

void check_finite(std::span<const double> row, std::size_t n) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!std::isfinite(row[j])) {
      throw SolverError(fmt::format("adjoint solve: non-finite value at level {}, cell {}", n, j));
    }
  }
}

}  // namespace

std::vector<double> adjoint_step(std::span<const double> q_row, std::span<const double> p_next,
                                 const Discretization& disc) {
  const std::size_t n = disc.grid.cells();
  require_length(q_row, n, "adjoint_step state row");
  require_length(p_next, n, "adjoint_step adjoint row");
  if (n < 3) throw ValidationError("adjoint_step: need at least three cells");

  const double diff = disc.params.alpha * disc.grid.dt / (2.0 * disc.grid.dx);
  const double adv = disc.grid.dt / (2.0 * disc.grid.dx);
  const Velocity& V = disc.velocity;
  const std::size_t P = n - 1;

  const std::vector<double> W = nonlocal_fast(q_row, disc.kernel);

  // Only interior cells are updated by the scheme, so only their adjoints
  // propagate.
  std::vector<double> p(n, 0.0);
  for (std::size_t j = 1; j < P; ++j) p[j] = p_next[j];

  // upstream[l]   = q_l     V'(W_l)     p_{l+1}, l = 0..P-2
  // downstream[l] = q_{l+2} V'(W_{l+2}) p_{l+1}, l = 0..P-2
  std::vector<double> upstream(n, 0.0);
  std::vector<double> downstream(n, 0.0);
  for (std::size_t l = 0; l + 2 <= P; ++l) {
    upstream[l] = q_row[l] * V.derivative(W[l]) * p[l + 1];
    downstream[l] = q_row[l + 2] * V.derivative(W[l + 2]) * p[l + 1];
  }
  const std::vector<double> up_conv = nonlocal_transpose(upstream, disc.kernel);
  const std::vector<double> down_conv = nonlocal_transpose(downstream, disc.kernel);

  std::vector<double> out(n);
  const auto last = static_cast<std::ptrdiff_t>(P);
#pragma omp parallel for schedule(static) if (n >= kParallelCells)
  for (std::ptrdiff_t i = 0; i <= last; ++i) {
    const double pm = i > 0 ? p[i - 1] : 0.0;
    const double pc = p[i];
    const double pp = i < last ? p[i + 1] : 0.0;
    const double shifted = i >= 2 ? down_conv[i - 2] : 0.0;
    out[i] = pc + diff * (pm - 2.0 * pc + pp) + adv * V(W[i]) * (pp - pm) +
             adv * (up_conv[i] - shifted);
  }
  return out;
}

AdjointTrajectory solve_adjoint(const StateTrajectory& traj,
                                std::span<const double> terminal_condition,
                                const Discretization& disc) {
  const std::size_t rows = traj.q.rows();
  if (rows != static_cast<std::size_t>(disc.grid.N) + 1) {
    throw ValidationError(fmt::format("solve_adjoint: trajectory has {} rows, expected {}", rows,
                                      disc.grid.N + 1));
  }
  require_length(terminal_condition, disc.grid.cells(), "solve_adjoint terminal condition");

  AdjointTrajectory adj;
  adj.p = Matrix(rows, disc.grid.cells());
  std::copy(terminal_condition.begin(), terminal_condition.end(), adj.p.row(rows - 1).begin());
  check_finite(adj.p.row(rows - 1), rows - 1);
  for (std::size_t n = rows - 1; n-- > 0;) {
    const std::vector<double> row = adjoint_step(traj.q.row(n), adj.p.row(n + 1), disc);
    check_finite(row, n);
    std::copy(row.begin(), row.end(), adj.p.row(n).begin());
  }
  return adj;
}

AdjointTrajectory solve_adjoint(const StateTrajectory& traj, const ObjectiveSpec& spec,
                                const Discretization& disc) {
  const std::vector<double> terminal = terminal_adjoint(spec, traj.terminal(), disc);
  return solve_adjoint(traj, terminal, disc);
}

double composed_objective(std::span<const double> q0, const ObjectiveSpec& spec,
                          const Discretization& disc) {
  return eval_objective(spec, solve_forward_terminal(q0, disc), disc);
}

std::vector<double> fd_gradient(std::span<const double> q0, const ObjectiveSpec& spec,
                                const Discretization& disc, std::span<const int> indices,
                                double rel_step) {
  require_length(q0, disc.grid.cells(), "fd_gradient");
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= q0.size()) {
      throw ValidationError(fmt::format("fd_gradient: index {} out of range", idx));
    }
  }
  std::vector<double> out(indices.size());
  const auto count = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto j = static_cast<std::size_t>(indices[k]);
    const double h = rel_step * std::max(1.0, std::abs(q0[j]));
    std::vector<double> probe(q0.begin(), q0.end());
    probe[j] = q0[j] + h;
    const double up = composed_objective(probe, spec, disc);
    probe[j] = q0[j] - h;
    const double down = composed_objective(probe, spec, disc);
    // (q0 + h) - (q0 - h) is not exactly 2h in floating point.
    out[k] = (up - down) / ((q0[j] + h) - (q0[j] - h));
  }
  return out;
}

GradientReport gradient(const Control& control, const ObjectiveSpec& spec,
                        const Discretization& disc, std::span<const int> fd_indices,
                        const ForwardOptions& options) {
  const StateTrajectory traj = solve_forward(control, disc, options);
  const AdjointTrajectory adj = solve_adjoint(traj, spec, disc);

  GradientReport report;
  report.objective = eval_objective(spec, traj.terminal(), disc);
  const auto g = adj.p.row(0);
  report.gradient.assign(g.begin(), g.end());
  if (!fd_indices.empty()) {
    report.checked_indices.assign(fd_indices.begin(), fd_indices.end());
    report.fd_gradient = fd_gradient(control.q0, spec, disc, fd_indices);
    for (std::size_t k = 0; k < fd_indices.size(); ++k) {
      const double fd = report.fd_gradient[k];
      const double err =
          std::abs(report.gradient[fd_indices[k]] - fd) / std::max(std::abs(fd), 1e-12);
      report.max_rel_err = std::max(report.max_rel_err, err);
    }
  }
  return report;
}

}  // namespace nlcl
