#pragma once

#include <span>
#include <vector>

#include "nlcl/forward.hpp"
#include "nlcl/objectives.hpp"

namespace nlcl {

/// Backward variables p_j^n, n = 0..N. Row 0 is the gradient with respect
/// to the initial datum.
struct AdjointTrajectory {
  Matrix p;
};

/// One backward level: p^n from q^n and p^{n+1}. This is the transpose of
/// the linearized forward step, i.e. p_i^n = sum_{j=1}^{P-1} p_j^{n+1}
/// dq_j^{n+1}/dq_i^n. The two kernel-weighted sums over V'(W) are causal
/// geometric convolutions and are evaluated in O(P) by recursion.
std::vector<double> adjoint_step(std::span<const double> q_row, std::span<const double> p_next,
                                 const Discretization& disc);

/// Backward sweep from an arbitrary terminal condition; linear in it.
AdjointTrajectory solve_adjoint(const StateTrajectory& traj,
                                std::span<const double> terminal_condition,
                                const Discretization& disc);

AdjointTrajectory solve_adjoint(const StateTrajectory& traj, const ObjectiveSpec& spec,
                                const Discretization& disc);

struct GradientReport {
  std::vector<double> gradient;
  std::vector<double> fd_gradient;  // empty unless a check was requested
  std::vector<int> checked_indices;
  double max_rel_err = 0.0;
  double objective = 0.0;
};

/// G(q0) = objective of the terminal state of the forward solve.
double composed_objective(std::span<const double> q0, const ObjectiveSpec& spec,
                          const Discretization& disc);

/// Central differences of composed_objective with step 1e-6 max(1, |q0_j|),
/// for each listed index. Indices are processed in parallel.
std::vector<double> fd_gradient(std::span<const double> q0, const ObjectiveSpec& spec,
                                const Discretization& disc, std::span<const int> indices,
                                double rel_step = 1e-6);

/// Forward solve, backward sweep, and (when `fd_indices` is non-empty) a
/// finite-difference check. max_rel_err = max |g - g_fd| / max(|g_fd|, 1e-12).
GradientReport gradient(const Control& control, const ObjectiveSpec& spec,
                        const Discretization& disc, std::span<const int> fd_indices = {},
                        const ForwardOptions& options = {});

}  // namespace nlcl
