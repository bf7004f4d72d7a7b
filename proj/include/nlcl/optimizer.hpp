#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "nlcl/forward.hpp"
#include "nlcl/objectives.hpp"

namespace nlcl {

/// Componentwise clamp to [lower, upper].
std::vector<double> project(std::span<const double> v, double lower, double upper);

struct OptimizerConfig {
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  int max_iters = 2000;
  double grad_tol = -1.0;  // <= 0 selects 1e-8 sqrt(P+1)
  double obj_tol = 1e-12;  // relative decrease over `obj_window` iterations
  int obj_window = 5;
  int max_backtracks = 40;
  /// Start each line search from the Barzilai-Borwein step instead of
  /// initial_step.
  bool bb_warm_start = false;
  /// Optional (tikhonov dx / 2) |q0|^2 added to the objective.
  double tikhonov = 0.0;
  /// Search direction is the gradient in the dx-weighted L2 inner product,
  /// g / dx, rather than the Euclidean gradient g.
  bool l2_metric = true;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double step = 0.0;
  int backtracks = 0;
  double projected_grad_norm = 0.0;
  double wall_time = 0.0;  // seconds since the start of the run
};

using IterationLog = std::vector<IterationRecord>;

enum class StopReason {
  max_iters,
  grad_tol,
  obj_tol,
  line_search_failed,
  no_descent_at_start,
};

std::string_view to_string(StopReason reason);

struct OptimizationResult {
  Control control;
  IterationLog log;
  StopReason reason = StopReason::max_iters;
  double objective = 0.0;
};

/// Smooth objective over the box: value, and value plus Euclidean gradient.
struct SmoothObjective {
  std::function<double(std::span<const double>)> value;
  std::function<double(std::span<const double>, std::vector<double>& grad)> value_and_gradient;
  /// Scale applied to the gradient to get the search direction.
  double direction_scale = 1.0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Projected gradient descent with Armijo backtracking along the projection
/// arc: the trial point is project(q - s * scale * g) and it is accepted
/// once G(trial) <= G(q) - c <g, q - trial>. Every iterate is box-feasible
/// and accepted objective values strictly decrease.
OptimizationResult optimize(const SmoothObjective& objective, const OptimizerConfig& config,
                            const Control& init, const IterationCallback& on_iteration = {});

/// Objective of the control problem: forward solve plus tracking objective,
/// gradient by the discrete adjoint.
SmoothObjective make_control_objective(const ObjectiveSpec& spec, const Discretization& disc,
                                       const OptimizerConfig& config);

OptimizationResult optimize(const ObjectiveSpec& spec, const OptimizerConfig& config,
                            const Discretization& disc, const Control& init,
                            const IterationCallback& on_iteration = {});

/// Zero control with bounds [0, q_max].
Control zero_control(const Grid& grid, double q_max);

}  // namespace nlcl
