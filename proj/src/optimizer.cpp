#include "nlcl/optimizer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "nlcl/adjoint.hpp"

namespace nlcl {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<double> projected_point(std::span<const double> q, std::span<const double> g,
                                    double step, double lower, double upper) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = std::clamp(q[i] - step * g[i], lower, upper);
  }
  return out;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace

std::vector<double> project(std::span<const double> v, double lower, double upper) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(),
                 [=](double x) { return std::clamp(x, lower, upper); });
  return out;
}

void OptimizerConfig::validate() const {
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ValidationError("optimizer: armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ValidationError("optimizer: backtrack_factor must lie in (0, 1)");
  }
  if (!(initial_step > 0.0)) throw ValidationError("optimizer: initial_step must be positive");
  if (max_iters < 0) throw ValidationError("optimizer: max_iters must be non-negative");
  if (obj_tol < 0.0) throw ValidationError("optimizer: obj_tol must be non-negative");
  if (obj_window < 1) throw ValidationError("optimizer: obj_window must be positive");
  if (max_backtracks < 1) throw ValidationError("optimizer: max_backtracks must be positive");
  if (tikhonov < 0.0) throw ValidationError("optimizer: tikhonov weight must be non-negative");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::obj_tol: return "obj_tol";
    case StopReason::line_search_failed: return "line_search_failed";
    case StopReason::no_descent_at_start: return "no descent direction at initial point";
  }
  return "unknown";
}

OptimizationResult optimize(const SmoothObjective& objective, const OptimizerConfig& config,
                            const Control& init, const IterationCallback& on_iteration) {
  config.validate();
  init.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const double lo = init.lower;
  const double hi = init.upper;
  const double scale = objective.direction_scale;
  const double grad_tol =
      config.grad_tol > 0.0 ? config.grad_tol : 1e-8 * std::sqrt(static_cast<double>(init.q0.size()));

  OptimizationResult result;
  result.control = init;
  std::vector<double>& q = result.control.q0;
  std::vector<double> grad;
  double J = objective.value_and_gradient(q, grad);

  auto stationarity = [&](std::span<const double> x, std::span<const double> g) {
    return distance(x, projected_point(x, g, scale, lo, hi));
  };

  auto record = [&](IterationRecord rec) {
    rec.wall_time = elapsed();
    result.log.push_back(rec);
    if (on_iteration) on_iteration(result.log.back());
  };

  double pg = stationarity(q, grad);
  record({0, J, 0.0, 0, pg, 0.0});
  result.objective = J;

  double step = config.initial_step;
  std::vector<double> prev_q;
  std::vector<double> prev_grad;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (pg <= grad_tol) {
      result.reason = StopReason::grad_tol;
      return result;
    }

    if (config.bb_warm_start && !prev_q.empty()) {
      double ss = 0.0;
      double sy = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double s = q[i] - prev_q[i];
        const double y = scale * (grad[i] - prev_grad[i]);
        ss += s * s;
        sy += s * y;
      }
      step = sy > 0.0 ? ss / sy : config.initial_step;
    } else {
      step = config.initial_step;
    }

    bool accepted = false;
    int backtracks = 0;
    std::vector<double> trial;
    double J_trial = 0.0;
    for (; backtracks <= config.max_backtracks; ++backtracks) {
      trial = projected_point(q, grad, step * scale, lo, hi);
      J_trial = objective.value(trial);
      std::vector<double> moved(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) moved[i] = q[i] - trial[i];
      const double decrease = dot(grad, moved);
      if (std::isfinite(J_trial) && J_trial < J && J_trial <= J - config.armijo_c * decrease) {
        accepted = true;
        break;
      }
      step *= config.backtrack_factor;
    }
    if (!accepted) {
      result.reason = iter == 1 ? StopReason::no_descent_at_start : StopReason::line_search_failed;
      return result;
    }

    prev_q = q;
    prev_grad = grad;
    q = std::move(trial);
    J = objective.value_and_gradient(q, grad);
    pg = stationarity(q, grad);
    result.objective = J;
    record({iter, J, step, backtracks, pg, 0.0});

    const auto w = static_cast<std::size_t>(config.obj_window);
    if (result.log.size() > w) {
      const double old = result.log[result.log.size() - 1 - w].objective;
      if (old - J <= config.obj_tol * std::abs(old)) {
        result.reason = StopReason::obj_tol;
        return result;
      }
    }
  }
  result.reason = pg <= grad_tol ? StopReason::grad_tol : StopReason::max_iters;
  return result;
}

SmoothObjective make_control_objective(const ObjectiveSpec& spec, const Discretization& disc,
                                       const OptimizerConfig& config) {
  const double tik = config.tikhonov;
  const double dx = disc.grid.dx;
  auto penalty = [tik, dx](std::span<const double> q0) {
    return tik > 0.0 ? 0.5 * tik * dx * dot(q0, q0) : 0.0;
  };

  SmoothObjective obj;
  obj.direction_scale = config.l2_metric ? 1.0 / dx : 1.0;
  obj.value = [&spec, &disc, penalty](std::span<const double> q0) {
    return composed_objective(q0, spec, disc) + penalty(q0);
  };
  obj.value_and_gradient = [&spec, &disc, penalty, tik, dx](std::span<const double> q0,
                                                             std::vector<double>& grad) {
    Control c;
    c.q0.assign(q0.begin(), q0.end());
    c.lower = -std::numeric_limits<double>::infinity();
    c.upper = std::numeric_limits<double>::infinity();
    const GradientReport report = gradient(c, spec, disc, {}, ForwardOptions{.validate = false});
    grad = report.gradient;
    if (tik > 0.0) {
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += tik * dx * q0[i];
    }
    return report.objective + penalty(q0);
  };
  return obj;
}

OptimizationResult optimize(const ObjectiveSpec& spec, const OptimizerConfig& config,
                            const Discretization& disc, const Control& init,
                            const IterationCallback& on_iteration) {
  require_length(init.q0, disc.grid.cells(), "optimize initial control");
  return optimize(make_control_objective(spec, disc, config), config, init, on_iteration);
}

Control zero_control(const Grid& grid, double q_max) {
  Control c;
  c.q0.assign(grid.cells(), 0.0);
  c.upper = q_max;
  return c;
}

}  // namespace nlcl
