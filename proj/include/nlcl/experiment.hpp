#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "nlcl/config.hpp"
#include "nlcl/forward.hpp"

namespace nlcl {

/// Discretization of `config` for one eta.
Discretization make_discretization(const ExperimentConfig& config, double eta);

/// Initial datum named by solve.initial.
Control make_initial(const ExperimentConfig& config, const Grid& grid);

ObjectiveSpec make_objective(const ExperimentConfig& config, const Discretization& disc);

struct SingularLimitPoint {
  double eta = 0.0;
  double l1_W_to_local = 0.0;  // |W_eta[q_eta(T)] - q_local(T)|_{L1(I)}
  double l1_q_to_local = 0.0;  // |q_eta(T) - q_local(T)|_{L1(I)}
};

/// For a fixed initial datum, solves the nonlocal law for each eta and
/// compares against the local entropy solution on [l1_lo, l1_hi].
std::vector<SingularLimitPoint> singular_limit_study(const std::function<double(double)>& q0,
                                                     const GridSpec& grid, std::span<const double> etas,
                                                     const Velocity& V, double q_max,
                                                     double cfl_safety, double l1_lo, double l1_hi);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Output of one subcommand: its directory and the manifest written there.
struct CommandResult {
  std::filesystem::path dir;
  nlohmann::json manifest;
  bool ok = true;
};

// Each command writes under output_dir/<config-hash>/<command>/ and keeps
// manifest.json there up to date ("incomplete" until the end).
CommandResult cmd_solve(const ExperimentConfig& config);
CommandResult cmd_gradcheck(const ExperimentConfig& config);
CommandResult cmd_optimize(const ExperimentConfig& config);
CommandResult cmd_sweep_eta(const ExperimentConfig& config);

}  // namespace nlcl
