#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlcl/grid.hpp"

namespace nlcl {

enum class TargetKind {
  indicator,          // chi_[0,1]
  nonlocal_solution,  // terminal state of the nonlocal law started from chi_[0,1]
  ramp,               // (1 - x) chi_[0,1]
  custom_csv,
};

struct Target {
  TargetKind kind = TargetKind::indicator;
  std::vector<double> values;  // q_d(x_j)
};

/// Builds the closed-form targets, or the nonlocal-solution target by a
/// forward solve over the discretization's horizon. The latter is cached per
/// (grid, eta, q_max, velocity), so repeated calls return identical vectors.
Target make_target(TargetKind kind, const Discretization& disc);

/// One value per line, P+1 lines; a non-numeric first line is a header.
Target load_target_csv(const std::filesystem::path& path, const Grid& grid);

enum class ObjectiveKind {
  nonlocal_tracking,  // (dx/2) sum_j (W_j[q^N] - W_j[q_d])^2
  state_tracking,     // (dx/2) sum_j (q^N_j - q_d(x_j))^2
};

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_from_string(std::string_view name);  // "J_W" | "J_q"
std::string_view to_string(TargetKind kind);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::state_tracking;
  Target target;
};

double eval_objective(const ObjectiveSpec& spec, std::span<const double> terminal_row,
                      const Discretization& disc);

/// Gradient of eval_objective with respect to the terminal row; the
/// terminal condition of the adjoint.
std::vector<double> terminal_adjoint(const ObjectiveSpec& spec,
                                     std::span<const double> terminal_row,
                                     const Discretization& disc);

}  // namespace nlcl
