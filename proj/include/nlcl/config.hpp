#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nlcl/grid.hpp"
#include "nlcl/matrix.hpp"
#include "nlcl/objectives.hpp"
#include "nlcl/optimizer.hpp"

namespace nlcl {

/// Bad config file: syntax error (with line) or invalid field (with name).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Scenario { track_qd1, track_qd2, track_qd3, custom };

std::string_view to_string(Scenario s);
TargetKind target_kind(Scenario s);

/// Everything one experiment needs. The file format is described in README.md.
struct ExperimentConfig {
  Scenario scenario = Scenario::track_qd2;
  ObjectiveKind objective = ObjectiveKind::state_tracking;
  std::vector<double> eta_list{0.01};
  double q_max = 1.0;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "results";
  std::filesystem::path target_csv;
  int workers = 1;

  GridSpec grid;
  double cfl_safety = 0.9;
  double velocity_intercept = 1.0;  // V(w) = intercept + slope * w
  double velocity_slope = -1.0;
  double l1_lo = -0.6;              // comparison interval for L1 distances
  double l1_hi = 1.6;

  OptimizerConfig optimizer;

  // [solve]
  std::string initial = "indicator";  // zero | indicator | ramp | csv:<path>
  int snapshots = 8;
  bool binary_trajectory = false;
  bool validate_solution = true;

  // [gradcheck]
  int gradcheck_samples = 25;
  bool gradcheck_full = false;
  double gradcheck_dx = 0.0;  // 0 keeps the main grid
  double gradcheck_T = 0.0;
  std::string gradcheck_control = "random";  // random | zero | indicator
  bool gradcheck_self_tracking = false;
  double gradcheck_tol = 1e-5;

  // [sweep]
  bool sweep_singular_limit = true;

  Velocity velocity() const { return Velocity::affine(velocity_intercept, velocity_slope); }
  void validate() const;
};

ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Deterministic "section.key = value" listing of every field that affects
/// results (output_dir and workers excluded).
std::string canonical_config(const ExperimentConfig& config);

/// First 16 hex digits of the SHA-256 of canonical_config.
std::string config_hash(const ExperimentConfig& config);

}  // namespace nlcl
