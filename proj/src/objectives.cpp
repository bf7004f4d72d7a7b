#include "nlcl/objectives.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <map>
#include <mutex>

#include "nlcl/forward.hpp"
#include "nlcl/matrix.hpp"
#include "nlcl/nonlocal.hpp"

namespace nlcl {

namespace {

std::string cache_key(const Discretization& d) {
  return fmt::format("{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{:.17g}|{:.17g}|{}", d.grid.x_lo,
                     d.grid.x_hi, d.grid.dx, d.grid.T, d.grid.N, d.kernel.eta, d.params.q_max,
                     d.velocity.name());
}

std::vector<double> nonlocal_solution_target(const Discretization& disc) {
  static std::mutex mutex;
  static std::map<std::string, std::vector<double>> cache;

  const std::string key = cache_key(disc);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const Control start =
      sample_control(disc.grid, [](double x) { return indicator(x); }, disc.params.q_max);
  std::vector<double> values = solve_forward_terminal(start.q0, disc);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(values)).first->second;
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Target make_target(TargetKind kind, const Discretization& disc) {
  const Grid& g = disc.grid;
  Target t;
  t.kind = kind;
  t.values.resize(g.cells());
  switch (kind) {
    case TargetKind::indicator:
      for (std::size_t j = 0; j < g.cells(); ++j) t.values[j] = indicator(g.centers[j]);
      break;
    case TargetKind::ramp:
      for (std::size_t j = 0; j < g.cells(); ++j) {
        t.values[j] = (1.0 - g.centers[j]) * indicator(g.centers[j]);
      }
      break;
    case TargetKind::nonlocal_solution:
      t.values = nonlocal_solution_target(disc);
      break;
    case TargetKind::custom_csv:
      throw ValidationError("make_target: custom targets are loaded with load_target_csv");
  }
  return t;
}

Target load_target_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("target csv: cannot open {}", path.string()));
  Target t;
  t.kind = TargetKind::custom_csv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    double v = 0.0;
    if (!parse_double(line, v)) {
      if (line_no == 1) continue;  // header
      throw ValidationError(
          fmt::format("target csv {}:{}: not a number: '{}'", path.string(), line_no, line));
    }
    t.values.push_back(v);
  }
  if (t.values.size() != grid.cells()) {
    throw ValidationError(fmt::format("target csv {}: expected {} values, found {}",
                                      path.string(), grid.cells(), t.values.size()));
  }
  return t;
}

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::nonlocal_tracking ? "J_W" : "J_q";
}

ObjectiveKind objective_from_string(std::string_view name) {
  if (name == "J_W") return ObjectiveKind::nonlocal_tracking;
  if (name == "J_q") return ObjectiveKind::state_tracking;
  throw ValidationError(fmt::format("unknown objective '{}' (expected J_W or J_q)", name));
}

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::indicator: return "indicator";
    case TargetKind::nonlocal_solution: return "nonlocal_solution";
    case TargetKind::ramp: return "ramp";
    case TargetKind::custom_csv: return "custom_csv";
  }
  return "unknown";
}

double eval_objective(const ObjectiveSpec& spec, std::span<const double> terminal_row,
                      const Discretization& disc) {
  const std::size_t n = disc.grid.cells();
  require_length(terminal_row, n, "eval_objective");
  require_length(spec.target.values, n, "eval_objective target");

  std::vector<double> diff(n);
  for (std::size_t j = 0; j < n; ++j) diff[j] = terminal_row[j] - spec.target.values[j];
  if (spec.kind == ObjectiveKind::nonlocal_tracking) {
    // W is linear, so W[q^N] - W[q_d] = W[q^N - q_d].
    nonlocal_fast_into(std::vector<double>(diff), disc.kernel, diff);
  }
  double acc = 0.0;
  for (double d : diff) acc += d * d;
  return 0.5 * disc.grid.dx * acc;
}

std::vector<double> terminal_adjoint(const ObjectiveSpec& spec,
                                     std::span<const double> terminal_row,
                                     const Discretization& disc) {
  const std::size_t n = disc.grid.cells();
  require_length(terminal_row, n, "terminal_adjoint");
  require_length(spec.target.values, n, "terminal_adjoint target");

  std::vector<double> diff(n);
  for (std::size_t j = 0; j < n; ++j) diff[j] = terminal_row[j] - spec.target.values[j];
  if (spec.kind == ObjectiveKind::nonlocal_tracking) {
    const std::vector<double> Wd = nonlocal_fast(diff, disc.kernel);
    nonlocal_transpose_into(Wd, disc.kernel, diff);
  }
  for (double& d : diff) d *= disc.grid.dx;
  return diff;
}

}  // namespace nlcl
