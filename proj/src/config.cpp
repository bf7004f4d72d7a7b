#include "nlcl/config.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nlcl {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

double to_real(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: expected a finite number, got '{}'", field, raw));
  }
  return v;
}

long long to_integer(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", field, raw));
  }
  return v;
}

bool to_bool(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: expected true/false, got '{}'", field, raw));
}

std::vector<double> to_real_list(const std::string& field, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(field, item));
  if (out.empty()) throw ConfigError(fmt::format("{}: empty list", field));
  return out;
}

Scenario to_scenario(const std::string& field, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "track_qd1") return Scenario::track_qd1;
  if (s == "track_qd2") return Scenario::track_qd2;
  if (s == "track_qd3") return Scenario::track_qd3;
  if (s == "custom") return Scenario::custom;
  throw ConfigError(fmt::format("{}: unknown scenario '{}'", field, raw));
}

using Setter = std::function<void(ExperimentConfig&, const std::string& field, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  using C = ExperimentConfig;
  using S = std::string;
  static const std::map<std::string, Setter> table = {
      {"experiment.scenario", [](C& c, const S& f, const S& v) { c.scenario = to_scenario(f, v); }},
      {"experiment.objective",
       [](C& c, const S& f, const S& v) {
         try {
           c.objective = objective_from_string(trim(v));
         } catch (const ValidationError& e) {
           throw ConfigError(fmt::format("{}: {}", f, e.what()));
         }
       }},
      {"experiment.eta", [](C& c, const S& f, const S& v) { c.eta_list = to_real_list(f, v); }},
      {"experiment.q_max", [](C& c, const S& f, const S& v) { c.q_max = to_real(f, v); }},
      {"experiment.seed",
       [](C& c, const S& f, const S& v) {
         const long long s = to_integer(f, v);
         if (s < 0) throw ConfigError(fmt::format("{}: must be non-negative", f));
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"experiment.output_dir", [](C& c, const S&, const S& v) { c.output_dir = trim(v); }},
      {"experiment.target_csv", [](C& c, const S&, const S& v) { c.target_csv = trim(v); }},
      {"experiment.workers",
       [](C& c, const S& f, const S& v) { c.workers = static_cast<int>(to_integer(f, v)); }},
      {"grid.x_lo", [](C& c, const S& f, const S& v) { c.grid.x_lo = to_real(f, v); }},
      {"grid.x_hi", [](C& c, const S& f, const S& v) { c.grid.x_hi = to_real(f, v); }},
      {"grid.dx", [](C& c, const S& f, const S& v) { c.grid.dx = to_real(f, v); }},
      {"grid.T", [](C& c, const S& f, const S& v) { c.grid.T = to_real(f, v); }},
      {"grid.dt_hint", [](C& c, const S& f, const S& v) { c.grid.dt_hint = to_real(f, v); }},
      {"grid.cfl_safety", [](C& c, const S& f, const S& v) { c.cfl_safety = to_real(f, v); }},
      {"grid.l1_lo", [](C& c, const S& f, const S& v) { c.l1_lo = to_real(f, v); }},
      {"grid.l1_hi", [](C& c, const S& f, const S& v) { c.l1_hi = to_real(f, v); }},
      {"model.velocity_intercept",
       [](C& c, const S& f, const S& v) { c.velocity_intercept = to_real(f, v); }},
      {"model.velocity_slope", [](C& c, const S& f, const S& v) { c.velocity_slope = to_real(f, v); }},
      {"optimizer.armijo_c", [](C& c, const S& f, const S& v) { c.optimizer.armijo_c = to_real(f, v); }},
      {"optimizer.backtrack_factor",
       [](C& c, const S& f, const S& v) { c.optimizer.backtrack_factor = to_real(f, v); }},
      {"optimizer.initial_step",
       [](C& c, const S& f, const S& v) { c.optimizer.initial_step = to_real(f, v); }},
      {"optimizer.max_iters",
       [](C& c, const S& f, const S& v) { c.optimizer.max_iters = static_cast<int>(to_integer(f, v)); }},
      {"optimizer.grad_tol", [](C& c, const S& f, const S& v) { c.optimizer.grad_tol = to_real(f, v); }},
      {"optimizer.obj_tol", [](C& c, const S& f, const S& v) { c.optimizer.obj_tol = to_real(f, v); }},
      {"optimizer.obj_window",
       [](C& c, const S& f, const S& v) { c.optimizer.obj_window = static_cast<int>(to_integer(f, v)); }},
      {"optimizer.max_backtracks",
       [](C& c, const S& f, const S& v) {
         c.optimizer.max_backtracks = static_cast<int>(to_integer(f, v));
       }},
      {"optimizer.bb_warm_start",
       [](C& c, const S& f, const S& v) { c.optimizer.bb_warm_start = to_bool(f, v); }},
      {"optimizer.tikhonov", [](C& c, const S& f, const S& v) { c.optimizer.tikhonov = to_real(f, v); }},
      {"optimizer.l2_metric", [](C& c, const S& f, const S& v) { c.optimizer.l2_metric = to_bool(f, v); }},
      {"solve.initial", [](C& c, const S&, const S& v) { c.initial = trim(v); }},
      {"solve.snapshots",
       [](C& c, const S& f, const S& v) { c.snapshots = static_cast<int>(to_integer(f, v)); }},
      {"solve.binary_trajectory",
       [](C& c, const S& f, const S& v) { c.binary_trajectory = to_bool(f, v); }},
      {"solve.validate", [](C& c, const S& f, const S& v) { c.validate_solution = to_bool(f, v); }},
      {"gradcheck.samples",
       [](C& c, const S& f, const S& v) { c.gradcheck_samples = static_cast<int>(to_integer(f, v)); }},
      {"gradcheck.full", [](C& c, const S& f, const S& v) { c.gradcheck_full = to_bool(f, v); }},
      {"gradcheck.dx", [](C& c, const S& f, const S& v) { c.gradcheck_dx = to_real(f, v); }},
      {"gradcheck.T", [](C& c, const S& f, const S& v) { c.gradcheck_T = to_real(f, v); }},
      {"gradcheck.control", [](C& c, const S&, const S& v) { c.gradcheck_control = trim(v); }},
      {"gradcheck.self_tracking",
       [](C& c, const S& f, const S& v) { c.gradcheck_self_tracking = to_bool(f, v); }},
      {"gradcheck.tol", [](C& c, const S& f, const S& v) { c.gradcheck_tol = to_real(f, v); }},
      {"sweep.singular_limit",
       [](C& c, const S& f, const S& v) { c.sweep_singular_limit = to_bool(f, v); }},
  };
  return table;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw SolverError("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::track_qd1: return "track_qd1";
    case Scenario::track_qd2: return "track_qd2";
    case Scenario::track_qd3: return "track_qd3";
    case Scenario::custom: return "custom";
  }
  return "unknown";
}

TargetKind target_kind(Scenario s) {
  switch (s) {
    case Scenario::track_qd1: return TargetKind::indicator;
    case Scenario::track_qd2: return TargetKind::nonlocal_solution;
    case Scenario::track_qd3: return TargetKind::ramp;
    case Scenario::custom: return TargetKind::custom_csv;
  }
  return TargetKind::indicator;
}

void ExperimentConfig::validate() const {
  if (eta_list.empty()) throw ConfigError("experiment.eta: list must not be empty");
  for (double eta : eta_list) {
    if (!(eta > 0.0)) throw ConfigError(fmt::format("experiment.eta: {} is not positive", eta));
  }
  if (!(q_max > 0.0)) throw ConfigError("experiment.q_max: must be positive");
  if (workers < 1) throw ConfigError("experiment.workers: must be at least 1");
  if (scenario == Scenario::custom && target_csv.empty()) {
    throw ConfigError("experiment.target_csv: required for scenario = custom");
  }
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("grid.cfl_safety: must lie in (0, 1]");
  if (!(l1_hi > l1_lo)) throw ConfigError("grid.l1_hi: must exceed grid.l1_lo");
  try {
    (void)build_grid(grid);
    if (gradcheck_dx > 0.0 || gradcheck_T > 0.0) {
      GridSpec coarse = grid;
      if (gradcheck_dx > 0.0) coarse.dx = gradcheck_dx;
      if (gradcheck_T > 0.0) coarse.T = gradcheck_T;
      (void)build_grid(coarse);
    }
    optimizer.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (gradcheck_dx < 0.0 || gradcheck_T < 0.0) throw ConfigError("gradcheck.dx/T: must be non-negative");
  if (snapshots < 0) throw ConfigError("solve.snapshots: must be non-negative");
  if (gradcheck_samples < 1) throw ConfigError("gradcheck.samples: must be positive");
  if (!(gradcheck_tol > 0.0)) throw ConfigError("gradcheck.tol: must be positive");
  if (gradcheck_control != "random" && gradcheck_control != "zero" &&
      gradcheck_control != "indicator") {
    throw ConfigError(fmt::format("gradcheck.control: unknown value '{}'", gradcheck_control));
  }
  if (initial != "zero" && initial != "indicator" && initial != "ramp" &&
      initial.rfind("csv:", 0) != 0) {
    throw ConfigError(fmt::format("solve.initial: unknown value '{}'", initial));
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }

  ExperimentConfig config;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside of any section", source, section));
    }
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const auto it = table.find(field);
      if (it == table.end()) throw ConfigError(fmt::format("{}: unknown field '{}'", source, field));
      try {
        it->second(config, field, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", source, e.what()));
      }
    }
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = parse_config(buffer.str(), path.string());
  if (!config.target_csv.empty() && config.target_csv.is_relative()) {
    config.target_csv = path.parent_path() / config.target_csv;
  }
  return config;
}

std::string canonical_config(const ExperimentConfig& c) {
  std::string eta;
  for (std::size_t i = 0; i < c.eta_list.size(); ++i) {
    eta += (i ? "," : "") + num(c.eta_list[i]);
  }
  const OptimizerConfig& o = c.optimizer;
  std::string out;
  auto line = [&out](std::string_view k, const std::string& v) { out += fmt::format("{} = {}\n", k, v); };
  line("experiment.scenario", std::string(to_string(c.scenario)));
  line("experiment.objective", std::string(to_string(c.objective)));
  line("experiment.eta", eta);
  line("experiment.q_max", num(c.q_max));
  line("experiment.seed", std::to_string(c.seed));
  line("experiment.target_csv", c.target_csv.string());
  line("grid.x_lo", num(c.grid.x_lo));
  line("grid.x_hi", num(c.grid.x_hi));
  line("grid.dx", num(c.grid.dx));
  line("grid.T", num(c.grid.T));
  line("grid.dt_hint", num(c.grid.dt_hint));
  line("grid.cfl_safety", num(c.cfl_safety));
  line("grid.l1_lo", num(c.l1_lo));
  line("grid.l1_hi", num(c.l1_hi));
  line("model.velocity_intercept", num(c.velocity_intercept));
  line("model.velocity_slope", num(c.velocity_slope));
  line("optimizer.armijo_c", num(o.armijo_c));
  line("optimizer.backtrack_factor", num(o.backtrack_factor));
  line("optimizer.initial_step", num(o.initial_step));
  line("optimizer.max_iters", std::to_string(o.max_iters));
  line("optimizer.grad_tol", num(o.grad_tol));
  line("optimizer.obj_tol", num(o.obj_tol));
  line("optimizer.obj_window", std::to_string(o.obj_window));
  line("optimizer.max_backtracks", std::to_string(o.max_backtracks));
  line("optimizer.bb_warm_start", o.bb_warm_start ? "true" : "false");
  line("optimizer.tikhonov", num(o.tikhonov));
  line("optimizer.l2_metric", o.l2_metric ? "true" : "false");
  line("solve.initial", c.initial);
  line("solve.snapshots", std::to_string(c.snapshots));
  line("solve.binary_trajectory", c.binary_trajectory ? "true" : "false");
  line("solve.validate", c.validate_solution ? "true" : "false");
  line("gradcheck.samples", std::to_string(c.gradcheck_samples));
  line("gradcheck.full", c.gradcheck_full ? "true" : "false");
  line("gradcheck.dx", num(c.gradcheck_dx));
  line("gradcheck.T", num(c.gradcheck_T));
  line("gradcheck.control", c.gradcheck_control);
  line("gradcheck.self_tracking", c.gradcheck_self_tracking ? "true" : "false");
  line("gradcheck.tol", num(c.gradcheck_tol));
  line("sweep.singular_limit", c.sweep_singular_limit ? "true" : "false");
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(canonical_config(config)).substr(0, 16);
}

}  // namespace nlcl
