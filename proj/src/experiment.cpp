#include "nlcl/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>

#include "nlcl/adjoint.hpp"
#include "nlcl/io.hpp"
#include "nlcl/local_reference.hpp"
#include "nlcl/nonlocal.hpp"
#include "nlcl/optimizer.hpp"

namespace nlcl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string eta_dirname(double eta) { return fmt::format("eta_{:g}", eta); }

/// manifest.json kept on disk; every save rewrites it through a temp file.
class Manifest {
 public:
  Manifest(fs::path dir, const ExperimentConfig& config, std::string_view command)
      : dir_(std::move(dir)), start_(Clock::now()) {
    json cfg = json::object();
    std::istringstream lines(canonical_config(config));
    std::string line;
    while (std::getline(lines, line)) {
      const auto eq = line.find(" = ");
      cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
    body_ = {
        {"command", command},
        {"config_hash", config_hash(config)},
        {"version", NLCL_VERSION},
        {"status", "incomplete"},
        {"config", cfg},
        {"interpretations", json::array()},
        {"runs", json::array()},
        {"artifacts", json::array()},
    };
  }

  void interpretation(std::string note) { body_["interpretations"].push_back(std::move(note)); }

  void add_run(json run) {
    std::lock_guard lock(mutex_);
    body_["runs"].push_back(std::move(run));
    save_locked();
  }

  void add_artifact(const std::string& relative) {
    std::lock_guard lock(mutex_);
    body_["artifacts"].push_back(relative);
  }

  void set(const std::string& key, json value) {
    std::lock_guard lock(mutex_);
    body_[key] = std::move(value);
  }

  void finish(bool complete) {
    std::lock_guard lock(mutex_);
    // Runs finish in any order when executed concurrently; list them by eta.
    auto& runs = body_["runs"];
    std::stable_sort(runs.begin(), runs.end(), [](const json& a, const json& b) {
      return a.value("eta", 0.0) < b.value("eta", 0.0);
    });
    body_["status"] = complete ? "complete" : "incomplete";
    body_["wall_time_s"] = seconds_since(start_);
    save_locked();
  }

  void save() {
    std::lock_guard lock(mutex_);
    save_locked();
  }

  const json& body() const { return body_; }

 private:
  void save_locked() {
    fs::create_directories(dir_);
    const fs::path tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp);
      out << body_.dump(2) << '\n';
    }
    fs::rename(tmp, dir_ / "manifest.json");
  }

  fs::path dir_;
  Clock::time_point start_;
  json body_;
  std::mutex mutex_;
};

fs::path command_dir(const ExperimentConfig& config, std::string_view command) {
  return config.output_dir / config_hash(config) / std::string(command);
}

json artifact_map(const fs::path& base, const std::vector<fs::path>& files) {
  json out = json::object();
  for (const auto& f : files) out[f.stem().string()] = fs::relative(f, base).generic_string();
  return out;
}

struct OptimizeOutcome {
  double eta = 0.0;
  std::vector<double> control;
  std::vector<double> terminal;
  std::vector<double> terminal_W;
  std::vector<double> target;
  double final_objective = 0.0;
  Grid grid;
};

OptimizeOutcome optimize_entry(const ExperimentConfig& config, double eta, const fs::path& base,
                               json& run) {
  const auto start = Clock::now();
  const Discretization disc = make_discretization(config, eta);
  const ObjectiveSpec spec = make_objective(config, disc);
  const fs::path dir = base / eta_dirname(eta);
  fs::create_directories(dir);

  const fs::path log_path = dir / "iterations.csv";
  io::IterationLogWriter log(log_path);
  const OptimizationResult result =
      optimize(spec, config.optimizer, disc, zero_control(disc.grid, config.q_max),
               [&log](const IterationRecord& rec) { log.append(rec); });

  OptimizeOutcome out;
  out.eta = eta;
  out.grid = disc.grid;
  out.control = result.control.q0;
  out.terminal = solve_forward_terminal(out.control, disc);
  out.terminal_W = nonlocal_fast(out.terminal, disc.kernel);
  out.target = spec.target.values;
  out.final_objective = result.objective;

  const std::vector<fs::path> files = {dir / "control.csv", dir / "terminal.csv",
                                       dir / "terminal_W.csv", dir / "target.csv", log_path,
                                       dir / "timing.csv"};
  io::write_profile_csv(files[0], disc.grid, "q0", out.control);
  io::write_profile_csv(files[1], disc.grid, "q_T", out.terminal);
  io::write_profile_csv(files[2], disc.grid, "W_T", out.terminal_W);
  io::write_profile_csv(files[3], disc.grid, "q_d", out.target);
  io::write_timing_csv(files[5], result.log);

  run["status"] = "complete";
  run["artifacts"] = artifact_map(base, files);
  run["metrics"] = {
      {"initial_objective", result.log.front().objective},
      {"final_objective", result.objective},
      {"iterations", static_cast<int>(result.log.size()) - 1},
      {"stop_reason", std::string(to_string(result.reason))},
      {"projected_grad_norm", result.log.back().projected_grad_norm},
      {"time_steps", disc.grid.N},
      {"dt", disc.grid.dt},
      {"alpha", disc.params.alpha},
  };
  run["wall_time_s"] = seconds_since(start);
  return out;
}

/// Runs the optimizations for every eta, up to config.workers at a time.
std::vector<std::optional<OptimizeOutcome>> run_optimizations(const ExperimentConfig& config,
                                                              const fs::path& base,
                                                              Manifest& manifest) {
  const auto count = static_cast<std::ptrdiff_t>(config.eta_list.size());
  std::vector<std::optional<OptimizeOutcome>> outcomes(config.eta_list.size());
#pragma omp parallel for schedule(dynamic) num_threads(config.workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double eta = config.eta_list[i];
    json run = {{"eta", eta}, {"dir", eta_dirname(eta)}};
    try {
      outcomes[i] = optimize_entry(config, eta, base, run);
    } catch (const std::exception& e) {
      run["status"] = "failed";
      run["error"] = e.what();
    }
    manifest.add_run(std::move(run));
  }
  return outcomes;
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace

Discretization make_discretization(const ExperimentConfig& config, double eta) {
  return discretize(config.grid, eta, config.velocity(), config.q_max, config.cfl_safety);
}

Control make_initial(const ExperimentConfig& config, const Grid& grid) {
  Control c;
  c.upper = config.q_max;
  if (config.initial == "zero") {
    c.q0.assign(grid.cells(), 0.0);
  } else if (config.initial == "indicator") {
    c = sample_control(grid, [](double x) { return indicator(x); }, config.q_max);
  } else if (config.initial == "ramp") {
    c = sample_control(grid, [](double x) { return (1.0 - x) * indicator(x); }, config.q_max);
  } else if (config.initial.rfind("csv:", 0) == 0) {
    c.q0 = load_target_csv(config.initial.substr(4), grid).values;
  } else {
    throw ConfigError(fmt::format("solve.initial: unknown value '{}'", config.initial));
  }
  c.validate();
  return c;
}

ObjectiveSpec make_objective(const ExperimentConfig& config, const Discretization& disc) {
  ObjectiveSpec spec;
  spec.kind = config.objective;
  if (config.scenario == Scenario::custom) {
    spec.target = load_target_csv(config.target_csv, disc.grid);
  } else {
    spec.target = make_target(target_kind(config.scenario), disc);
  }
  return spec;
}

std::vector<SingularLimitPoint> singular_limit_study(const std::function<double(double)>& q0,
                                                     const GridSpec& grid_spec,
                                                     std::span<const double> etas,
                                                     const Velocity& V, double q_max,
                                                     double cfl_safety, double l1_lo,
                                                     double l1_hi) {
  const Grid grid = build_grid(grid_spec);
  const Control start = sample_control(grid, q0, q_max);
  start.validate();
  const LocalTrajectory local = solve_local(start.q0, grid, V, q_max, grid_spec.T);
  const auto q_local = local.terminal();

  std::vector<SingularLimitPoint> out(etas.size());
  const auto count = static_cast<std::ptrdiff_t>(etas.size());
  std::vector<std::string> errors(etas.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const Discretization disc = discretize(grid_spec, etas[i], V, q_max, cfl_safety);
      const std::vector<double> terminal = solve_forward_terminal(start.q0, disc);
      const std::vector<double> W = nonlocal_fast(terminal, disc.kernel);
      out[i] = {etas[i], l1_distance(W, q_local, grid, l1_lo, l1_hi),
                l1_distance(terminal, q_local, grid, l1_lo, l1_hi)};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw SolverError("singular limit study: " + e);
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("loglog_slope: need two or more points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

CommandResult cmd_solve(const ExperimentConfig& config) {
  config.validate();
  const fs::path base = command_dir(config, "solve");
  Manifest manifest(base, config, "solve");
  manifest.save();

  bool ok = true;
  for (double eta : config.eta_list) {
    const auto start = Clock::now();
    json run = {{"eta", eta}, {"dir", eta_dirname(eta)}};
    try {
      const Discretization disc = make_discretization(config, eta);
      const Control control = make_initial(config, disc.grid);
      const StateTrajectory traj =
          solve_forward(control, disc, ForwardOptions{.validate = config.validate_solution});
      const fs::path dir = base / eta_dirname(eta);

      std::vector<fs::path> files = {dir / "trajectory.csv", dir / "terminal.csv",
                                     dir / "terminal_W.csv", dir / "mass.csv"};
      const auto rows = io::snapshot_rows(traj.q.rows(), config.snapshots);
      io::write_trajectory_csv(files[0], disc.grid, traj.q, traj.dt, rows);
      io::write_profile_csv(files[1], disc.grid, "q_T", traj.terminal());
      const std::vector<double> W = nonlocal_fast(traj.terminal(), disc.kernel);
      io::write_profile_csv(files[2], disc.grid, "W_T", W);
      {
        std::ofstream out(files[3]);
        out << "n,t,mass\n";
        for (std::size_t n = 0; n < traj.q.rows(); ++n) {
          out << n << ',' << io::format_double(disc.grid.time(static_cast<int>(n))) << ','
              << io::format_double(mass(traj.q.row(n), disc.grid)) << '\n';
        }
      }
      if (config.binary_trajectory) {
        files.push_back(dir / "trajectory.bin");
        io::write_trajectory_binary(files.back(), traj.q);
      }
      const auto term = traj.terminal();
      run["status"] = "complete";
      run["artifacts"] = artifact_map(base, files);
      run["metrics"] = {
          {"mass_initial", mass(traj.q.row(0), disc.grid)},
          {"mass_final", mass(term, disc.grid)},
          {"terminal_min", *std::min_element(term.begin(), term.end())},
          {"terminal_max", *std::max_element(term.begin(), term.end())},
          {"time_steps", disc.grid.N},
          {"dt", disc.grid.dt},
          {"alpha", disc.params.alpha},
      };
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      ok = false;
      run["status"] = "failed";
      run["error"] = e.what();
    }
    run["wall_time_s"] = seconds_since(start);
    manifest.add_run(std::move(run));
  }
  manifest.finish(ok);
  return {base, manifest.body(), ok};
}

CommandResult cmd_gradcheck(const ExperimentConfig& config) {
  config.validate();
  ExperimentConfig coarse = config;
  if (config.gradcheck_dx > 0.0) coarse.grid.dx = config.gradcheck_dx;
  if (config.gradcheck_T > 0.0) coarse.grid.T = config.gradcheck_T;

  const fs::path base = command_dir(config, "gradcheck");
  Manifest manifest(base, config, "gradcheck");
  manifest.save();

  bool ok = true;
  auto rng = make_rng(config.seed);
  for (double eta : config.eta_list) {
    const auto start = Clock::now();
    json run = {{"eta", eta}, {"dir", eta_dirname(eta)}};
    try {
      const Discretization disc = make_discretization(coarse, eta);
      const std::size_t cells = disc.grid.cells();

      Control control = zero_control(disc.grid, config.q_max);
      if (config.gradcheck_control == "random") {
        std::uniform_real_distribution<double> dist(0.1 * config.q_max, 0.9 * config.q_max);
        for (double& v : control.q0) v = dist(rng);
      } else if (config.gradcheck_control == "indicator") {
        control = sample_control(disc.grid, [](double x) { return indicator(x); }, config.q_max);
      }

      ObjectiveSpec spec;
      spec.kind = config.objective;
      if (config.gradcheck_self_tracking) {
        spec.target.kind = TargetKind::custom_csv;
        spec.target.values = solve_forward_terminal(control.q0, disc);
      } else {
        spec = make_objective(coarse, disc);
      }

      std::vector<int> indices(cells);
      for (std::size_t j = 0; j < cells; ++j) indices[j] = static_cast<int>(j);
      if (!config.gradcheck_full && static_cast<std::size_t>(config.gradcheck_samples) < cells) {
        for (std::size_t k = 0; k < static_cast<std::size_t>(config.gradcheck_samples); ++k) {
          std::uniform_int_distribution<std::size_t> pick(k, cells - 1);
          std::swap(indices[k], indices[pick(rng)]);
        }
        indices.resize(config.gradcheck_samples);
        std::sort(indices.begin(), indices.end());
      }
      if (config.gradcheck_self_tracking) indices.clear();

      const GradientReport report = gradient(control, spec, disc, indices);
      double inf_norm = 0.0;
      for (double g : report.gradient) inf_norm = std::max(inf_norm, std::abs(g));

      const bool passed = config.gradcheck_self_tracking ? inf_norm <= 1e-10
                                                         : report.max_rel_err <= config.gradcheck_tol;
      ok = ok && passed;

      const fs::path dir = base / eta_dirname(eta);
      const fs::path csv = dir / "gradient.csv";
      io::write_gradient_csv(csv, disc.grid, report);
      run["status"] = "complete";
      run["passed"] = passed;
      run["artifacts"] = artifact_map(base, {csv});
      run["metrics"] = {
          {"objective", report.objective},
          {"max_rel_err", report.max_rel_err},
          {"gradient_inf_norm", inf_norm},
          {"checked_indices", report.checked_indices.size()},
          {"cells", cells},
          {"time_steps", disc.grid.N},
      };
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      ok = false;
      run["status"] = "failed";
      run["error"] = e.what();
    }
    run["wall_time_s"] = seconds_since(start);
    manifest.add_run(std::move(run));
  }
  manifest.finish(true);
  return {base, manifest.body(), ok};
}

CommandResult cmd_optimize(const ExperimentConfig& config) {
  config.validate();
  const fs::path base = command_dir(config, "optimize");
  Manifest manifest(base, config, "optimize");
  manifest.save();
  const auto outcomes = run_optimizations(config, base, manifest);
  const bool ok = std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.has_value(); });
  manifest.finish(ok);
  return {base, manifest.body(), ok};
}

CommandResult cmd_sweep_eta(const ExperimentConfig& config) {
  config.validate();
  const fs::path base = command_dir(config, "sweep-eta");
  Manifest manifest(base, config, "sweep-eta");
  manifest.interpretation(
      fmt::format("L1 distances sum dx |a - b| over cells whose centers lie in [{}, {}]",
                  config.l1_lo, config.l1_hi));
  manifest.interpretation(
      "l1_W_to_local compares W_T with the local entropy solution from the same optimal q0; "
      "l1_W_to_local_indicator compares it with the local entropy solution from chi_[0,1]");
  manifest.save();

  const auto outcomes = run_optimizations(config, base, manifest);

  const OptimizeOutcome* smallest = nullptr;
  for (const auto& o : outcomes) {
    if (o && (!smallest || o->eta < smallest->eta)) smallest = &*o;
  }

  const Velocity V = config.velocity();
  const double lo = config.l1_lo;
  const double hi = config.l1_hi;

  // Entropy solution of the local law from chi_[0,1], the datum behind the
  // closed-form ramp target; compared with both the formula and each W_T.
  const Grid ref_grid = build_grid(config.grid);
  const Control chi = sample_control(ref_grid, [](double x) { return indicator(x); }, config.q_max);
  const LocalTrajectory chi_local = solve_local(chi.q0, ref_grid, V, config.q_max, config.grid.T);
  const auto q_chi = chi_local.terminal();
  if (config.scenario == Scenario::track_qd3) {
    const Discretization any = make_discretization(config, config.eta_list.front());
    const Target ramp = make_target(TargetKind::ramp, any);
    manifest.set("l1_local_indicator_to_ramp", l1_distance(q_chi, ramp.values, ref_grid, lo, hi));
  }

  const fs::path summary_path = base / "summary.csv";
  {
    std::ofstream out(summary_path);
    out << "eta,final_objective,l1_q0_to_smallest_eta,l1_W_to_local,l1_W_to_target,"
           "l1_local_to_target,l1_W_to_local_indicator\n";
    for (const auto& o : outcomes) {
      if (!o) continue;
      const LocalTrajectory local = solve_local(o->control, o->grid, V, config.q_max, config.grid.T);
      const auto q_local = local.terminal();
      out << io::format_double(o->eta) << ',' << io::format_double(o->final_objective) << ','
          << io::format_double(l1_distance(o->control, smallest->control, o->grid, lo, hi)) << ','
          << io::format_double(l1_distance(o->terminal_W, q_local, o->grid, lo, hi)) << ','
          << io::format_double(l1_distance(o->terminal_W, o->target, o->grid, lo, hi)) << ','
          << io::format_double(l1_distance(q_local, o->target, o->grid, lo, hi)) << ','
          << io::format_double(l1_distance(o->terminal_W, q_chi, o->grid, lo, hi)) << '\n';
    }
  }
  manifest.add_artifact(fs::relative(summary_path, base).generic_string());

  bool ok = std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.has_value(); });
  if (config.sweep_singular_limit) {
    try {
      const auto points = singular_limit_study([](double x) { return indicator(x); }, config.grid,
                                               config.eta_list, V, config.q_max, config.cfl_safety,
                                               config.l1_lo, config.l1_hi);
      const fs::path path = base / "singular_limit.csv";
      std::ofstream out(path);
      out << "eta,l1_W_to_local,l1_q_to_local\n";
      std::vector<double> etas;
      std::vector<double> dists;
      for (const auto& p : points) {
        out << io::format_double(p.eta) << ',' << io::format_double(p.l1_W_to_local) << ','
            << io::format_double(p.l1_q_to_local) << '\n';
        etas.push_back(p.eta);
        dists.push_back(p.l1_W_to_local);
      }
      manifest.add_artifact(fs::relative(path, base).generic_string());
      if (points.size() >= 2) manifest.set("singular_limit_slope", loglog_slope(etas, dists));
    } catch (const std::exception& e) {
      ok = false;
      manifest.set("singular_limit_error", e.what());
    }
  }
  manifest.finish(ok);
  return {base, manifest.body(), ok};
}

}  // namespace nlcl
