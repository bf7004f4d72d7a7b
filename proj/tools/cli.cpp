#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <iostream>

#include "nlcl/experiment.hpp"

namespace nlcl {

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kValidationFailure = 2;

void print_summary(const CommandResult& result) {
  fmt::print("{}\n", (result.dir / "manifest.json").string());
  for (const auto& run : result.manifest["runs"]) {
    fmt::print("  eta={} status={}", run.value("eta", 0.0), run.value("status", std::string("?")));
    if (run.contains("metrics")) {
      const auto& m = run["metrics"];
      if (m.contains("final_objective")) {
        fmt::print(" objective {:.6e} -> {:.6e} ({} iterations, {})",
                   m["initial_objective"].get<double>(), m["final_objective"].get<double>(),
                   m["iterations"].get<int>(), m["stop_reason"].get<std::string>());
      }
      if (m.contains("max_rel_err")) {
        fmt::print(" max_rel_err {:.3e} |g|_inf {:.3e}", m["max_rel_err"].get<double>(),
                   m["gradient_inf_norm"].get<double>());
      }
      if (m.contains("mass_final")) {
        fmt::print(" mass {:.6f} -> {:.6f}", m["mass_initial"].get<double>(),
                   m["mass_final"].get<double>());
      }
    }
    if (run.contains("error")) fmt::print(" error: {}", run["error"].get<std::string>());
    fmt::print("\n");
  }
  if (result.manifest.contains("singular_limit_slope")) {
    fmt::print("  singular limit log-log slope {:.4f}\n",
               result.manifest["singular_limit_slope"].get<double>());
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Optimal control of nonlocal conservation laws: solve, gradcheck, optimize, sweep-eta"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string validate;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config file (INI)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--output-dir", output_dir, "Override experiment.output_dir");
    sub->add_option("--validate", validate, "Override solve.validate (true/false)")
        ->check(CLI::IsMember({"true", "false"}));
  };

  CLI::App* solve = app.add_subcommand("solve", "Forward solve; writes snapshots, W and mass");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Adjoint gradient vs finite differences");
  CLI::App* optimize = app.add_subcommand("optimize", "Projected gradient descent per eta");
  CLI::App* sweep = app.add_subcommand("sweep-eta", "Optimize per eta plus singular-limit summary");
  for (CLI::App* sub : {solve, gradcheck, optimize, sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationFailure;
  }

  try {
    ExperimentConfig config = load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!validate.empty()) config.validate_solution = validate == "true";

    CommandResult result;
    if (solve->parsed()) {
      result = cmd_solve(config);
    } else if (gradcheck->parsed()) {
      result = cmd_gradcheck(config);
    } else if (optimize->parsed()) {
      result = cmd_optimize(config);
    } else {
      result = cmd_sweep_eta(config);
    }
    print_summary(result);
    return result.ok ? 0 : kRuntimeFailure;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidationFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "failure: {}\n", e.what());
    return kRuntimeFailure;
  }
}

}  // namespace nlcl
