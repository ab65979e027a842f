// dgps: batch driver for the DG time-stepping preconditioner experiments.
//
//   dgps <experiment> [--p LIST] [--h-exp LIST] [--tau LIST] [--dim 1|2] ...
//
// Settings come from defaults, then --config FILE (key = value lines), then
// command-line flags. Exit codes: 0 success, 1 invalid input, 2 numerical
// failure (including failed self-test suites).

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>

#include "dgps/experiments.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--p", "p", "temporal degree(s): N, N1,N2, N1..N2 or N1..N2:step"},
    {"--h-exp", "h_exp", "mesh exponent(s) k with h = 2^-k, same list syntax"},
    {"--tau", "tau", "time step(s), comma separated"},
    {"--dim", "dim", "spatial dimension, 1 or 2"},
    {"--mode", "mode", "direct, mg or both"},
    {"--vcycles", "vcycles", "V-cycles per shifted solve (list for iteration tables)"},
    {"--tol", "tol", "PCG tolerance"},
    {"--maxit", "maxit", "PCG / Lanczos iteration cap"},
    {"--seed", "seed", "random seed"},
    {"--threads", "threads", "worker threads over temporal blocks"},
    {"--out", "out", "output file (default stdout)"},
    {"--format", "format", "csv or markdown"},
    {"--u0", "u0", "heat initial datum: interpolation or projection"},
};

constexpr const char* kDescriptions[][2] = {
    {"cond_table", "condition number versus time step (1D)"},
    {"cond_mesh_p", "condition number versus mesh size and degree (1D)"},
    {"cond_asymptotic_p", "condition number for large degrees (1D)"},
    {"iters_2d", "PCG iterations versus mesh size, exact and V-cycle preconditioners (2D)"},
    {"iters_p_sweep", "PCG iterations versus degree with V-cycle preconditioners (2D)"},
    {"heat", "heat problem final-time errors and iteration counts (2D)"},
    {"eigs", "temporal eigenvalues and their decay"},
    {"selftest", "run the built-in property suites"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned DG time stepping: experiment driver"};
  app.set_version_flag("--version", std::string(dgps::kVersion));
  app.require_subcommand(1);

  std::map<std::string, std::string> flags;
  std::string config_path;
  bool allow_large = false;
  std::string chosen;

  for (const auto& [name, description] : kDescriptions) {
    CLI::App* sub = app.add_subcommand(name, description);
    for (const FlagSpec& f : kFlags) {
      const std::string key = f.key;
      sub->add_option_function<std::string>(f.flag, [&flags, key](const std::string& v) { flags[key] = v; },
                                            f.help);
    }
    if (std::string(name) == "selftest")
      sub->add_option_function<std::string>(
          "--perturb-k", [&flags](const std::string& v) { flags["perturb_k"] = v; },
          "add this to every entry of K (negative control)");
    sub->add_option("--config", config_path, "key = value settings file");
    sub->add_flag("--allow-large", allow_large, "permit 2D meshes finer than 2^-8");
    sub->callback([&chosen, name = std::string(name)] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    dgps::ExperimentConfig config;
    config.experiment = dgps::parse_experiment(chosen);
    if (!config_path.empty()) dgps::apply_config_file(config, config_path);
    for (const auto& [key, value] : flags) dgps::apply_setting(config, key, value);
    if (allow_large) config.allow_large = true;
    config.experiment = dgps::parse_experiment(chosen);

    const auto start = std::chrono::steady_clock::now();
    const dgps::Report report = dgps::run_experiment(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (config.out.empty()) {
      dgps::write_report(report, std::cout);
    } else {
      std::ofstream out(config.out);
      if (!out) throw dgps::ValidationError("cannot write '" + config.out + "'");
      dgps::write_report(report, out);
    }
    std::cerr << chosen << ": " << (report.passed ? "ok" : "FAILED") << " in " << seconds << " s\n";
    return report.passed ? 0 : 2;
  } catch (const dgps::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const dgps::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
