// Command-line front end: run, validate, presets, resume.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical abort.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "flochern/config.hpp"
#include "flochern/harness.hpp"
#include "flochern/kernels.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

void print_findings(const std::vector<flochern::Finding>& findings) {
  for (const auto& f : findings) {
    const char* tag = f.severity == flochern::Finding::Severity::Error ? "error" : "warning";
    std::cerr << tag << ": " << f.message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-annealing dynamics of driven honeycomb ribbons and flakes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  flochern::RunOptions options;
  std::string out_dir;
  bool quiet = false;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    cmd->add_option("--threads", options.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--dt-divisor", options.dt_divisor, "RK4 steps per drive period")->check(CLI::PositiveNumber);
    cmd->add_option("--checkpoint-every", options.checkpoint_every, "Checkpoint interval in periods")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--quiet", quiet, "Suppress progress messages");
  };

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  add_run_flags(run);

  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", config_path, "Config file")->required();

  auto* presets = app.add_subcommand("presets", "Print the desk-scale preset configurations");

  auto* resume = app.add_subcommand("resume", "Continue a checkpointed run from its manifest");
  resume->add_option("manifest", manifest_path, "manifest.txt of an earlier run")->required();
  add_run_flags(resume);

  CLI11_PARSE(app, argc, argv);

  if (!out_dir.empty()) options.out_dir = out_dir;
  if (!quiet) options.progress = [](const std::string& m) { std::cerr << "[flochern] " << m << '\n'; };

  try {
    if (*presets) {
      bool first = true;
      for (const auto& c : flochern::presets()) {
        if (!first) std::cout << '\n';
        first = false;
        std::cout << "# preset " << flochern::to_string(c.experiment) << '\n' << flochern::serialize_config(c);
      }
      return 0;
    }
    if (*validate) {
      const auto config = flochern::load_config(config_path);
      const auto findings = flochern::validate_config(config);
      print_findings(findings);
      if (flochern::has_errors(findings)) return kExitInvalid;
      std::cout << "ok " << flochern::config_hash(config) << '\n';
      return 0;
    }
    if (!quiet) std::cerr << "[flochern] kernels: " << flochern::kernels::active().name << '\n';
    flochern::RunManifest m;
    if (*run) {
      const auto config = flochern::load_config(config_path);
      print_findings(flochern::validate_config(config));
      m = flochern::run_experiment(config, options);
    } else {
      m = flochern::resume_experiment(manifest_path, options);
    }
    std::cout << "complete " << m.config_hash << " -> " << m.out_dir.string() << '\n';
    for (const auto& o : m.outputs) std::cout << "  " << o << '\n';
    return 0;
  } catch (const flochern::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitInvalid;
  } catch (const flochern::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
