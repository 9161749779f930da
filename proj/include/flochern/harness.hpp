#pragma once

// Runs configured experiments end to end: validation, execution on a worker
// pool, CSV output with a parameter/hash header line, run manifests and
// checkpoint-based resume.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "flochern/config.hpp"

namespace flochern {

struct RunOptions {
  std::filesystem::path out_dir;  ///< overrides config.output_dir when set
  int threads = 1;
  int dt_divisor = 0;        ///< overrides steps_per_period when > 0
  int checkpoint_every = 0;  ///< periods; 0 disables checkpoints
  bool resume = false;
  std::function<void(const std::string&)> progress;
};

struct RunManifest {
  std::string config_hash;
  std::string experiment;
  std::string status;  ///< running | complete | failed
  std::filesystem::path out_dir;
  std::filesystem::path config_path;
  std::vector<std::string> outputs;
  std::vector<std::string> events;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  int threads = 1;
  int checkpoint_every = 0;
};

/// Throws ConfigError (before any compute) when validation finds errors and
/// NumericalError when the integrator aborts.
RunManifest run_experiment(ExperimentConfig config, const RunOptions& options);

/// Re-runs the manifest's configuration, continuing from its checkpoints.
RunManifest resume_experiment(const std::filesystem::path& manifest_path, RunOptions options);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// "# key=value ..." line carrying the whole configuration and its hash.
std::string csv_header_line(const ExperimentConfig& c);

}  // namespace flochern
