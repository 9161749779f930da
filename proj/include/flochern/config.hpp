#pragma once

// Experiment configuration: flat `key = value` text with `#` comments.
// Serialisation is canonical (fixed key order, shortest round-trip doubles),
// so parse(serialize(c)) == c and the content hash is stable.

#include <stdexcept>
#include <string>
#include <vector>

#include "flochern/types.hpp"

namespace flochern {

enum class ExperimentKind { HaldaneQa, FloquetQaUniform, FloquetQaFocused, ChernDynamics, Subresonant };

std::string to_string(ExperimentKind kind);
/// Throws std::invalid_argument for unknown names.
ExperimentKind experiment_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::FloquetQaUniform;
  std::string name = "run";

  // Lattice. Sweeps over square systems (Nx = Ny = L) use l_values; an empty
  // list runs the single size (nx, ny).
  double a = 1.0;
  int nx = 48;
  int ny = 48;
  std::vector<int> l_values;

  // Energies in |t1|.
  double t1 = -1.0;

  // Driven runs (times in periods).
  double omega = 7.0;
  double polarization_phase = -kPi / 2;
  double lambda_final = 1.0;
  double n_qa = 100.0;
  double n_f = 0.0;
  std::string envelope = "uniform";  ///< uniform | gaussian
  double x_center = 1.0;             ///< Gaussian focus, in units of the strip width L_x
  double sigma = 0.4;                ///< Gaussian width, in units of L_x
  double delta_ab = 1e-3;
  std::string delta_mode = "constant";  ///< constant | switch_off

  // Haldane annealing (times in hbar / |t1|).
  double t2 = 0.3;
  double phi_h = kPi / 2;
  double start_ratio = 4.0 * kSqrt3;
  double end_ratio = 0.0;
  std::vector<double> tau_qa_values;
  double haldane_dt = 0.0025;

  // Numerics.
  int steps_per_period = 0;  ///< 0 selects the default for omega
  int samples_per_period = 50;
  int marker_samples_per_period = 20;
  int trace_check_every = 10;  ///< periods between full-field marker checks

  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  /// Default RK4 steps per period: 400 for hbar omega > 6 |t1|, else 800.
  int effective_steps_per_period() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

std::string serialize_config(const ExperimentConfig& c);

/// Collects every syntax error, unknown key and bad value before throwing
/// ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Git-style content hash: SHA-1 of "blob <size>\0" + serialize_config(c).
std::string config_hash(const ExperimentConfig& c);

struct Finding {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
};

/// Every violated invariant, errors and warnings, in a fixed order.
std::vector<Finding> validate_config(const ExperimentConfig& c);
bool has_errors(const std::vector<Finding>& findings);

/// Desk-scale presets, one per experiment kind.
std::vector<ExperimentConfig> presets();
ExperimentConfig preset(ExperimentKind kind);

}  // namespace flochern
