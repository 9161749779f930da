#pragma once

// The five experiment drivers. Each returns structured results; file output
// lives in the harness.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flochern/chern_marker.hpp"
#include "flochern/config.hpp"
#include "flochern/evolution.hpp"
#include "flochern/floquet.hpp"
#include "flochern/observables.hpp"
#include "flochern/parallel.hpp"

namespace flochern {

struct RunContext {
  ThreadPool* pool = nullptr;
  IntegratorLog log;
  std::function<void(const std::string&)> progress;
  /// Checkpoint file stem; empty disables checkpoints. One file per
  /// trajectory: <stem>.<tag>.ckpt
  std::filesystem::path checkpoint_stem;
  int checkpoint_every = 0;  ///< periods
  bool resume = false;
  std::string config_hash;

  void report(const std::string& what) const {
    if (progress) progress(what);
  }
};

struct IntegrityStats {
  double max_gram_deviation = 0.0;
  double max_unitarity_error = 0.0;
  double max_occupation_sum_error = 0.0;
  double max_hermiticity_error = 0.0;
};

// ---------------------------------------------------------------------------
// Haldane annealing sweep

struct HaldaneQaPoint {
  int l = 0;
  double tau_qa = 0.0;
  double dt = 0.0;
  double e_res = 0.0;
  double energy = 0.0;
  double ground_energy = 0.0;
};

struct HaldaneQaFit {
  double tau_qa = 0.0;
  BulkEdgeSplit split;
};

struct HaldaneQaResult {
  std::vector<HaldaneQaPoint> points;
  std::vector<HaldaneQaFit> fits;
  std::optional<PowerLawFit> kz;
  std::string kz_error;
  EdgeLzResult lz;
  IntegrityStats integrity;
};

/// One (L, tau_QA) annealing run of the Haldane strip.
HaldaneQaPoint run_haldane_point(const ExperimentConfig& c, int l, double tau_qa, RunContext& ctx,
                                 IntegrityStats* integrity = nullptr);
HaldaneQaResult run_haldane_qa(const ExperimentConfig& c, RunContext& ctx);

// ---------------------------------------------------------------------------
// Driven strips

struct FloquetRow {
  double k = 0.0;
  int alpha = 0;
  double quasi_energy = 0.0;
  double occupation = 0.0;
  double edge_left = 0.0;
  double edge_right = 0.0;
};

struct EdgeCounts {
  int right_occupied = 0;
  int left_occupied = 0;
  int right_total = 0;
  int left_total = 0;
  int right_excited = 0;  ///< occupied with quasi-energy > 0
  int left_excited = 0;
};

struct FloquetQaResult {
  int nx = 0;
  int ny = 0;
  double omega = 0.0;
  double period = 0.0;
  double tau_qa = 0.0;
  int steps_per_period = 0;
  std::vector<double> momenta;
  std::vector<FloquetSpectrum> spectra;  ///< at t = tau_QA, frozen lambda_f
  std::vector<RVector> occupations;
  std::vector<FloquetRow> table;
  int fgs_count_mismatches = 0;  ///< momenta where the Floquet ground state count differs from Nx/2

  // Dense current samples during the hold: currents[s][bond].
  std::vector<double> sample_t;
  std::vector<std::vector<double>> currents;
  std::vector<double> j_av;
  std::vector<double> j_av_coarse;  ///< same window, every other sample
  std::vector<double> j_strobe;     ///< samples at t = tau_QA + n tau only
  std::vector<double> j_min;
  std::vector<double> j_max;

  double metallicity = 0.0;
  double partial_fraction = 0.0;  ///< share of modes with 0.1 < n < 0.9
  IntegrityStats integrity;

  /// Edge modes (edge weight above threshold) with k strictly inside (k_lo, k_hi).
  EdgeCounts edge_counts(double k_lo, double k_hi) const;
};

FloquetQaResult run_floquet_qa(const ExperimentConfig& c, RunContext& ctx);

// ---------------------------------------------------------------------------
// Chern marker dynamics on flakes

struct ChernRun {
  int l = 0;
  std::vector<double> t;
  std::vector<double> lambda;
  std::vector<double> c_bulk;
  double c_bulk_av = 0.0;
  std::vector<double> trace_t;
  std::vector<double> trace;  ///< full-field marker sum
  double max_abs_trace = 0.0;
  double max_imag = 0.0;
  Eigen::MatrixXd final_field;
  IntegrityStats integrity;
};

struct ChernDynamicsResult {
  std::vector<ChernRun> runs;
  std::optional<InverseLFit> fit;
};

ChernRun run_chern_point(const ExperimentConfig& c, int l, RunContext& ctx);
ChernDynamicsResult run_chern_dynamics(const ExperimentConfig& c, RunContext& ctx);

// ---------------------------------------------------------------------------
// Shared helpers

DriveParams drive_params(const ExperimentConfig& c, const RibbonGeometry* ribbon = nullptr,
                         const FlakeGeometry* flake = nullptr);
Schedule drive_schedule(const ExperimentConfig& c, const DriveParams& drive);

/// Half-filled ground state of every sector of `model` at time t.
SlaterState sector_ground_states(const TightBindingModel& model, const std::vector<double>& momenta, double t,
                                 ThreadPool* pool = nullptr);

}  // namespace flochern
