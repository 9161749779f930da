#pragma once

// Resumable snapshots of an evolving Slater state: a plain-text header
// (dimensions, time, step, momenta, config hash, named series lengths)
// followed by raw little-endian complex-double orbitals and double series.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flochern/evolution.hpp"

namespace flochern {

struct Checkpoint {
  std::string config_hash;
  std::string stage;  ///< free-form label of the run phase
  double t = 0.0;
  long step = 0;
  SlaterState state;
  std::map<std::string, std::vector<double>> series;
};

/// Writes atomically (temporary file, then rename).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);

/// Throws std::runtime_error on a malformed or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace flochern
