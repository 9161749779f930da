#pragma once

// Floquet analysis of one-period propagators: quasi-energies in the
// standard zone [-hbar w / 2, hbar w / 2), Floquet modes, the Floquet ground
// state and the occupations of instantaneous Floquet modes.

#include <vector>

#include "flochern/evolution.hpp"

namespace flochern {

struct FloquetSpectrum {
  double k = 0.0;
  double omega = 0.0;
  RVector quasi_energies;  ///< ascending, in [-omega/2, omega/2)
  CMatrix modes;           ///< orthonormal columns matching quasi_energies
};

/// Maps E into [-omega/2, omega/2) modulo omega.
double fold_quasi_energy(double energy, double omega);

/// Diagonalises U through a complex Schur decomposition (orthonormal modes
/// even for clustered eigenphases). Clusters with eigenphase splitting below
/// 1e-10 are re-diagonalised against `tie_breaker` (Hermitian, e.g. the
/// static-limit Hamiltonian); without one the site index is used, so U = I
/// yields the coordinate basis. Throws std::invalid_argument if U deviates
/// from unitarity by more than `unitarity_tolerance`.
FloquetSpectrum floquet_spectrum(const Propagator& u, double omega, const CMatrix* tie_breaker = nullptr,
                                 double unitarity_tolerance = 1e-6);

/// min over m in {-1, 0, 1} of |ea - eb + m omega|.
double floquet_gap(double ea, double eb, double omega);

struct FloquetGroundState {
  SlaterSector sector;
  int count = 0;
  bool regime_warning = false;  ///< count differs from the expected filling
};

/// Fills every mode with negative quasi-energy.
FloquetGroundState floquet_ground_state(const FloquetSpectrum& spectrum, int expected_occupied);

/// n_alpha = sum_j |<phi_alpha | psi_j>|^2 for each Floquet mode.
RVector occupations(const SlaterSector& evolved, const FloquetSpectrum& spectrum);

/// Connects bands across adjacent momenta by greedy maximal overlap
/// (threshold 0.5); leftovers are paired in quasi-energy order. Returns,
/// per momentum, the mode index carried by each band.
std::vector<std::vector<int>> connect_bands(const std::vector<FloquetSpectrum>& spectra);

}  // namespace flochern
