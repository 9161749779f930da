#pragma once

// Observables on evolved Slater determinants: residual energy and its
// bulk/edge decomposition, the edge Landau-Zener integral, edge weights,
// transverse bond currents, fits and window averages.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flochern/evolution.hpp"
#include "flochern/floquet.hpp"

namespace flochern {

struct ResidualEnergyRecord {
  double t = 0.0;
  double energy = 0.0;        ///< <Psi|H(t)|Psi>
  double ground_energy = 0.0;  ///< E_gs(t)
  double e_res = 0.0;
};

/// sum_j <psi_j|H|psi_j> for one sector.
double sector_energy(const SlaterSector& sector, const BandedMatrix& h);

/// E_res(t) = <Psi|H(t)|Psi> - E_gs(t), summed over the sectors of `state`
/// (one per momentum of the model), E_gs from the lowest occupied()
/// instantaneous eigenvalues per sector.
ResidualEnergyRecord residual_energy(const SlaterState& state, double t, const TightBindingModel& model);

struct BulkEdgeSplit {
  double eps_bulk = 0.0;
  double eps_edge = 0.0;
  double stderr_bulk = 0.0;  ///< zero when the fit has no degrees of freedom
  double stderr_edge = 0.0;
  double fit_residual = 0.0;  ///< root-mean-square residual
  int points = 0;
};

/// Least squares E_res = eps_bulk L^2 + eps_edge L. Throws
/// std::invalid_argument with fewer than two distinct L.
BulkEdgeSplit fit_bulk_edge(const std::vector<std::pair<double, double>>& l_and_eres);

struct PowerLawFit {
  double exponent = 0.0;
  double stderr = 0.0;
  double prefactor = 0.0;
  int used = 0;
  std::vector<std::string> warnings;
};

/// Slope of log eps vs log tau. Nonpositive eps are dropped with a warning.
/// Throws std::invalid_argument with fewer than 4 usable points or a span
/// below one decade.
PowerLawFit kz_exponent(const std::vector<std::pair<double, double>>& tau_and_eps);

struct EdgeWeight {
  double left = 0.0;
  double right = 0.0;
};

/// |amplitude|^2 summed over the `depth` leftmost / rightmost transverse
/// sites. Throws std::invalid_argument unless 0 < depth <= Nx/2.
EdgeWeight edge_weight(const CVector& orbital, int depth);

inline constexpr int kEdgeDepth = 4;
inline constexpr double kEdgeThreshold = 0.6;

enum class EdgeClass { Bulk, Left, Right };
EdgeClass classify_edge(const CVector& orbital, int depth = kEdgeDepth, double threshold = kEdgeThreshold);

struct EdgeLzResult {
  double value = 0.0;
  int intervals = 0;
  double last_change = 0.0;  ///< relative change at the final refinement
};

/// int_{K_+}^{K_f} dk / 2pi (E_right - E_left) for the pair of edge states
/// straddling half filling, on a trapezoid grid doubled until the value
/// changes by less than 1%. The sign is taken so that the excess energy of
/// the wrong-edge occupation is positive. Throws std::domain_error when no
/// edge state is found in the window (trivial phase).
EdgeLzResult edge_lz_integral(const HaldaneParams& params, const RibbonGeometry& g);

/// dH/dkappa of sector s at time t (the current operator with hbar = 1).
BandedMatrix current_operator(const SectorAssembler& assembler, std::span<const cplx> amplitudes);

/// J_{i,i+1}(t) = sum_k 2 Re[J_{i,i+1}(k) rho_{i+1,i}(k)] for i = 0..Nx-2.
std::vector<double> measure_currents(const SlaterState& state, double t, const SectorEngine& engine);

/// Same, given precomputed current operators per sector.
std::vector<double> measure_currents(const SlaterState& state, const std::vector<BandedMatrix>& currents);

/// Trapezoid average of samples over [t.front(), t.back()].
double window_average(const std::vector<double>& t, const std::vector<double>& values);

/// M = sum_{k,alpha} min(n, 1 - n) / (Nx Ny).
double metallicity(const std::vector<RVector>& occupation_rows);

/// Least squares value = c0 + c1 / L + c2 / L^2. With c0 fixed the fit is
/// over c1, c2 only.
struct InverseLFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};
InverseLFit fit_inverse_l(const std::vector<std::pair<double, double>>& l_and_value,
                          std::optional<double> fixed_c0 = std::nullopt);

}  // namespace flochern
