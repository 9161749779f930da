#pragma once

// Time evolution of Slater determinants: ground states, classical RK4 on
// i d/dt psi = H(t) psi (hbar = 1), and one-period propagators.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "flochern/banded.hpp"
#include "flochern/hamiltonian.hpp"
#include "flochern/parallel.hpp"

namespace flochern {

/// Occupied orbitals of one momentum sector (or of a whole flake), one per
/// column.
struct SlaterSector {
  double k = 0.0;
  CMatrix orbitals;

  int dimension() const { return static_cast<int>(orbitals.rows()); }
  int occupied() const { return static_cast<int>(orbitals.cols()); }
};

using SlaterState = std::vector<SlaterSector>;

struct GroundState {
  SlaterSector sector;
  RVector eigenvalues;  ///< full spectrum, ascending
  double energy = 0.0;  ///< sum of the occupied eigenvalues
};

/// Lowest `n_occ` eigenvectors of a Hermitian matrix. Numerically degenerate
/// eigenspaces (splitting < 1e-12 relative) are resolved by diagonalising
/// the position operator diag(positions) inside them; without positions the
/// site index is used. Each orbital's largest component is made real
/// positive.
GroundState ground_state(const CMatrix& h, int n_occ, std::span<const double> positions = {});

/// Hermitian eigen-decomposition with the same deterministic tie-breaking.
struct Eigensystem {
  RVector values;
  CMatrix vectors;
};
Eigensystem eigensystem(const CMatrix& h, std::span<const double> positions = {});

/// max |(Psi^dag Psi - I)_ij|
double gram_deviation(const CMatrix& orbitals);

/// Symmetric (Loewdin) orthonormalisation through the eigen-decomposition of
/// the overlap matrix.
void reorthonormalize(CMatrix& orbitals);

/// Events worth surfacing in a run manifest.
struct IntegratorLog {
  int reorthonormalizations = 0;
  std::vector<std::string> events;
  void record(std::string what);
};

inline constexpr double kGramTolerance = 1e-8;

/// Scratch space for rk4_step, sized for one column.
class Rk4Workspace {
 public:
  explicit Rk4Workspace(std::size_t n = 0) { resize(n); }
  void resize(std::size_t n);

 private:
  friend void rk4_step(CMatrix&, const BandedMatrix&, const BandedMatrix&, const BandedMatrix&, double,
                       Rk4Workspace&);
  std::vector<cplx> k_, tmp_, acc_;
};

/// One classical RK4 step for every column, H sampled at t, t+dt/2, t+dt.
void rk4_step(CMatrix& orbitals, const BandedMatrix& h_start, const BandedMatrix& h_mid,
              const BandedMatrix& h_end, double dt, Rk4Workspace& ws);

/// Advances a sector from t0 to t1. (t1 - t0) / dt must be an integer to
/// 1e-9. Orthonormality is checked every `check_every` steps and at the end;
/// deviations above kGramTolerance trigger a re-orthonormalisation, which is
/// logged. Throws NumericalError on non-finite amplitudes.
void rk4_evolve(SlaterSector& state, double t0, double t1, double dt, const HamiltonianSource& source,
                IntegratorLog* log = nullptr, int check_every = 400);

/// Integer step count for [t0, t1] at step dt; throws std::invalid_argument
/// when dt does not divide the window.
long step_count(double t0, double t1, double dt);

struct Propagator {
  CMatrix u;
  double t_start = 0.0;
  double t_end = 0.0;
  double k = 0.0;
};

/// U(t_start + period, t_start) by RK4-evolving the identity columns. The
/// source is sampled as given, so callers freeze ramped amplitudes first.
Propagator one_period_propagator(const HamiltonianSource& source, double k, double t_start, double period,
                                 int steps_per_period);

/// max |(U^dag U - I)_ij|
double unitarity_error(const CMatrix& u);

/// Cross-check integrator: exact exponential of H at each step midpoint.
/// Dense, O(n^3) per step; intended for small test systems.
void exponential_midpoint_evolve(CMatrix& orbitals, double t0, double t1, double dt,
                                 const HamiltonianSource& source);

/// Steps all momentum sectors of one model in lock step. Amplitudes are
/// evaluated once per stage time and shared by every sector; sectors are
/// then advanced independently on the pool.
class SectorEngine {
 public:
  SectorEngine(const TightBindingModel& model, std::vector<double> momenta, ThreadPool* pool = nullptr);

  void step(SlaterState& state, double t, double dt);
  std::size_t num_sectors() const { return assemblers_.size(); }
  const SectorAssembler& assembler(std::size_t s) const { return assemblers_[s]; }
  const TightBindingModel& model() const { return model_; }
  const std::vector<double>& momenta() const { return momenta_; }

 private:
  const TightBindingModel& model_;
  std::vector<double> momenta_;
  ThreadPool* pool_;
  std::vector<SectorAssembler> assemblers_;
  std::vector<std::array<BandedMatrix, 3>> matrices_;
  std::vector<Rk4Workspace> workspaces_;
  std::array<std::vector<cplx>, 3> amps_;
  std::array<std::vector<double>, 3> onsite_;
};

}  // namespace flochern
