#pragma once

// Single-particle Hamiltonians of the driven honeycomb model and the static
// Haldane model, assembled as banded matrices.
//
// Hopping terms are stored as directed pairs: a term (from -> to) with
// amplitude h contributes h * exp(-i (k + kappa) dy) to H(to, from) and the
// conjugate to H(from, to), where dy is the physical y-displacement of the
// bond. For flakes every term has k = kappa = 0.

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "flochern/banded.hpp"
#include "flochern/drive.hpp"
#include "flochern/lattice.hpp"

namespace flochern {

struct HoppingTerm {
  int from = 0;
  int to = 0;
  double dy = 0.0;
};

/// Time-dependent amplitudes over a fixed hopping table.
class TightBindingModel {
 public:
  virtual ~TightBindingModel() = default;
  virtual int dimension() const = 0;
  virtual const std::vector<HoppingTerm>& terms() const = 0;
  /// Sites' x positions; used for edge weights and tie-breaking.
  virtual const std::vector<double>& x_positions() const = 0;
  /// amplitudes[b] multiplies c^dag_to c_from of term b.
  virtual void evaluate(double t, std::span<cplx> amplitudes, std::span<double> onsite) const = 0;
};

/// Driven model: t1 exp(-i Phi_ij(t)) on nearest-neighbour bonds plus a
/// staggered potential +-Delta_AB(t).
class DrivenModel final : public TightBindingModel {
 public:
  DrivenModel(const std::vector<Site>& sites, const std::vector<Bond>& nn_bonds, double nn_distance,
              double t1, DriveParams drive, Schedule schedule);
  DrivenModel(const RibbonGeometry& g, double t1, DriveParams drive, Schedule schedule);
  DrivenModel(const FlakeGeometry& g, double t1, DriveParams drive, Schedule schedule);

  int dimension() const override { return static_cast<int>(sign_.size()); }
  const std::vector<HoppingTerm>& terms() const override { return terms_; }
  const std::vector<double>& x_positions() const override { return x_; }
  void evaluate(double t, std::span<cplx> amplitudes, std::span<double> onsite) const override;

  const DriveParams& drive() const { return drive_; }
  const Schedule& schedule() const { return schedule_; }
  double t1() const { return t1_; }

 private:
  std::vector<HoppingTerm> terms_;
  std::vector<double> x_;
  std::vector<double> sign_;
  std::vector<double> coeff_x_;  // envelope(x_mid) * dx / d per bond
  std::vector<double> coeff_y_;
  double t1_;
  DriveParams drive_;
  Schedule schedule_;
};

/// Haldane model: t1 on nearest-neighbour bonds, t2 exp(i nu phi_H) c^dag_from
/// c_to on next-nearest bonds (nu = chirality of the from -> to path),
/// +-Delta_AB. phi_H = +pi/2, Delta_AB = 0 has Chern number +1.
/// Parameters come either fixed or from a HaldaneSchedule.
class HaldaneModel final : public TightBindingModel {
 public:
  HaldaneModel(const RibbonGeometry& g, HaldaneParams params);
  HaldaneModel(const RibbonGeometry& g, HaldaneSchedule schedule);
  HaldaneModel(const FlakeGeometry& g, HaldaneParams params);

  int dimension() const override { return static_cast<int>(sign_.size()); }
  const std::vector<HoppingTerm>& terms() const override { return terms_; }
  const std::vector<double>& x_positions() const override { return x_; }
  void evaluate(double t, std::span<cplx> amplitudes, std::span<double> onsite) const override;

  HaldaneParams params_at(double t) const;

 private:
  void init(const std::vector<Site>& sites, const std::vector<Bond>& nn, const std::vector<Bond>& nnn);
  std::vector<HoppingTerm> terms_;
  std::vector<int> chirality_;  // 0 for nearest-neighbour terms
  std::vector<double> x_;
  std::vector<double> sign_;
  std::optional<HaldaneSchedule> schedule_;
  HaldaneParams fixed_;
};

/// Per-momentum assembly of a model's banded matrix. Bloch factors are
/// precomputed, so assembling at a new time costs one pass over the terms.
class SectorAssembler {
 public:
  SectorAssembler(const TightBindingModel& model, double k, double kappa = 0.0);

  BandedMatrix make_matrix() const;
  void assemble(std::span<const cplx> amplitudes, std::span<const double> onsite, BandedMatrix& out) const;
  /// Analytic d/dkappa of the assembled matrix (the current operator with
  /// hbar = 1). Diagonal potential terms do not contribute.
  void assemble_derivative(std::span<const cplx> amplitudes, BandedMatrix& out) const;

  double k() const { return k_; }
  double kappa() const { return kappa_; }
  const TightBindingModel& model() const { return *model_; }

 private:
  const TightBindingModel* model_;
  double k_;
  double kappa_;
  std::vector<int> offsets_;
  std::vector<cplx> bloch_;
  std::vector<int> slot_fwd_;  // diagonal slot of H(to, from)
  std::vector<int> slot_bwd_;  // diagonal slot of H(from, to)
};

/// Source of H(t) for one sector.
class HamiltonianSource {
 public:
  virtual ~HamiltonianSource() = default;
  virtual int dimension() const = 0;
  virtual BandedMatrix make_matrix() const = 0;
  virtual void assemble(double t, BandedMatrix& out) const = 0;
};

/// Source backed by a TightBindingModel at fixed (k, kappa). Holds a
/// reference to the model; the model must outlive it.
class ModelSource final : public HamiltonianSource {
 public:
  ModelSource(const TightBindingModel& model, double k, double kappa = 0.0);
  int dimension() const override { return model_.dimension(); }
  BandedMatrix make_matrix() const override { return assembler_.make_matrix(); }
  void assemble(double t, BandedMatrix& out) const override;
  const SectorAssembler& assembler() const { return assembler_; }
  const TightBindingModel& model() const { return model_; }

 private:
  const TightBindingModel& model_;
  SectorAssembler assembler_;
  mutable std::vector<cplx> amps_;
  mutable std::vector<double> onsite_;
};

/// Time-independent source; handy for tests and static limits.
class StaticSource final : public HamiltonianSource {
 public:
  explicit StaticSource(BandedMatrix h) : h_(std::move(h)) {}
  explicit StaticSource(const CMatrix& h) : h_(BandedMatrix::from_dense(h)) {}
  int dimension() const override { return static_cast<int>(h_.size()); }
  BandedMatrix make_matrix() const override { return h_; }
  void assemble(double, BandedMatrix& out) const override { out = h_; }

 private:
  BandedMatrix h_;
};

struct StripHamiltonian {
  double k = 0.0;
  double t = 0.0;
  double kappa = 0.0;
  BandedMatrix matrix;
};

/// k-resolved Nx x Nx strip matrix of the driven model.
StripHamiltonian build_strip_h(const RibbonGeometry& g, double k, double t, double t1,
                               const DriveParams& drive, const Schedule& schedule, double kappa = 0.0);

StripHamiltonian build_haldane_strip(const RibbonGeometry& g, double k, const HaldaneParams& params);

struct DrivenSpec {
  double t1 = -1.0;
  DriveParams drive;
  Schedule schedule = Schedule::frozen(0.0, 0.0);
};
using FlakeModelSpec = std::variant<DrivenSpec, HaldaneParams>;

/// Full real-space flake matrix for either model.
BandedMatrix build_flake_h(const FlakeGeometry& g, double t, const FlakeModelSpec& spec);

/// Bulk 2x2 Bloch matrix (A, B) of the driven model at 2D momentum k.
CMatrix build_bloch_h(Vec2 k, double t, double t1, const DriveParams& drive, const Schedule& schedule,
                      double a = 1.0);
/// Bulk 2x2 Bloch matrix of the Haldane model, same conventions as the
/// strip and flake builders.
CMatrix build_haldane_bloch(Vec2 k, const HaldaneParams& params, double a = 1.0);

/// Bulk 2x2 driven Bloch matrix at fixed 2D momentum as a time-dependent
/// source, for Floquet gaps at isolated momenta.
class BlochDrivenSource final : public HamiltonianSource {
 public:
  BlochDrivenSource(Vec2 k, double t1, DriveParams drive, Schedule schedule, double a = 1.0)
      : k_(k), t1_(t1), drive_(std::move(drive)), schedule_(std::move(schedule)), a_(a) {}
  int dimension() const override { return 2; }
  BandedMatrix make_matrix() const override;
  void assemble(double t, BandedMatrix& out) const override;

 private:
  Vec2 k_;
  double t1_;
  DriveParams drive_;
  Schedule schedule_;
  double a_;
};

/// Dirac points K_+- = (2 pi / (sqrt3 a), +-2 pi / (3 a)).
Vec2 dirac_point(int sign, double a = 1.0);

struct EffectiveFloquetParams {
  double t1_eff = 0.0;
  double t2_eff = 0.0;
  double phi_h_eff = 0.0;
  bool below_bandwidth = false;  ///< hbar omega <= 6 |t1|: mapping not meaningful
};

/// High-frequency Haldane description of the circularly driven model:
/// t1 J0(lambda), -sqrt3 (t1 J1(lambda))^2 / (hbar omega), phi_H = +-pi/2
/// following the polarisation sign. t2_eff is negative, so the Chern number
/// has the sign of t2_eff sin(phi_H_eff): +1 for polarization -pi/2.
EffectiveFloquetParams effective_floquet_params(double lambda, double omega, double t1,
                                                double polarization_phase = -kPi / 2);

/// Amplitude at which 3 sqrt3 |t2_eff(lambda)| = Delta_AB, by bisection on
/// (0, first maximum of J1). Throws std::domain_error when no root exists.
double critical_lambda(double delta_ab, double omega, double t1);

}  // namespace flochern
