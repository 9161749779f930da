#pragma once

// Drive protocols: the circularly (or elliptically) polarised vector
// potential A(x, t) = A0(x, t) [x sin(wt) + y sin(wt - phi)], its Peierls
// phases on nearest-neighbour bonds, and the amplitude / sublattice-potential
// schedules of the annealing runs.

#include <string>
#include <vector>

#include "flochern/lattice.hpp"

namespace flochern {

struct Envelope {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  double x_center = 0.0;
  double sigma = 0.0;

  static Envelope uniform() { return {}; }
  static Envelope gaussian(double x_center, double sigma) { return {Kind::Gaussian, x_center, sigma}; }

  /// exp(-(x - xc)^2 / (2 sigma^2)), or 1 for a uniform drive.
  double value(double x) const;
};

struct DriveParams {
  double omega = 7.0;
  double polarization_phase = -kPi / 2;  ///< phi; +-pi/2 is circular
  double lambda_final = 1.0;
  int n_qa = 100;  ///< ramp length in periods
  int n_f = 0;     ///< hold length in periods
  Envelope envelope;

  double period() const { return kTwoPi / omega; }
  double tau_qa() const { return n_qa * period(); }
  double tau_f() const { return n_f * period(); }
};

/// Piecewise-linear lambda(t) and Delta_AB(t): a linear ramp 0 -> lambda_f
/// over [0, tau_qa], then constant over [tau_qa, tau_qa + tau_f]. Delta_AB is
/// either constant or switched off linearly during the ramp.
class Schedule {
 public:
  enum class DeltaMode { Constant, SwitchOff };

  Schedule(double lambda_final, double tau_qa, double tau_f, double delta0,
           DeltaMode mode = DeltaMode::Constant);
  static Schedule from_drive(const DriveParams& drive, double delta0,
                             DeltaMode mode = DeltaMode::Constant);
  /// Constant (lambda, delta) for every t >= 0. Used for frozen-amplitude
  /// Floquet operators and static checks.
  static Schedule frozen(double lambda, double delta);

  struct Values {
    double lambda;
    double delta_ab;
  };

  /// Throws std::out_of_range outside [0, tau_qa + tau_f] (frozen schedules
  /// accept any t >= 0).
  Values at(double t) const;
  /// Schedule whose values are those of this one at `t`, for all times.
  Schedule frozen_at(double t) const;

  double tau_qa() const { return tau_qa_; }
  double tau_f() const { return tau_f_; }
  double end_time() const { return tau_qa_ + tau_f_; }
  double lambda_final() const { return lambda_final_; }
  double delta0() const { return delta0_; }
  DeltaMode delta_mode() const { return mode_; }
  bool is_frozen() const { return frozen_; }

  std::string describe() const;

 private:
  Schedule() = default;
  double lambda_final_ = 0.0;
  double tau_qa_ = 0.0;
  double tau_f_ = 0.0;
  double delta0_ = 0.0;
  DeltaMode mode_ = DeltaMode::Constant;
  bool frozen_ = false;
};

struct HaldaneParams {
  double t1 = -1.0;
  double t2 = 0.1;
  double phi_h = kPi / 2;
  double delta_ab = 0.0;
};

/// Haldane model with Delta_AB / t2 ramped linearly from start_ratio to
/// end_ratio over tau_qa (times in hbar / |t1|).
struct HaldaneSchedule {
  double t1 = -1.0;
  double t2 = 0.1;
  double phi_h = kPi / 2;
  double start_ratio = 4.0 * kSqrt3;
  double end_ratio = 0.0;
  double tau_qa = 100.0;

  /// Throws std::out_of_range outside [0, tau_qa].
  HaldaneParams at(double t) const;
};

/// Peierls phase Phi_ij(t) on a nearest-neighbour bond (A -> B). The line
/// integral is evaluated with A at the bond midpoint. Throws
/// std::invalid_argument for next-nearest bonds.
double peierls_phase(const Bond& bond, Vec2 midpoint, double t, const DriveParams& drive,
                     const Schedule& schedule, double nn_distance);

/// Same, with lambda(t) already evaluated. Antisymmetric under reversing the
/// displacement.
double peierls_phase_at(Vec2 displacement, double x_mid, double t, double lambda,
                        const DriveParams& drive, double nn_distance);

}  // namespace flochern
