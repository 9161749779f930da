#include "flochern/drive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flochern {

double Envelope::value(double x) const {
  if (kind == Kind::Uniform) return 1.0;
  const double u = (x - x_center) / sigma;
  return std::exp(-0.5 * u * u);
}

Schedule::Schedule(double lambda_final, double tau_qa, double tau_f, double delta0, DeltaMode mode)
    : lambda_final_(lambda_final), tau_qa_(tau_qa), tau_f_(tau_f), delta0_(delta0), mode_(mode) {
  if (tau_qa < 0.0 || tau_f < 0.0) throw std::invalid_argument("Schedule: negative duration");
}

Schedule Schedule::from_drive(const DriveParams& drive, double delta0, DeltaMode mode) {
  return Schedule(drive.lambda_final, drive.tau_qa(), drive.tau_f(), delta0, mode);
}

Schedule Schedule::frozen(double lambda, double delta) {
  Schedule s;
  s.lambda_final_ = lambda;
  s.delta0_ = delta;
  s.frozen_ = true;
  return s;
}

Schedule::Values Schedule::at(double t) const {
  if (frozen_) {
    if (t < 0.0) throw std::out_of_range("Schedule::at: negative time");
    return {lambda_final_, delta0_};
  }
  const double end = end_time();
  const double slack = 1e-12 * std::max(1.0, end);
  if (t < -slack || t > end + slack) {
    std::ostringstream msg;
    msg << "Schedule::at: t = " << t << " outside [0, " << end << "]";
    throw std::out_of_range(msg.str());
  }
  if (tau_qa_ == 0.0 || t >= tau_qa_) {
    return {lambda_final_, mode_ == DeltaMode::Constant ? delta0_ : 0.0};
  }
  const double s = std::max(t, 0.0) / tau_qa_;
  const double delta = mode_ == DeltaMode::Constant ? delta0_ : delta0_ * (1.0 - s);
  return {lambda_final_ * s, delta};
}

Schedule Schedule::frozen_at(double t) const {
  const Values v = at(t);
  return frozen(v.lambda, v.delta_ab);
}

std::string Schedule::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (frozen_) {
    out << "frozen lambda=" << lambda_final_ << " delta=" << delta0_;
  } else {
    out << "ramp lambda_f=" << lambda_final_ << " tau_qa=" << tau_qa_ << " tau_f=" << tau_f_
        << " delta0=" << delta0_ << " mode=" << (mode_ == DeltaMode::Constant ? "constant" : "switch_off");
  }
  return out.str();
}

HaldaneParams HaldaneSchedule::at(double t) const {
  if (t2 == 0.0) throw std::invalid_argument("HaldaneSchedule: t2 must be nonzero");
  const double slack = 1e-12 * std::max(1.0, tau_qa);
  if (t < -slack || t > tau_qa + slack) throw std::out_of_range("HaldaneSchedule::at: t outside ramp");
  const double s = tau_qa > 0.0 ? std::clamp(t / tau_qa, 0.0, 1.0) : 1.0;
  const double ratio = start_ratio + (end_ratio - start_ratio) * s;
  return {t1, t2, phi_h, ratio * t2};
}

double peierls_phase_at(Vec2 displacement, double x_mid, double t, double lambda,
                        const DriveParams& drive, double nn_distance) {
  const double wt = drive.omega * t;
  const double amp = lambda * drive.envelope.value(x_mid) / nn_distance;
  return amp * (displacement.x * std::sin(wt) + displacement.y * std::sin(wt - drive.polarization_phase));
}

double peierls_phase(const Bond& bond, Vec2 midpoint, double t, const DriveParams& drive,
                     const Schedule& schedule, double nn_distance) {
  if (bond.order != BondOrder::Nearest) {
    throw std::invalid_argument("peierls_phase: drive phases apply to nearest-neighbour bonds only");
  }
  return peierls_phase_at(bond.displacement, midpoint.x, t, schedule.at(t).lambda, drive, nn_distance);
}

}  // namespace flochern
