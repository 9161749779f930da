#include "flochern/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace flochern {
namespace {

std::vector<double> x_of(const std::vector<Site>& sites) {
  std::vector<double> x;
  x.reserve(sites.size());
  for (const Site& s : sites) x.push_back(s.position.x);
  return x;
}

std::vector<double> signs_of(const std::vector<Site>& sites) {
  std::vector<double> s;
  s.reserve(sites.size());
  for (const Site& site : sites) s.push_back(sublattice_sign(site.sublattice));
  return s;
}

// First maximum of J1; |t2_eff| is monotone on (0, kJ1Max).
constexpr double kJ1Max = 1.8411837813406593;

// Polarisation phase -pi/2 maps onto phi_H = -pi/2 with the hopping
// conventions above; checked against the exact one-period operator in
// tests/unit/test_floquet.cpp.
constexpr double kFluxSignPerPolarization = 1.0;

}  // namespace

// ---------------------------------------------------------------------------
// DrivenModel
// ---------------------------------------------------------------------------

DrivenModel::DrivenModel(const std::vector<Site>& sites, const std::vector<Bond>& nn_bonds,
                         double nn_distance, double t1, DriveParams drive, Schedule schedule)
    : x_(x_of(sites)), sign_(signs_of(sites)), t1_(t1), drive_(drive), schedule_(std::move(schedule)) {
  terms_.reserve(nn_bonds.size());
  for (const Bond& b : nn_bonds) {
    if (b.order != BondOrder::Nearest) {
      throw std::invalid_argument("DrivenModel: drive phases apply to nearest-neighbour bonds only");
    }
    terms_.push_back({b.from, b.to, b.displacement.y});
    const double env = drive_.envelope.value(b.midpoint(sites).x);
    coeff_x_.push_back(env * b.displacement.x / nn_distance);
    coeff_y_.push_back(env * b.displacement.y / nn_distance);
  }
}

DrivenModel::DrivenModel(const RibbonGeometry& g, double t1, DriveParams drive, Schedule schedule)
    : DrivenModel(g.sites, g.nn_bonds, g.params.nn_distance(), t1, drive, std::move(schedule)) {}

DrivenModel::DrivenModel(const FlakeGeometry& g, double t1, DriveParams drive, Schedule schedule)
    : DrivenModel(g.sites, g.nn_bonds, g.params.nn_distance(), t1, drive, std::move(schedule)) {}

void DrivenModel::evaluate(double t, std::span<cplx> amplitudes, std::span<double> onsite) const {
  const Schedule::Values v = schedule_.at(t);
  const double wt = drive_.omega * t;
  const double s1 = std::sin(wt);
  const double s2 = std::sin(wt - drive_.polarization_phase);
  for (std::size_t b = 0; b < terms_.size(); ++b) {
    const double phase = v.lambda * (coeff_x_[b] * s1 + coeff_y_[b] * s2);
    amplitudes[b] = t1_ * cplx(std::cos(phase), -std::sin(phase));
  }
  for (std::size_t i = 0; i < sign_.size(); ++i) onsite[i] = sign_[i] * v.delta_ab;
}

// ---------------------------------------------------------------------------
// HaldaneModel
// ---------------------------------------------------------------------------

HaldaneModel::HaldaneModel(const RibbonGeometry& g, HaldaneParams params) : fixed_(params) {
  init(g.sites, g.nn_bonds, g.nnn_bonds);
}

HaldaneModel::HaldaneModel(const RibbonGeometry& g, HaldaneSchedule schedule)
    : schedule_(schedule), fixed_(schedule.at(0.0)) {
  init(g.sites, g.nn_bonds, g.nnn_bonds);
}

HaldaneModel::HaldaneModel(const FlakeGeometry& g, HaldaneParams params) : fixed_(params) {
  init(g.sites, g.nn_bonds, g.nnn_bonds);
}

void HaldaneModel::init(const std::vector<Site>& sites, const std::vector<Bond>& nn,
                        const std::vector<Bond>& nnn) {
  x_ = x_of(sites);
  sign_ = signs_of(sites);
  for (const Bond& b : nn) {
    terms_.push_back({b.from, b.to, b.displacement.y});
    chirality_.push_back(0);
  }
  for (const Bond& b : nnn) {
    terms_.push_back({b.from, b.to, b.displacement.y});
    chirality_.push_back(b.chirality);
  }
}

HaldaneParams HaldaneModel::params_at(double t) const { return schedule_ ? schedule_->at(t) : fixed_; }

void HaldaneModel::evaluate(double t, std::span<cplx> amplitudes, std::span<double> onsite) const {
  const HaldaneParams p = params_at(t);
  const cplx plus = p.t2 * std::polar(1.0, p.phi_h);
  const cplx minus = p.t2 * std::polar(1.0, -p.phi_h);
  for (std::size_t b = 0; b < terms_.size(); ++b) {
    const int nu = chirality_[b];
    // c^dag_to c_from carries exp(-i nu phi_H): a counterclockwise path read
    // backwards. This orientation gives Chern number +1 at phi_H = +pi/2.
    amplitudes[b] = nu == 0 ? cplx(p.t1) : (nu > 0 ? minus : plus);
  }
  for (std::size_t i = 0; i < sign_.size(); ++i) onsite[i] = sign_[i] * p.delta_ab;
}

// ---------------------------------------------------------------------------
// SectorAssembler
// ---------------------------------------------------------------------------

SectorAssembler::SectorAssembler(const TightBindingModel& model, double k, double kappa)
    : model_(&model), k_(k), kappa_(kappa) {
  std::set<int> offs{0};
  for (const HoppingTerm& term : model.terms()) {
    offs.insert(term.from - term.to);
    offs.insert(term.to - term.from);
  }
  offsets_.assign(offs.begin(), offs.end());
  const auto slot = [&](int off) {
    return static_cast<int>(std::find(offsets_.begin(), offsets_.end(), off) - offsets_.begin());
  };
  const double q = k + kappa;
  for (const HoppingTerm& term : model.terms()) {
    bloch_.push_back(std::polar(1.0, -q * term.dy));
    slot_fwd_.push_back(slot(term.from - term.to));
    slot_bwd_.push_back(slot(term.to - term.from));
  }
}

BandedMatrix SectorAssembler::make_matrix() const {
  return BandedMatrix(static_cast<std::size_t>(model_->dimension()), offsets_);
}

void SectorAssembler::assemble(std::span<const cplx> amplitudes, std::span<const double> onsite,
                               BandedMatrix& out) const {
  out.set_zero();
  const auto diag = static_cast<std::size_t>(std::find(offsets_.begin(), offsets_.end(), 0) - offsets_.begin());
  for (std::size_t i = 0; i < onsite.size(); ++i) out.slot(diag, i) += onsite[i];
  const auto& terms = model_->terms();
  for (std::size_t b = 0; b < terms.size(); ++b) {
    const cplx v = amplitudes[b] * bloch_[b];
    out.slot(static_cast<std::size_t>(slot_fwd_[b]), static_cast<std::size_t>(terms[b].to)) += v;
    out.slot(static_cast<std::size_t>(slot_bwd_[b]), static_cast<std::size_t>(terms[b].from)) += std::conj(v);
  }
}

void SectorAssembler::assemble_derivative(std::span<const cplx> amplitudes, BandedMatrix& out) const {
  out.set_zero();
  const auto& terms = model_->terms();
  for (std::size_t b = 0; b < terms.size(); ++b) {
    const cplx v = cplx(0.0, -terms[b].dy) * amplitudes[b] * bloch_[b];
    out.slot(static_cast<std::size_t>(slot_fwd_[b]), static_cast<std::size_t>(terms[b].to)) += v;
    out.slot(static_cast<std::size_t>(slot_bwd_[b]), static_cast<std::size_t>(terms[b].from)) += std::conj(v);
  }
}

ModelSource::ModelSource(const TightBindingModel& model, double k, double kappa)
    : model_(model),
      assembler_(model, k, kappa),
      amps_(model.terms().size()),
      onsite_(static_cast<std::size_t>(model.dimension())) {}

void ModelSource::assemble(double t, BandedMatrix& out) const {
  model_.evaluate(t, amps_, onsite_);
  assembler_.assemble(amps_, onsite_, out);
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

StripHamiltonian build_strip_h(const RibbonGeometry& g, double k, double t, double t1,
                               const DriveParams& drive, const Schedule& schedule, double kappa) {
  const DrivenModel model(g, t1, drive, schedule);
  const ModelSource src(model, k, kappa);
  StripHamiltonian out{k, t, kappa, src.make_matrix()};
  src.assemble(t, out.matrix);
  return out;
}

StripHamiltonian build_haldane_strip(const RibbonGeometry& g, double k, const HaldaneParams& params) {
  const HaldaneModel model(g, params);
  const ModelSource src(model, k);
  StripHamiltonian out{k, 0.0, 0.0, src.make_matrix()};
  src.assemble(0.0, out.matrix);
  return out;
}

BandedMatrix build_flake_h(const FlakeGeometry& g, double t, const FlakeModelSpec& spec) {
  std::unique_ptr<TightBindingModel> model;
  if (const auto* driven = std::get_if<DrivenSpec>(&spec)) {
    model = std::make_unique<DrivenModel>(g, driven->t1, driven->drive, driven->schedule);
  } else {
    model = std::make_unique<HaldaneModel>(g, std::get<HaldaneParams>(spec));
  }
  const ModelSource src(*model, 0.0);
  BandedMatrix h = src.make_matrix();
  src.assemble(t, h);
  return h;
}

Vec2 dirac_point(int sign, double a) {
  return {kTwoPi / (kSqrt3 * a), (sign >= 0 ? 1.0 : -1.0) * kTwoPi / (3.0 * a)};
}

CMatrix build_bloch_h(Vec2 k, double t, double t1, const DriveParams& drive, const Schedule& schedule,
                      double a) {
  const double d = a / kSqrt3;
  const Schedule::Values v = schedule.at(t);
  cplx hba{};
  for (const Vec2& delta : delta_vectors(d)) {
    const double phase = peierls_phase_at(delta, 0.0, t, v.lambda, drive, d);
    hba += t1 * std::polar(1.0, -phase) * std::polar(1.0, -k.dot(delta));
  }
  CMatrix h(2, 2);
  h << v.delta_ab, std::conj(hba), hba, -v.delta_ab;
  return h;
}

BandedMatrix BlochDrivenSource::make_matrix() const {
  return BandedMatrix::from_dense(build_bloch_h(k_, 0.0, t1_, drive_, schedule_, a_));
}

void BlochDrivenSource::assemble(double t, BandedMatrix& out) const {
  out = BandedMatrix::from_dense(build_bloch_h(k_, t, t1_, drive_, schedule_, a_));
}

CMatrix build_haldane_bloch(Vec2 k, const HaldaneParams& p, double a) {
  const auto deltas = delta_vectors(a / kSqrt3);
  cplx hba{};
  for (const Vec2& delta : deltas) hba += p.t1 * std::polar(1.0, -k.dot(delta));
  cplx haa = p.delta_ab;
  cplx hbb = -p.delta_ab;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      // A -> B along delta_i, then B -> A along -delta_j.
      const Vec2 first = deltas[i];
      const Vec2 second = -1.0 * deltas[j];
      const Vec2 b = first + second;
      const double nu_a = first.cross(second) > 0 ? 1.0 : -1.0;
      haa += p.t2 * std::polar(1.0, -nu_a * p.phi_h) * std::polar(1.0, -k.dot(b));
      // B -> A along -delta_i, then A -> B along delta_j: displacement -b.
      const double nu_b = (-1.0 * deltas[i]).cross(deltas[j]) > 0 ? 1.0 : -1.0;
      hbb += p.t2 * std::polar(1.0, -nu_b * p.phi_h) * std::polar(1.0, k.dot(b));
    }
  }
  CMatrix h(2, 2);
  h << haa, std::conj(hba), hba, hbb;
  return h;
}

EffectiveFloquetParams effective_floquet_params(double lambda, double omega, double t1,
                                                double polarization_phase) {
  EffectiveFloquetParams p;
  const double j0 = std::cyl_bessel_j(0.0, lambda);
  const double j1 = std::cyl_bessel_j(1.0, lambda);
  p.t1_eff = t1 * j0;
  p.t2_eff = -kSqrt3 * (t1 * j1) * (t1 * j1) / omega;
  const double pol_sign = std::sin(polarization_phase) >= 0.0 ? 1.0 : -1.0;
  p.phi_h_eff = kFluxSignPerPolarization * pol_sign * kPi / 2;
  p.below_bandwidth = omega <= 6.0 * std::abs(t1);
  return p;
}

double critical_lambda(double delta_ab, double omega, double t1) {
  if (!(delta_ab > 0.0)) throw std::invalid_argument("critical_lambda: Delta_AB must be positive");
  const auto excess = [&](double lambda) {
    return 3.0 * kSqrt3 * std::abs(effective_floquet_params(lambda, omega, t1).t2_eff) - delta_ab;
  };
  double lo = 0.0;
  double hi = kJ1Max;
  if (excess(hi) < 0.0) {
    throw std::domain_error("critical_lambda: no transition below the first maximum of J1");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace flochern
