#include "flochern/evolution.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace flochern {
namespace {

void fix_phase(CMatrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    vectors.col(c).cwiseAbs2().maxCoeff(&best);
    const cplx v = vectors(best, c);
    if (std::abs(v) > 0.0) vectors.col(c) *= std::conj(v) / std::abs(v);
  }
}

// Re-diagonalise clusters of numerically equal eigenvalues against a
// position operator so the basis inside them is reproducible.
void break_ties(const RVector& values, CMatrix& vectors, std::span<const double> positions) {
  const Eigen::Index n = values.size();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  RVector pos(vectors.rows());
  for (Eigen::Index i = 0; i < pos.size(); ++i) {
    pos(i) = positions.empty() ? static_cast<double>(i) : positions[static_cast<std::size_t>(i)];
  }
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && values(end) - values(end - 1) < tol) ++end;
    const Eigen::Index size = end - start;
    if (size > 1) {
      const CMatrix block = vectors.middleCols(start, size);
      const CMatrix projected = block.adjoint() * pos.asDiagonal() * block;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(projected);
      vectors.middleCols(start, size) = block * es.eigenvectors();
    }
    start = end;
  }
}

void check_finite(const CMatrix& m, const char* where) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(where) + ": non-finite amplitudes (time step too large?)");
  }
}

// Raw RK4 loop, no orthonormality management.
void integrate(CMatrix& orbitals, double t0, long steps, double dt, const HamiltonianSource& source) {
  BandedMatrix h0 = source.make_matrix();
  BandedMatrix hm = source.make_matrix();
  BandedMatrix h1 = source.make_matrix();
  Rk4Workspace ws(static_cast<std::size_t>(orbitals.rows()));
  source.assemble(t0, h0);
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * dt;
    source.assemble(t + 0.5 * dt, hm);
    source.assemble(t + dt, h1);
    rk4_step(orbitals, h0, hm, h1, dt, ws);
    std::swap(h0, h1);
  }
}

}  // namespace

Eigensystem eigensystem(const CMatrix& h, std::span<const double> positions) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigensystem: eigensolver failed");
  Eigensystem out{es.eigenvalues(), es.eigenvectors()};
  break_ties(out.values, out.vectors, positions);
  fix_phase(out.vectors);
  return out;
}

GroundState ground_state(const CMatrix& h, int n_occ, std::span<const double> positions) {
  if (n_occ < 0 || n_occ > h.rows()) throw std::invalid_argument("ground_state: bad occupation count");
  const Eigensystem es = eigensystem(h, positions);
  GroundState gs;
  gs.sector.orbitals = es.vectors.leftCols(n_occ);
  gs.eigenvalues = es.values;
  gs.energy = es.values.head(n_occ).sum();
  return gs;
}

double gram_deviation(const CMatrix& orbitals) {
  const CMatrix gram = orbitals.adjoint() * orbitals;
  return (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void reorthonormalize(CMatrix& orbitals) {
  const CMatrix overlap = orbitals.adjoint() * orbitals;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(overlap);
  if (es.eigenvalues().minCoeff() <= 0.0) throw NumericalError("reorthonormalize: orbitals linearly dependent");
  const RVector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  orbitals = orbitals * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint());
}

void IntegratorLog::record(std::string what) { events.push_back(std::move(what)); }

void Rk4Workspace::resize(std::size_t n) {
  k_.assign(n, cplx{});
  tmp_.assign(n, cplx{});
  acc_.assign(n, cplx{});
}

void rk4_step(CMatrix& orbitals, const BandedMatrix& h_start, const BandedMatrix& h_mid,
              const BandedMatrix& h_end, double dt, Rk4Workspace& ws) {
  const auto& kt = kernels::active();
  const std::size_t n = static_cast<std::size_t>(orbitals.rows());
  if (ws.k_.size() != n) ws.resize(n);
  const cplx minus_i{0.0, -1.0};
  const auto hs = h_start.view();
  const auto hm = h_mid.view();
  const auto he = h_end.view();
  cplx* k = ws.k_.data();
  cplx* tmp = ws.tmp_.data();
  cplx* acc = ws.acc_.data();
  for (Eigen::Index c = 0; c < orbitals.cols(); ++c) {
    cplx* x = orbitals.col(c).data();
    kt.dia_apply(hs, x, k, minus_i);
    kt.xpby(n, x, dt / 6.0, k, acc);
    kt.xpby(n, x, dt / 2.0, k, tmp);
    kt.dia_apply(hm, tmp, k, minus_i);
    kt.axpy(n, dt / 3.0, k, acc);
    kt.xpby(n, x, dt / 2.0, k, tmp);
    kt.dia_apply(hm, tmp, k, minus_i);
    kt.axpy(n, dt / 3.0, k, acc);
    kt.xpby(n, x, dt, k, tmp);
    kt.dia_apply(he, tmp, k, minus_i);
    kt.axpy(n, dt / 6.0, k, acc);
    std::memcpy(static_cast<void*>(x), acc, n * sizeof(cplx));
  }
}

long step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_count: dt must be positive");
  const double span = t1 - t0;
  const double steps = std::round(span / dt);
  if (steps < 0.0 || std::abs(steps * dt - span) > 1e-9 * std::max(1.0, std::abs(span))) {
    throw std::invalid_argument("step_count: dt must divide the time window into integer steps");
  }
  return static_cast<long>(steps);
}

void rk4_evolve(SlaterSector& state, double t0, double t1, double dt, const HamiltonianSource& source,
                IntegratorLog* log, int check_every) {
  const long steps = step_count(t0, t1, dt);
  long done = 0;
  while (done < steps) {
    const long chunk = std::min<long>(check_every, steps - done);
    integrate(state.orbitals, t0 + static_cast<double>(done) * dt, chunk, dt, source);
    done += chunk;
    check_finite(state.orbitals, "rk4_evolve");
    const double dev = gram_deviation(state.orbitals);
    if (dev > kGramTolerance) {
      reorthonormalize(state.orbitals);
      if (log != nullptr) {
        ++log->reorthonormalizations;
        log->record("re-orthonormalized sector k=" + std::to_string(state.k) + " at step " +
                    std::to_string(done) + " (gram deviation " + std::to_string(dev) + ")");
      }
    }
  }
}

Propagator one_period_propagator(const HamiltonianSource& source, double k, double t_start, double period,
                                 int steps_per_period) {
  if (steps_per_period <= 0) throw std::invalid_argument("one_period_propagator: steps must be positive");
  Propagator p;
  p.k = k;
  p.t_start = t_start;
  p.t_end = t_start + period;
  p.u = CMatrix::Identity(source.dimension(), source.dimension());
  integrate(p.u, t_start, steps_per_period, period / steps_per_period, source);
  check_finite(p.u, "one_period_propagator");
  return p;
}

double unitarity_error(const CMatrix& u) { return gram_deviation(u); }

void exponential_midpoint_evolve(CMatrix& orbitals, double t0, double t1, double dt,
                                 const HamiltonianSource& source) {
  const long steps = step_count(t0, t1, dt);
  BandedMatrix h = source.make_matrix();
  for (long s = 0; s < steps; ++s) {
    source.assemble(t0 + (static_cast<double>(s) + 0.5) * dt, h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.to_dense());
    CVector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * dt);
    orbitals = es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * orbitals));
  }
}

SectorEngine::SectorEngine(const TightBindingModel& model, std::vector<double> momenta, ThreadPool* pool)
    : model_(model), momenta_(std::move(momenta)), pool_(pool) {
  for (double k : momenta_) assemblers_.emplace_back(model_, k);
  for (const auto& a : assemblers_) {
    matrices_.push_back({a.make_matrix(), a.make_matrix(), a.make_matrix()});
    workspaces_.emplace_back(static_cast<std::size_t>(model_.dimension()));
  }
  for (int s = 0; s < 3; ++s) {
    amps_[s].resize(model_.terms().size());
    onsite_[s].resize(static_cast<std::size_t>(model_.dimension()));
  }
}

void SectorEngine::step(SlaterState& state, double t, double dt) {
  if (state.size() != assemblers_.size()) throw std::invalid_argument("SectorEngine::step: sector count mismatch");
  const double times[3] = {t, t + 0.5 * dt, t + dt};
  for (int s = 0; s < 3; ++s) model_.evaluate(times[s], amps_[s], onsite_[s]);
  const auto body = [&](std::size_t i) {
    auto& mats = matrices_[i];
    for (int s = 0; s < 3; ++s) assemblers_[i].assemble(amps_[s], onsite_[s], mats[s]);
    rk4_step(state[i].orbitals, mats[0], mats[1], mats[2], dt, workspaces_[i]);
  };
  if (pool_ != nullptr) {
    pool_->parallel_for(assemblers_.size(), body);
  } else {
    for (std::size_t i = 0; i < assemblers_.size(); ++i) body(i);
  }
}

}  // namespace flochern
