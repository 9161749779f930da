#include "flochern/observables.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace flochern {

double sector_energy(const SlaterSector& sector, const BandedMatrix& h) {
  const auto n = static_cast<std::size_t>(sector.dimension());
  std::vector<cplx> hx(n);
  double e = 0.0;
  for (int j = 0; j < sector.occupied(); ++j) {
    const cplx* col = sector.orbitals.col(j).data();
    h.apply(col, hx.data());
    e += kernels::active().dotc(n, col, hx.data()).real();
  }
  return e;
}

ResidualEnergyRecord residual_energy(const SlaterState& state, double t, const TightBindingModel& model) {
  std::vector<cplx> amps(model.terms().size());
  std::vector<double> onsite(static_cast<std::size_t>(model.dimension()));
  model.evaluate(t, amps, onsite);
  ResidualEnergyRecord r;
  r.t = t;
  for (const auto& sector : state) {
    SectorAssembler assembler(model, sector.k);
    BandedMatrix h = assembler.make_matrix();
    assembler.assemble(amps, onsite, h);
    r.energy += sector_energy(sector, h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.to_dense(), Eigen::EigenvaluesOnly);
    r.ground_energy += es.eigenvalues().head(sector.occupied()).sum();
  }
  r.e_res = r.energy - r.ground_energy;
  return r;
}

BulkEdgeSplit fit_bulk_edge(const std::vector<std::pair<double, double>>& l_and_eres) {
  std::set<double> distinct;
  for (const auto& p : l_and_eres) distinct.insert(p.first);
  if (distinct.size() < 2) throw std::invalid_argument("fit_bulk_edge: need at least two distinct sizes");
  const auto n = static_cast<Eigen::Index>(l_and_eres.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = l_and_eres[static_cast<std::size_t>(i)].first;
    x(i, 0) = l * l;
    x(i, 1) = l;
    y(i) = l_and_eres[static_cast<std::size_t>(i)].second;
  }
  const Eigen::Vector2d c = x.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = y - x * c;
  BulkEdgeSplit out;
  out.eps_bulk = c(0);
  out.eps_edge = c(1);
  out.points = static_cast<int>(n);
  out.fit_residual = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  if (n > 2) {
    const double s2 = r.squaredNorm() / static_cast<double>(n - 2);
    const Eigen::Matrix2d cov = s2 * (x.transpose() * x).inverse();
    out.stderr_bulk = std::sqrt(cov(0, 0));
    out.stderr_edge = std::sqrt(cov(1, 1));
  }
  return out;
}

PowerLawFit kz_exponent(const std::vector<std::pair<double, double>>& tau_and_eps) {
  PowerLawFit out;
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [tau, eps] : tau_and_eps) {
    if (!(eps > 0.0) || !(tau > 0.0)) {
      out.warnings.push_back("dropped nonpositive point at tau=" + std::to_string(tau));
      continue;
    }
    lx.push_back(std::log(tau));
    ly.push_back(std::log(eps));
  }
  if (lx.size() < 4) throw std::invalid_argument("kz_exponent: need at least 4 positive points");
  const auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
  if (*hi - *lo < std::log(10.0) - 1e-12) throw std::invalid_argument("kz_exponent: tau range below one decade");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  out.exponent = sxy / sxx;
  const double intercept = my - out.exponent * mx;
  out.prefactor = std::exp(intercept);
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - intercept - out.exponent * lx[i];
    rss += r * r;
  }
  out.stderr = std::sqrt(rss / (n - 2.0) / sxx);
  out.used = static_cast<int>(lx.size());
  return out;
}

EdgeWeight edge_weight(const CVector& orbital, int depth) {
  const auto n = static_cast<int>(orbital.size());
  if (depth <= 0 || depth > n / 2) throw std::invalid_argument("edge_weight: depth must be in (0, Nx/2]");
  EdgeWeight w;
  w.left = orbital.head(depth).squaredNorm();
  w.right = orbital.tail(depth).squaredNorm();
  return w;
}

EdgeClass classify_edge(const CVector& orbital, int depth, double threshold) {
  const EdgeWeight w = edge_weight(orbital, depth);
  if (w.left > threshold) return EdgeClass::Left;
  if (w.right > threshold) return EdgeClass::Right;
  return EdgeClass::Bulk;
}

namespace {

struct EdgePair {
  double gap;
  EdgeClass homo;
};

EdgePair edge_pair(const RibbonGeometry& g, double k, const HaldaneParams& params) {
  const StripHamiltonian h = build_haldane_strip(g, k, params);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix.to_dense());
  const int n_occ = g.nx() / 2;
  return {es.eigenvalues()(n_occ) - es.eigenvalues()(n_occ - 1), classify_edge(es.eigenvectors().col(n_occ - 1))};
}

}  // namespace

EdgeLzResult edge_lz_integral(const HaldaneParams& params, const RibbonGeometry& g) {
  const double k_plus = g.k_dirac();
  const double k_f = g.k_zone_edge();
  // Chiral edge branches carry the HOMO from one edge to the other across
  // the zone edge; in the trivial phase it stays on one edge.
  bool seen_left = false;
  bool seen_right = false;
  constexpr int kProbe = 32;
  for (int i = 0; i <= kProbe; ++i) {
    const double k = k_plus + (kTwoPi - 2.0 * k_plus) * i / kProbe;
    const EdgeClass c = edge_pair(g, k, params).homo;
    seen_left = seen_left || c == EdgeClass::Left;
    seen_right = seen_right || c == EdgeClass::Right;
  }
  if (!(seen_left && seen_right)) {
    throw std::domain_error("edge_lz_integral: no edge band crosses the gap between K_+ and K_-");
  }

  const auto integrate = [&](int intervals) {
    const double h = (k_f - k_plus) / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
      sum += w * edge_pair(g, k_plus + i * h, params).gap;
    }
    return sum * h / kTwoPi;
  };
  EdgeLzResult out;
  out.intervals = 16;
  out.value = integrate(out.intervals);
  for (int refine = 0; refine < 8; ++refine) {
    const double next = integrate(2 * out.intervals);
    out.last_change = std::abs(next - out.value) / std::max(std::abs(next), 1e-300);
    out.value = next;
    out.intervals *= 2;
    if (out.last_change < 0.01) break;
  }
  return out;
}

BandedMatrix current_operator(const SectorAssembler& assembler, std::span<const cplx> amplitudes) {
  BandedMatrix j = assembler.make_matrix();
  assembler.assemble_derivative(amplitudes, j);
  return j;
}

std::vector<double> measure_currents(const SlaterState& state, const std::vector<BandedMatrix>& currents) {
  if (state.size() != currents.size()) throw std::invalid_argument("measure_currents: sector count mismatch");
  if (state.empty()) return {};
  const int n = state.front().dimension();
  std::vector<double> out(static_cast<std::size_t>(n - 1), 0.0);
  for (std::size_t s = 0; s < state.size(); ++s) {
    const CMatrix& psi = state[s].orbitals;
    for (int i = 0; i + 1 < n; ++i) {
      const cplx jij = currents[s](static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1));
      if (jij == cplx{}) continue;
      const cplx rho = (psi.row(i + 1).array() * psi.row(i).array().conjugate()).sum();
      out[static_cast<std::size_t>(i)] += 2.0 * (jij * rho).real();
    }
  }
  return out;
}

std::vector<double> measure_currents(const SlaterState& state, double t, const SectorEngine& engine) {
  const TightBindingModel& model = engine.model();
  std::vector<cplx> amps(model.terms().size());
  std::vector<double> onsite(static_cast<std::size_t>(model.dimension()));
  model.evaluate(t, amps, onsite);
  std::vector<BandedMatrix> currents;
  currents.reserve(engine.num_sectors());
  for (std::size_t s = 0; s < engine.num_sectors(); ++s) currents.push_back(current_operator(engine.assembler(s), amps));
  return measure_currents(state, currents);
}

double window_average(const std::vector<double>& t, const std::vector<double>& values) {
  if (t.size() != values.size() || t.size() < 2) throw std::invalid_argument("window_average: need >= 2 samples");
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (values[i] + values[i - 1]) * (t[i] - t[i - 1]);
  return sum / (t.back() - t.front());
}

double metallicity(const std::vector<RVector>& occupation_rows) {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& row : occupation_rows) {
    for (Eigen::Index a = 0; a < row.size(); ++a) sum += std::min(row(a), 1.0 - row(a));
    count += static_cast<double>(row.size());
  }
  return count > 0.0 ? sum / count : 0.0;
}

InverseLFit fit_inverse_l(const std::vector<std::pair<double, double>>& l_and_value, std::optional<double> fixed_c0) {
  const auto n = static_cast<Eigen::Index>(l_and_value.size());
  const Eigen::Index p = fixed_c0 ? 2 : 3;
  if (n < p) throw std::invalid_argument("fit_inverse_l: too few points");
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [l, v] = l_and_value[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    if (!fixed_c0) x(i, c++) = 1.0;
    x(i, c++) = 1.0 / l;
    x(i, c) = 1.0 / (l * l);
    y(i) = fixed_c0 ? v - *fixed_c0 : v;
  }
  const Eigen::VectorXd c = x.colPivHouseholderQr().solve(y);
  InverseLFit out;
  if (fixed_c0) {
    out.c0 = *fixed_c0;
    out.c1 = c(0);
    out.c2 = c(1);
  } else {
    out.c0 = c(0);
    out.c1 = c(1);
    out.c2 = c(2);
  }
  return out;
}

}  // namespace flochern
