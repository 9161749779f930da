#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "flochern/chern_marker.hpp"
#include "flochern/floquet.hpp"

using namespace flochern;

namespace {

DriveParams circular(double omega, double pol = -kPi / 2) {
  DriveParams d;
  d.omega = omega;
  d.polarization_phase = pol;
  return d;
}

/// exp(-i H tau) by diagonalization.
Propagator exact_propagator(const CMatrix& h, double tau) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * tau);
  Propagator p;
  p.u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  p.t_end = tau;
  return p;
}

Propagator strip_propagator(const RibbonGeometry& g, double k, double omega, double lambda, double delta,
                            double pol = -kPi / 2) {
  const DriveParams drive = circular(omega, pol);
  const DrivenModel model(g, -1.0, drive, Schedule::frozen(lambda, delta));
  const ModelSource src(model, k);
  return one_period_propagator(src, k, 0.0, drive.period(), 400);
}

Propagator bloch_propagator(Vec2 k, double omega, double lambda, double delta) {
  const DriveParams drive = circular(omega);
  const BlochDrivenSource src(k, -1.0, drive, Schedule::frozen(lambda, delta));
  return one_period_propagator(src, k.y, 0.0, drive.period(), 400);
}

double gap_at_dirac(double lambda, double delta) {
  const FloquetSpectrum s = floquet_spectrum(bloch_propagator(dirac_point(1), 7.0, lambda, delta), 7.0);
  return floquet_gap(s.quasi_energies(0), s.quasi_energies(1), 7.0);
}

/// Golden-section minimum of the Floquet gap at K_+ over lambda.
double scanned_critical_lambda(double delta, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = gap_at_dirac(c, delta);
  double fd = gap_at_dirac(d, delta);
  while (b - a > 1e-4) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = gap_at_dirac(c, delta);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = gap_at_dirac(d, delta);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("identity propagator has zero quasi-energies and the coordinate basis") {
  Propagator p;
  p.u = CMatrix::Identity(5, 5);
  const FloquetSpectrum s = floquet_spectrum(p, 7.0);
  CHECK(s.quasi_energies.cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.modes - CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("static spectra inside the zone are reproduced without folding") {
  const RibbonGeometry g = build_ribbon({1.0, 12, 1});
  const double omega = 7.0;
  const CMatrix h = build_strip_h(g, 1.2, 0.0, -1.0, {}, Schedule::frozen(0.0, 0.1)).matrix.to_dense();
  const RVector e = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues();
  const FloquetSpectrum s = floquet_spectrum(exact_propagator(h, kTwoPi / omega), omega);
  CHECK((s.quasi_energies - e).cwiseAbs().maxCoeff() < 1e-7);
  // exp(-i eps tau) reproduces the eigenphase and the modes are orthonormal.
  for (Eigen::Index i = 0; i < s.modes.cols(); ++i) {
    const CVector v = s.modes.col(i);
    const CVector uv = exact_propagator(h, kTwoPi / omega).u * v;
    CHECK((uv - std::polar(1.0, -s.quasi_energies(i) * kTwoPi / omega) * v).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(gram_deviation(s.modes) < 1e-12);
}

TEST_CASE("sub-bandwidth frequency folds the states outside the zone") {
  const RibbonGeometry g = build_ribbon({1.0, 16, 1});
  const double omega = 4.0;
  const CMatrix h = build_strip_h(g, 0.4, 0.0, -1.0, {}, Schedule::frozen(0.0, 0.1)).matrix.to_dense();
  const RVector e = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues();
  const FloquetSpectrum s = floquet_spectrum(exact_propagator(h, kTwoPi / omega), omega);
  std::vector<double> folded;
  int outside = 0;
  for (double v : e) {
    folded.push_back(fold_quasi_energy(v, omega));
    outside += (v < -0.5 * omega || v >= 0.5 * omega) ? 1 : 0;
  }
  std::sort(folded.begin(), folded.end());
  CHECK(outside > 0);
  for (std::size_t i = 0; i < folded.size(); ++i) CHECK(std::abs(s.quasi_energies(static_cast<Eigen::Index>(i)) - folded[i]) < 1e-7);
  int moved = 0;
  for (double v : e) moved += std::abs(fold_quasi_energy(v, omega) - v) > 1e-9 ? 1 : 0;
  CHECK(moved == outside);
}

TEST_CASE("quasi-energy folding maps into the half-open zone") {
  CHECK(fold_quasi_energy(0.0, 4.0) == 0.0);
  CHECK(fold_quasi_energy(2.0, 4.0) == -2.0);
  CHECK(fold_quasi_energy(-2.0, 4.0) == -2.0);
  CHECK(fold_quasi_energy(2.5, 4.0) == Catch::Approx(-1.5));
  CHECK(fold_quasi_energy(-9.0, 4.0) == Catch::Approx(-1.0));
}

TEST_CASE("an eigenphase of exactly pi sits on the lower zone edge") {
  Propagator p;
  p.u = CMatrix::Zero(2, 2);
  p.u(0, 0) = -1.0;
  p.u(1, 1) = 1.0;
  const FloquetSpectrum s = floquet_spectrum(p, 4.0);
  CHECK(s.quasi_energies(0) == -2.0);
  CHECK(s.quasi_energies(1) == 0.0);
}

TEST_CASE("Floquet gap takes the shortest distance around the zone") {
  const double w = 7.0;
  CHECK(floquet_gap(0.4, 0.4, w) == 0.0);
  const double d = 0.1;
  CHECK(floquet_gap(w / 2 - d, -w / 2 + d, w) == Catch::Approx(2 * d));
  CHECK(floquet_gap(0.3 * w, -0.3 * w, w) == Catch::Approx(0.4 * w));
  for (double a : {-3.0, -0.2, 1.1, 3.4}) {
    for (double b : {-3.3, 0.0, 2.9}) CHECK(floquet_gap(a, b, w) == floquet_gap(b, a, w));
  }
}

TEST_CASE("non-unitary input is rejected") {
  Propagator p;
  p.u = 2.0 * CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(floquet_spectrum(p, 7.0), std::invalid_argument);
}

TEST_CASE("Floquet ground state of a diagonal propagator") {
  CMatrix d = CMatrix::Zero(2, 2);
  d.diagonal() << -1.0, 1.0;
  const FloquetGroundState fgs = floquet_ground_state(floquet_spectrum(exact_propagator(d, kTwoPi / 7.0), 7.0), 1);
  CHECK(fgs.count == 1);
  CHECK_FALSE(fgs.regime_warning);
  CHECK(std::abs(fgs.sector.orbitals(0, 0)) == Catch::Approx(1.0));
  CHECK(std::abs(fgs.sector.orbitals(1, 0)) < 1e-12);
}

TEST_CASE("above the bandwidth the Floquet ground state is the static ground state") {
  const RibbonGeometry g = build_ribbon({1.0, 16, 1});
  const CMatrix h = build_strip_h(g, 0.9, 0.0, -1.0, {}, Schedule::frozen(0.0, 0.1)).matrix.to_dense();
  const GroundState gs = ground_state(h, 8);
  const FloquetGroundState fgs = floquet_ground_state(floquet_spectrum(strip_propagator(g, 0.9, 7.0, 0.0, 0.1), 7.0), 8);
  REQUIRE(fgs.count == 8);
  CHECK_FALSE(fgs.regime_warning);
  const std::complex<double> det = (gs.sector.orbitals.adjoint() * fgs.sector.orbitals).determinant();
  CHECK(std::abs(det) > 1 - 1e-8);
}

TEST_CASE("below the bandwidth the Floquet ground state differs from the static one") {
  const RibbonGeometry g = build_ribbon({1.0, 16, 1});
  const CMatrix h = build_strip_h(g, 0.0, 0.0, -1.0, {}, Schedule::frozen(0.0, 0.1)).matrix.to_dense();
  const GroundState gs = ground_state(h, 8);
  const FloquetGroundState fgs = floquet_ground_state(floquet_spectrum(strip_propagator(g, 0.0, 4.0, 0.0, 0.1), 4.0), 8);
  // Folded conduction states join the negative quasi-energies.
  bool coincides = fgs.count == 8;
  if (coincides) coincides = std::abs((gs.sector.orbitals.adjoint() * fgs.sector.orbitals).determinant()) > 1 - 1e-8;
  CHECK_FALSE(coincides);
}

TEST_CASE("occupations of a sector made of Floquet modes are exactly one or zero") {
  const RibbonGeometry g = build_ribbon({1.0, 12, 1});
  const FloquetSpectrum s = floquet_spectrum(strip_propagator(g, 1.7, 7.0, 1.0, 0.1), 7.0);
  SlaterSector sector{1.7, s.modes.leftCols(6)};
  const RVector n = occupations(sector, s);
  for (Eigen::Index a = 0; a < n.size(); ++a) CHECK(std::abs(n(a) - (a < 6 ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("occupations sum to the particle number and are conserved stroboscopically") {
  const RibbonGeometry g = build_ribbon({1.0, 12, 1});
  const double k = 2.3;
  const DriveParams drive = circular(7.0);
  const DrivenModel model(g, -1.0, drive, Schedule::frozen(0.8, 0.1));
  const ModelSource src(model, k);
  const Propagator u = one_period_propagator(src, k, 0.0, drive.period(), 400);
  const FloquetSpectrum s = floquet_spectrum(u, 7.0);

  // A static ground state is not made of Floquet modes: fractional n.
  SlaterSector x = ground_state(build_strip_h(g, k, 0.0, -1.0, drive, Schedule::frozen(0.0, 0.1)).matrix.to_dense(), 6).sector;
  const RVector n0 = occupations(x, s);
  CHECK(std::abs(n0.sum() - 6.0) < 1e-8);
  const double dt = drive.period() / 400;
  rk4_evolve(x, 0.0, 100 * drive.period(), dt, src);
  const RVector n100 = occupations(x, s);
  CHECK(std::abs(n100.sum() - 6.0) < 1e-8);
  CHECK((n100 - n0).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("Floquet gap at K_+ matches the effective Haldane mass") {
  const double delta = 0.1;
  const EffectiveFloquetParams eff = effective_floquet_params(1.0, 7.0, -1.0);
  const double mass = delta - 3 * std::sqrt(3.0) * std::abs(eff.t2_eff);
  const double bandwidth = 6.0;
  CHECK(std::abs(gap_at_dirac(1.0, delta) - 2 * std::abs(mass)) < 0.03 * bandwidth);
}

TEST_CASE("critical amplitude agrees with the scanned Floquet gap minimum") {
  for (double delta : {0.05, 0.1}) {
    const double analytic = critical_lambda(delta, 7.0, -1.0);
    const double scanned = scanned_critical_lambda(delta, 0.5 * analytic, 1.5 * analytic);
    CHECK(std::abs(scanned - analytic) < 0.05 * analytic);
  }
}

TEST_CASE("driven strip quasi-energies follow the effective Haldane strip") {
  const RibbonGeometry g = build_ribbon({1.0, 16, 1});
  const double bandwidth = 6.0;
  for (double lambda : {0.5, 1.0}) {
    const EffectiveFloquetParams eff = effective_floquet_params(lambda, 7.0, -1.0);
    const HaldaneParams hp{eff.t1_eff, eff.t2_eff, eff.phi_h_eff, 0.1};
    for (double k : {0.0, 1.5, kTwoPi / 3, 2.6, kPi}) {
      const FloquetSpectrum s = floquet_spectrum(strip_propagator(g, k, 7.0, lambda, 0.1), 7.0);
      const RVector e = Eigen::SelfAdjointEigenSolver<CMatrix>(build_haldane_strip(g, k, hp).matrix.to_dense()).eigenvalues();
      CHECK((s.quasi_energies - e).cwiseAbs().maxCoeff() < 0.03 * bandwidth);
    }
  }
}

TEST_CASE("effective flux sign follows the polarization") {
  // With Delta != 0 the two flux signs give different strip spectra; the
  // exact Floquet bands must sit closer to the mapped sign.
  const RibbonGeometry g = build_ribbon({1.0, 16, 1});
  for (double pol : {-kPi / 2, kPi / 2}) {
    const EffectiveFloquetParams eff = effective_floquet_params(1.0, 7.0, -1.0, pol);
    double dev_mapped = 0.0;
    double dev_other = 0.0;
    for (double k : {1.8, kTwoPi / 3, 2.4, 3.6, 2 * kTwoPi / 3}) {
      const FloquetSpectrum s = floquet_spectrum(strip_propagator(g, k, 7.0, 1.0, 0.1, pol), 7.0);
      for (double sign : {1.0, -1.0}) {
        const HaldaneParams hp{eff.t1_eff, eff.t2_eff, sign * eff.phi_h_eff, 0.1};
        const RVector e = Eigen::SelfAdjointEigenSolver<CMatrix>(build_haldane_strip(g, k, hp).matrix.to_dense()).eigenvalues();
        (sign > 0 ? dev_mapped : dev_other) += (s.quasi_energies - e).cwiseAbs().maxCoeff();
      }
    }
    CHECK(dev_mapped < 0.5 * dev_other);
  }
}

TEST_CASE("band connection follows permuted modes across momenta") {
  Propagator p;
  CMatrix h = CMatrix::Zero(4, 4);
  h.diagonal() << -1.5, -0.5, 0.5, 1.5;
  h(0, 1) = h(1, 0) = 0.01;
  const FloquetSpectrum a = floquet_spectrum(exact_propagator(h, kTwoPi / 7.0), 7.0);
  // Same modes, quasi-energies reordered so that modes 0 and 3 swap places.
  CMatrix h2 = h;
  h2(0, 0) = 1.7;
  h2(3, 3) = -1.7;
  const FloquetSpectrum b = floquet_spectrum(exact_propagator(h2, kTwoPi / 7.0), 7.0);
  const auto bands = connect_bands({a, b});
  REQUIRE(bands.size() == 2);
  for (int band = 0; band < 4; ++band) {
    const CVector before = a.modes.col(bands[0][static_cast<std::size_t>(band)]);
    const CVector after = b.modes.col(bands[1][static_cast<std::size_t>(band)]);
    CHECK(std::abs(before.dot(after)) > 0.9);
  }
}

TEST_CASE("driven flake Floquet ground state carries the effective Chern number") {
  const FlakeGeometry g = build_flake({1.0, 12, 12});
  for (double pol : {-kPi / 2, kPi / 2}) {
    const DriveParams drive = circular(7.0, pol);
    const DrivenModel model(g, -1.0, drive, Schedule::frozen(1.0, 0.1));
    const ModelSource src(model, 0.0);
    const FloquetSpectrum s = floquet_spectrum(one_period_propagator(src, 0.0, 0.0, drive.period(), 400), 7.0);
    const FloquetGroundState fgs = floquet_ground_state(s, g.num_sites() / 2);
    const double c = chern_marker_region(fgs.sector.orbitals, g, central_region(g)).average;
    const EffectiveFloquetParams eff = effective_floquet_params(1.0, 7.0, -1.0, pol);
    const double expected = eff.t2_eff * std::sin(eff.phi_h_eff) > 0 ? 1.0 : -1.0;
    CHECK(c * expected > 0.7);
  }
}
