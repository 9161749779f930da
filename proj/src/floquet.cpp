#include "flochern/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace flochern {

double fold_quasi_energy(double energy, double omega) {
  double e = std::fmod(energy + 0.5 * omega, omega);
  if (e < 0.0) e += omega;
  e -= 0.5 * omega;
  return e >= 0.5 * omega ? e - omega : e;
}

FloquetSpectrum floquet_spectrum(const Propagator& u, double omega, const CMatrix* tie_breaker,
                                 double unitarity_tolerance) {
  const double err = unitarity_error(u.u);
  if (err > unitarity_tolerance) {
    throw std::invalid_argument("floquet_spectrum: propagator not unitary (deviation " + std::to_string(err) + ")");
  }
  const Eigen::Index n = u.u.rows();
  const double period = kTwoPi / omega;
  Eigen::ComplexSchur<CMatrix> schur(u.u);
  const CMatrix q = schur.matrixU();
  const CVector lambdas = schur.matrixT().diagonal();

  std::vector<double> eps(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    // An eigenphase of exactly pi sits on the lower zone edge -omega/2.
    const double arg = std::arg(lambdas(i));
    eps[static_cast<std::size_t>(i)] = arg >= kPi ? -0.5 * omega : -arg / period;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return eps[static_cast<std::size_t>(a)] < eps[static_cast<std::size_t>(b)];
  });

  FloquetSpectrum s;
  s.k = u.k;
  s.omega = omega;
  s.quasi_energies.resize(n);
  s.modes.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.quasi_energies(i) = eps[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    s.modes.col(i) = q.col(order[static_cast<std::size_t>(i)]);
  }

  CMatrix fallback;
  if (tie_breaker == nullptr) {
    fallback = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) fallback(i, i) = static_cast<double>(i);
    tie_breaker = &fallback;
  }
  const double tol = 1e-10 / period;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && s.quasi_energies(end) - s.quasi_energies(end - 1) < tol) ++end;
    if (end - start > 1) {
      const CMatrix block = s.modes.middleCols(start, end - start);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(block.adjoint() * (*tie_breaker) * block);
      s.modes.middleCols(start, end - start) = block * es.eigenvectors();
    }
    start = end;
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index best = 0;
    s.modes.col(c).cwiseAbs2().maxCoeff(&best);
    const cplx v = s.modes(best, c);
    s.modes.col(c) *= std::conj(v) / std::abs(v);
  }
  return s;
}

double floquet_gap(double ea, double eb, double omega) {
  double best = std::abs(ea - eb);
  for (int m : {-1, 1}) best = std::min(best, std::abs(ea - eb + m * omega));
  return best;
}

FloquetGroundState floquet_ground_state(const FloquetSpectrum& spectrum, int expected_occupied) {
  FloquetGroundState out;
  std::vector<Eigen::Index> picked;
  for (Eigen::Index i = 0; i < spectrum.quasi_energies.size(); ++i) {
    if (spectrum.quasi_energies(i) < 0.0) picked.push_back(i);
  }
  out.count = static_cast<int>(picked.size());
  out.regime_warning = out.count != expected_occupied;
  out.sector.k = spectrum.k;
  out.sector.orbitals.resize(spectrum.modes.rows(), out.count);
  for (std::size_t j = 0; j < picked.size(); ++j) {
    out.sector.orbitals.col(static_cast<Eigen::Index>(j)) = spectrum.modes.col(picked[j]);
  }
  return out;
}

RVector occupations(const SlaterSector& evolved, const FloquetSpectrum& spectrum) {
  if (evolved.orbitals.rows() != spectrum.modes.rows()) {
    throw std::invalid_argument("occupations: dimension mismatch");
  }
  const CMatrix overlap = spectrum.modes.adjoint() * evolved.orbitals;
  return overlap.cwiseAbs2().rowwise().sum();
}

std::vector<std::vector<int>> connect_bands(const std::vector<FloquetSpectrum>& spectra) {
  std::vector<std::vector<int>> bands;
  if (spectra.empty()) return bands;
  const auto n = static_cast<int>(spectra.front().modes.cols());
  std::vector<int> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  bands.push_back(identity);
  for (std::size_t s = 1; s < spectra.size(); ++s) {
    const RVector& prev_eps = spectra[s - 1].quasi_energies;
    const Eigen::MatrixXd overlap = (spectra[s - 1].modes.adjoint() * spectra[s].modes).cwiseAbs2();
    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (overlap(i, j) > 0.5) pairs.emplace_back(-overlap(i, j), i, j);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> prev_to_new(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (const auto& [neg, i, j] : pairs) {
      if (prev_to_new[static_cast<std::size_t>(i)] < 0 && !used[static_cast<std::size_t>(j)]) {
        prev_to_new[static_cast<std::size_t>(i)] = j;
        used[static_cast<std::size_t>(j)] = true;
      }
    }
    std::vector<int> free_prev;
    std::vector<int> free_new;
    for (int i = 0; i < n; ++i) {
      if (prev_to_new[static_cast<std::size_t>(i)] < 0) free_prev.push_back(i);
      if (!used[static_cast<std::size_t>(i)]) free_new.push_back(i);
    }
    std::sort(free_prev.begin(), free_prev.end(), [&](int x, int y) { return prev_eps(x) < prev_eps(y); });
    for (std::size_t f = 0; f < free_prev.size(); ++f) {
      prev_to_new[static_cast<std::size_t>(free_prev[f])] = free_new[f];
    }
    std::vector<int> row(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
      row[static_cast<std::size_t>(b)] = prev_to_new[static_cast<std::size_t>(bands.back()[static_cast<std::size_t>(b)])];
    }
    bands.push_back(row);
  }
  return bands;
}

}  // namespace flochern
