#include "flochern/chern_marker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flochern {

namespace {

void check_dims(const CMatrix& occupied, const FlakeGeometry& g) {
  if (occupied.rows() != g.num_sites()) throw std::invalid_argument("chern_marker: state does not match the flake");
}

void check_imag(double max_imag) {
  if (max_imag > kMarkerImagTolerance) {
    throw NumericalError("chern_marker: imaginary residue " + std::to_string(max_imag));
  }
}

}  // namespace

CellRegion central_region(const FlakeGeometry& g, int side) {
  if (side <= 0) side = std::max(1, std::min(g.params.nx, g.params.ny) / 4);
  const int sx = std::min(side, g.cells_x());
  const int sy = std::min(side, g.cells_y());
  return {(g.cells_x() - sx) / 2, (g.cells_y() - sy) / 2, sx, sy};
}

double ChernMarkerField::average(const CellRegion& region) const {
  return values.block(region.x0, region.y0, region.nx, region.ny).mean();
}

ChernMarkerField chern_marker(const CMatrix& occupied, const FlakeGeometry& g) {
  check_dims(occupied, g);
  const Eigen::Index n = occupied.rows();
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    x(s) = g.sites[static_cast<std::size_t>(s)].position.x;
    y(s) = g.sites[static_cast<std::size_t>(s)].position.y;
  }
  // <s|P x P y P|s> = Psi_s (X Y) Psi_s^dag with X = Psi^dag x Psi.
  const CMatrix xm = occupied.adjoint() * (x.asDiagonal() * occupied);
  const CMatrix ym = occupied.adjoint() * (y.asDiagonal() * occupied);
  const CMatrix pxy = occupied * (xm * ym);
  const CMatrix pyx = occupied * (ym * xm);
  const CVector a = (pxy.array() * occupied.array().conjugate()).rowwise().sum();
  const CVector b = (pyx.array() * occupied.array().conjugate()).rowwise().sum();

  ChernMarkerField f;
  f.values = Eigen::MatrixXd::Zero(g.cells_x(), g.cells_y());
  Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(g.cells_x(), g.cells_y());
  const double scale = kTwoPi / g.unit_cell_area();
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [cx, cy] = g.cell_of(static_cast<int>(s));
    raw(cx, cy) += -kI * scale * (a(s) - b(s));
  }
  f.values = raw.real();
  f.max_imag = raw.imag().cwiseAbs().maxCoeff();
  f.total = f.values.sum();
  check_imag(f.max_imag);
  return f;
}

RegionMarker chern_marker_region(const CMatrix& occupied, const FlakeGeometry& g, const CellRegion& region) {
  check_dims(occupied, g);
  const Eigen::Index n = occupied.rows();
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    x(s) = g.sites[static_cast<std::size_t>(s)].position.x;
    y(s) = g.sites[static_cast<std::size_t>(s)].position.y;
  }
  std::vector<Eigen::Index> sites;
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [cx, cy] = g.cell_of(static_cast<int>(s));
    if (region.contains(cx, cy)) sites.push_back(s);
  }
  const auto m = static_cast<Eigen::Index>(sites.size());
  // Columns p_r = P e_r for every region site. With u = Psi^dag (x o p_r)
  // and v = Psi^dag (y o p_r), <r|P x P y P|r> = u^dag v and the reversed
  // product is its conjugate, so no further projection is needed.
  CMatrix rows(occupied.cols(), m);
  for (Eigen::Index j = 0; j < m; ++j) rows.col(j) = occupied.row(sites[static_cast<std::size_t>(j)]).adjoint();
  const CMatrix p = occupied * rows;
  const CMatrix u = occupied.adjoint() * (x.asDiagonal() * p);
  const CMatrix v = occupied.adjoint() * (y.asDiagonal() * p);

  Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(region.nx, region.ny);
  const double scale = kTwoPi / g.unit_cell_area();
  for (Eigen::Index j = 0; j < m; ++j) {
    const cplx a = u.col(j).dot(v.col(j));
    const cplx b = v.col(j).dot(u.col(j));
    const auto [cx, cy] = g.cell_of(static_cast<int>(sites[static_cast<std::size_t>(j)]));
    raw(cx - region.x0, cy - region.y0) += -kI * scale * (a - b);
  }
  RegionMarker out;
  out.average = raw.real().mean();
  out.max_imag = raw.imag().cwiseAbs().maxCoeff();
  check_imag(out.max_imag);
  return out;
}

}  // namespace flochern
