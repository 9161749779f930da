#pragma once

// Local Chern marker C(r) = -2 pi i <r|[x_P, y_P]|r> / A_c on open flakes,
// summed over the two sites of each unit cell, with P the projector on the
// occupied orbitals.

#include "flochern/lattice.hpp"
#include "flochern/types.hpp"

namespace flochern {

struct CellRegion {
  int x0 = 0;  ///< first pair index
  int y0 = 0;  ///< first row
  int nx = 0;
  int ny = 0;

  bool contains(int cx, int cy) const { return cx >= x0 && cx < x0 + nx && cy >= y0 && cy < y0 + ny; }
};

/// Centered square of `side` cells; side <= 0 picks max(1, L/4) with
/// L = min(Nx, Ny).
CellRegion central_region(const FlakeGeometry& g, int side = 0);

struct ChernMarkerField {
  Eigen::MatrixXd values;  ///< (pair index, row)
  double max_imag = 0.0;   ///< largest discarded imaginary part
  double total = 0.0;      ///< sum over all cells

  double average(const CellRegion& region) const;
};

inline constexpr double kMarkerImagTolerance = 1e-10;

/// Full marker field. `occupied` holds orthonormal orbitals as columns.
/// Throws NumericalError if the imaginary residue exceeds
/// kMarkerImagTolerance and std::invalid_argument on a dimension mismatch.
ChernMarkerField chern_marker(const CMatrix& occupied, const FlakeGeometry& g);

struct RegionMarker {
  double average = 0.0;
  double max_imag = 0.0;
};

/// Marker averaged over `region` only, touching just the region's sites.
/// Much cheaper than the full field when the region is small.
RegionMarker chern_marker_region(const CMatrix& occupied, const FlakeGeometry& g, const CellRegion& region);

}  // namespace flochern
