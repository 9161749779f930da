#pragma once

// Honeycomb geometries with zig-zag edges running along y.
//
// Nearest-neighbour vectors from an A site to its three B neighbours:
//   delta1 = d (1/2,  sqrt3/2),  delta2 = d (1/2, -sqrt3/2),  delta3 = d (-1, 0)
// with d = a / sqrt3. Bravais vectors are (sqrt3/2, 1/2) a and (0, 1) a, so
// the Dirac points sit at (2 pi / (sqrt3 a), +-2 pi / (3 a)).
//
// One transverse zig-zag line holds Nx sites ordered by increasing x:
// even index = A, odd index = B. Pairs (2p, 2p+1) are joined by a delta1 and
// a delta2 bond (dy = +-a/2); pairs (2p+1, 2p+2) by a horizontal delta3 bond.

#include <array>
#include <cstddef>
#include <vector>

#include "flochern/types.hpp"

namespace flochern {

struct LatticeParams {
  double a = 1.0;
  int nx = 4;  ///< sites across one zig-zag line (transverse)
  int ny = 1;  ///< unit cells along y (number of momenta for ribbons)

  double nn_distance() const { return a / kSqrt3; }
};

enum class Sublattice { A, B };

/// +1 on A, -1 on B.
inline int sublattice_sign(Sublattice s) { return s == Sublattice::A ? 1 : -1; }

struct Site {
  int index = 0;
  Vec2 position;
  Sublattice sublattice = Sublattice::A;
};

enum class BondOrder { Nearest, NextNearest };
enum class DirectionClass { None, Delta1, Delta2, Delta3 };

/// A directed bond. Nearest-neighbour bonds always run A -> B.
struct Bond {
  int from = 0;
  int to = 0;
  Vec2 displacement;  ///< r_to - r_from, including any periodic image shift
  DirectionClass direction = DirectionClass::None;
  BondOrder order = BondOrder::Nearest;
  int chirality = 0;  ///< +-1 for next-nearest bonds, 0 otherwise

  Vec2 midpoint(const std::vector<Site>& sites) const;
};

/// Vectors delta1..delta3 for nearest-neighbour distance d.
std::array<Vec2, 3> delta_vectors(double d);

struct RibbonGeometry {
  LatticeParams params;
  std::vector<Site> sites;  ///< one zig-zag line, Nx sites
  std::vector<Bond> nn_bonds;
  std::vector<Bond> nnn_bonds;
  std::vector<double> momenta;  ///< k_n = 2 pi n / (Ny a)

  int nx() const { return params.nx; }
  double k_dirac() const { return kTwoPi / (3.0 * params.a); }
  double k_zone_edge() const { return kPi / params.a; }
};

struct FlakeGeometry {
  LatticeParams params;
  std::vector<Site> sites;  ///< index = row * Nx + i
  std::vector<Bond> nn_bonds;
  std::vector<Bond> nnn_bonds;

  int num_sites() const { return params.nx * params.ny; }
  double unit_cell_area() const { return 0.5 * kSqrt3 * params.a * params.a; }
  int cells_x() const { return params.nx / 2; }
  int cells_y() const { return params.ny; }
  /// Unit cell (pair index, row) containing a site.
  std::pair<int, int> cell_of(int site) const;
};

/// Throws std::invalid_argument on odd Nx, Nx < 4 or Ny < 1.
RibbonGeometry build_ribbon(const LatticeParams& params);

/// Throws std::invalid_argument on odd Nx or Nx, Ny < 4.
FlakeGeometry build_flake(const LatticeParams& params);

/// Number of nearest-neighbour bonds incident to each site.
std::vector<int> coordination(int num_sites, const std::vector<Bond>& bonds);

}  // namespace flochern
