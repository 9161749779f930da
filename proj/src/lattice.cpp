#include "flochern/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flochern {
namespace {

Vec2 line_position(int i, double a) {
  const double d = a / kSqrt3;
  const int pair = i / 2;
  const double x = 1.5 * d * pair + (i % 2 == 1 ? 0.5 * d : 0.0);
  const int phase = i % 4;
  const double y = (phase == 1 || phase == 2) ? 0.5 * a : 0.0;
  return {x, y};
}

DirectionClass classify(Vec2 disp, double d) {
  const auto deltas = delta_vectors(d);
  constexpr DirectionClass classes[] = {DirectionClass::Delta1, DirectionClass::Delta2,
                                        DirectionClass::Delta3};
  for (int c = 0; c < 3; ++c) {
    if ((disp - deltas[c]).norm() < 1e-9 * d) return classes[c];
  }
  throw std::logic_error("classify: displacement is not an A->B nearest-neighbour vector");
}

Bond make_nn(int from, int to, Vec2 disp, double d) {
  return Bond{from, to, disp, classify(disp, d), BondOrder::Nearest, 0};
}

struct Neighbour {
  int site;
  Vec2 displacement;
};

// Next-nearest bonds as two-hop paths i -> m -> j. Chirality is the sign of
// the turn: +1 counterclockwise. Each unordered pair is kept once.
std::vector<Bond> compose_nnn(int num_sites, const std::vector<Bond>& nn, double a) {
  std::vector<std::vector<Neighbour>> adj(static_cast<std::size_t>(num_sites));
  for (const Bond& b : nn) {
    adj[static_cast<std::size_t>(b.from)].push_back({b.to, b.displacement});
    adj[static_cast<std::size_t>(b.to)].push_back({b.from, -1.0 * b.displacement});
  }
  std::vector<Bond> out;
  for (int i = 0; i < num_sites; ++i) {
    for (const Neighbour& first : adj[static_cast<std::size_t>(i)]) {
      for (const Neighbour& second : adj[static_cast<std::size_t>(first.site)]) {
        const Vec2 disp = first.displacement + second.displacement;
        if (disp.norm() < 1e-9 * a) continue;
        const int j = second.site;
        if (j < i || (j == i && disp.y < 0.0)) continue;
        const int chirality = first.displacement.cross(second.displacement) > 0.0 ? 1 : -1;
        out.push_back(Bond{i, j, disp, DirectionClass::None, BondOrder::NextNearest, chirality});
      }
    }
  }
  return out;
}

void check_line(const LatticeParams& p) {
  if (p.nx % 2 != 0) throw std::invalid_argument("Nx must be even, got " + std::to_string(p.nx));
  if (p.nx < 4) throw std::invalid_argument("Nx must be >= 4, got " + std::to_string(p.nx));
  if (!(p.a > 0.0)) throw std::invalid_argument("lattice constant must be positive");
}

}  // namespace

std::array<Vec2, 3> delta_vectors(double d) {
  return {Vec2{0.5 * d, 0.5 * kSqrt3 * d}, Vec2{0.5 * d, -0.5 * kSqrt3 * d}, Vec2{-d, 0.0}};
}

Vec2 Bond::midpoint(const std::vector<Site>& sites) const {
  return sites[static_cast<std::size_t>(from)].position + 0.5 * displacement;
}

std::pair<int, int> FlakeGeometry::cell_of(int site) const {
  return {(site % params.nx) / 2, site / params.nx};
}

RibbonGeometry build_ribbon(const LatticeParams& params) {
  check_line(params);
  if (params.ny < 1) throw std::invalid_argument("Ny must be >= 1");
  RibbonGeometry g;
  g.params = params;
  const double a = params.a;
  const double d = params.nn_distance();
  const auto deltas = delta_vectors(d);
  for (int i = 0; i < params.nx; ++i) {
    g.sites.push_back({i, line_position(i, a), i % 2 == 0 ? Sublattice::A : Sublattice::B});
  }
  for (int i = 0; i + 1 < params.nx; i += 2) {
    g.nn_bonds.push_back(make_nn(i, i + 1, deltas[0], d));
    g.nn_bonds.push_back(make_nn(i, i + 1, deltas[1], d));
    if (i + 2 < params.nx) g.nn_bonds.push_back(make_nn(i + 2, i + 1, deltas[2], d));
  }
  g.nnn_bonds = compose_nnn(params.nx, g.nn_bonds, a);
  for (int n = 0; n < params.ny; ++n) g.momenta.push_back(kTwoPi * n / (params.ny * a));
  return g;
}

FlakeGeometry build_flake(const LatticeParams& params) {
  check_line(params);
  if (params.ny < 4) throw std::invalid_argument("Ny must be >= 4 for a flake");
  FlakeGeometry g;
  g.params = params;
  const double a = params.a;
  const double d = params.nn_distance();
  const auto deltas = delta_vectors(d);
  const int nx = params.nx;
  for (int row = 0; row < params.ny; ++row) {
    for (int i = 0; i < nx; ++i) {
      Vec2 p = line_position(i, a);
      p.y += row * a;
      g.sites.push_back({row * nx + i, p, i % 2 == 0 ? Sublattice::A : Sublattice::B});
    }
  }
  for (int row = 0; row < params.ny; ++row) {
    const int base = row * nx;
    for (int i = 0; i + 1 < nx; i += 2) {
      const bool even_pair = (i / 2) % 2 == 0;
      // In-line chain bond, then its image in the neighbouring row.
      if (even_pair) {
        g.nn_bonds.push_back(make_nn(base + i, base + i + 1, deltas[0], d));
        if (row > 0) g.nn_bonds.push_back(make_nn(base + i, base - nx + i + 1, deltas[1], d));
      } else {
        g.nn_bonds.push_back(make_nn(base + i, base + i + 1, deltas[1], d));
        if (row + 1 < params.ny) g.nn_bonds.push_back(make_nn(base + i, base + nx + i + 1, deltas[0], d));
      }
      if (i + 2 < nx) g.nn_bonds.push_back(make_nn(base + i + 2, base + i + 1, deltas[2], d));
    }
  }
  g.nnn_bonds = compose_nnn(g.num_sites(), g.nn_bonds, a);
  return g;
}

std::vector<int> coordination(int num_sites, const std::vector<Bond>& bonds) {
  std::vector<int> count(static_cast<std::size_t>(num_sites), 0);
  for (const Bond& b : bonds) {
    ++count[static_cast<std::size_t>(b.from)];
    ++count[static_cast<std::size_t>(b.to)];
  }
  return count;
}

}  // namespace flochern
