#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rcgff/cluster.hpp"

namespace rcgff {

/// Open axis-parallel box (lo, hi) in R^d.
struct Rectangle {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Open Euclidean ball.
struct Ball {
  std::vector<double> center;
  double radius = 1.0;
};

/// Bounded continuum domains with the cone property. Both shapes are
/// immediately exited from every boundary point by a non-degenerate
/// Brownian motion.
using ContinuumDomain = std::variant<Rectangle, Ball>;

Rectangle unit_cube(int d);
Ball unit_ball(int d);

int dim(const ContinuumDomain& domain);
/// Open-set membership.
bool contains(const ContinuumDomain& domain, std::span<const double> x);
/// Euclidean distance from an interior point to the boundary.
double boundary_distance(const ContinuumDomain& domain,
                         std::span<const double> x);
/// Bounding box as (lo, hi).
std::pair<std::vector<double>, std::vector<double>> bounding_box(
    const ContinuumDomain& domain);
std::string describe(const ContinuumDomain& domain);

/// Lambda = nD: a site z is interior iff z/n lies in D.
struct ScaledDomain {
  ContinuumDomain shape;
  double n = 1.0;
};

/// Chemical ball {z : d(center, z) <= radius}.
struct ChemicalBall {
  Site center;
  int radius = 0;
};

/// Inclusive lattice box lo <= z <= hi.
struct LatticeBox {
  Site lo;
  Site hi;
};

using LatticeDomain = std::variant<ScaledDomain, ChemicalBall, LatticeBox>;

std::string describe(const LatticeDomain& domain);

/// Cluster vertices of Lambda, in increasing vertex order. This is the one
/// membership test shared by the Dirichlet solver and the walk simulators.
std::vector<Vertex> interior_vertices(const ClusterGraph& cg,
                                      const LatticeDomain& domain);

/// 1 for vertices in Lambda, 0 otherwise (indexed by cluster vertex).
std::vector<std::uint8_t> interior_mask(const ClusterGraph& cg,
                                        const LatticeDomain& domain);

/// Smallest free box (extents, origin) holding nD plus one layer of
/// exterior sites on every side.
std::pair<std::vector<int>, Site> box_for(const ContinuumDomain& shape,
                                          double n);

}  // namespace rcgff
