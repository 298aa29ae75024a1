#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rcgff/environment.hpp"
#include "rcgff/stats.hpp"

namespace rcgff {

using Vertex = std::int32_t;

/// The largest open component of a box, as an indexed weighted graph.
///
/// Vertices are numbered in lexicographic site order. Adjacency is stored
/// in CSR form; each entry carries the edge weight and a direction code
/// 2*axis + (step is +1), which lets walkers track unwrapped displacement
/// on a torus.
class ClusterGraph {
 public:
  static ClusterGraph largest_component(const ConductanceField& field);

  const Lattice& lattice() const { return lattice_; }
  int dim() const { return lattice_.dim(); }
  std::size_t size() const { return sites_.size(); }

  std::size_t site_of(Vertex v) const { return sites_[v]; }
  Site coord(Vertex v) const { return lattice_.site(sites_[v]); }
  /// -1 if the site is not in the cluster.
  Vertex vertex_of_site(std::size_t site) const { return site_vertex_[site]; }
  std::optional<Vertex> vertex_of(std::span<const std::int64_t> x) const;
  /// Like vertex_of, but throws a membership error.
  Vertex require_vertex(std::span<const std::int64_t> x) const;

  std::span<const Vertex> neighbors(Vertex v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  std::span<const double> neighbor_weights(Vertex v) const {
    return {adj_w_.data() + offsets_[v], adj_w_.data() + offsets_[v + 1]};
  }
  std::span<const std::uint8_t> neighbor_dirs(Vertex v) const {
    return {adj_dir_.data() + offsets_[v], adj_dir_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  /// mu(x) = sum of incident conductances.
  double mu(Vertex v) const { return mu_[v]; }
  /// nu(x) = sum of reciprocal incident conductances.
  double nu(Vertex v) const { return nu_[v]; }
  std::span<const double> mu() const { return mu_; }
  std::span<const double> nu() const { return nu_; }

  /// Fraction of box sites that lie in the cluster.
  double density() const {
    return static_cast<double>(size()) /
           static_cast<double>(lattice_.num_sites());
  }

  /// CSV: x1..xd,id,mu,nu
  void write_vertices_csv(std::ostream& out) const;
  /// CSV: id_a,id_b,weight (each edge once, id_a < id_b)
  void write_edges_csv(std::ostream& out) const;

 private:
  Lattice lattice_;
  std::vector<std::size_t> sites_;
  std::vector<Vertex> site_vertex_;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adj_;
  std::vector<double> adj_w_;
  std::vector<std::uint8_t> adj_dir_;
  std::vector<double> mu_;
  std::vector<double> nu_;
};

/// Hop distances from `source` along open edges; -1 where unreachable or
/// beyond `max_depth` (negative max_depth means unlimited).
std::vector<int> bfs_distances(const ClusterGraph& cg, Vertex source,
                               int max_depth = -1);

/// Graph distance along open edges.
int chemical_distance(const ClusterGraph& cg, std::span<const std::int64_t> x,
                      std::span<const std::int64_t> y);

/// Chemical ball of radius floor(r), sorted by vertex id.
std::vector<Vertex> ball(const ClusterGraph& cg,
                         std::span<const std::int64_t> x, double r);

/// Open edges {x,y} with x in A and y in B \ A, each listed once as (x, y).
/// A and B are vertex sets with A a subset of B.
std::vector<std::pair<Vertex, Vertex>> relative_boundary(
    const ClusterGraph& cg, std::span<const Vertex> a, std::span<const Vertex> b);

struct RegularityReport {
  Site center;
  int radius = 0;
  double c_v = 0, c_riso = 0, c_w = 0;
  std::size_t volume = 0;
  bool volume_ok = false;
  /// n * lambda_2 / 2 for the unit-weight graph on S = B(x, n): a lower
  /// bound on n * min |dA|/|A| over A in S with |A| <= |S|/2 (Cheeger).
  double cheeger_lower_estimate = 0;
  /// n * best sweep-cut ratio along the Fiedler vector: an upper bound.
  double cheeger_upper_estimate = 0;
  /// lower >= C_riso: the isoperimetric part holds for this S.
  bool riso_certified = false;
  /// upper < C_riso: the isoperimetric part fails for this S.
  bool riso_refuted = false;
  /// Every cluster site within l1 distance n of x lies in B(x, C_W n).
  bool distance_comparison_ok = false;
};

/// Diagnostics for a regular ball. Throws a geometry error unless the box
/// leaves a margin of C_W n around x, and a size error if |B(x, n)| exceeds
/// `dense_cap` (the spectral bound uses a dense eigensolver).
RegularityReport regularity_check(const ClusterGraph& cg,
                                  std::span<const std::int64_t> x, int n,
                                  double c_v, double c_riso, double c_w,
                                  std::size_t dense_cap = 4000);

struct DistanceCheck {
  bool ok = true;
  bool sampled = false;
  std::size_t pairs_checked = 0;
  Site worst_x, worst_y;
  int worst_distance = 0;
  /// d(x,y) / max(C_d |x-y|_inf, n^(1-delta)) for the worst pair.
  double worst_ratio = 0;
};

/// Checks d(x,y) <= max(C_d |x-y|_inf, n^(1-delta)) for cluster sites x, y
/// in center + [-n, n]^d. All pairs are checked when the window holds at
/// most `full_limit` sites; otherwise 10^4 uniformly drawn pairs.
DistanceCheck distance_comparison_check(const ClusterGraph& cg, int n,
                                        double c_d, double delta,
                                        std::span<const std::int64_t> center,
                                        std::uint64_t seed = 1,
                                        std::size_t full_limit = 150);

/// Mean fraction of box sites in the largest component across replicas,
/// each replica drawn with seed derive_seed(seed, r).
Estimate theta_estimate(const LawSpec& law, const std::vector<int>& extents,
                        int replicas, std::uint64_t seed,
                        Boundary boundary = Boundary::free, int workers = 1);

/// Closest cluster site to n*x in Euclidean distance; ties go to the
/// lexicographically smallest site.
Site project(const ClusterGraph& cg, std::span<const double> x, double n);

}  // namespace rcgff
