#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rcgff/cluster.hpp"
#include "rcgff/domain.hpp"
#include "rcgff/stats.hpp"

namespace rcgff {

// Variable-speed random walk: at x wait Exp(mu(x)), then step to y with
// probability omega(x,y)/mu(x). With unit conductances each coordinate
// jumps at rate 2, so the limiting covariance is 2I.

struct Trajectory {
  /// Jump times, starting with 0 for the initial site.
  std::vector<double> times;
  std::vector<Vertex> vertices;
  /// Horizon reached, or the exit time when stopped on exit.
  double total_time = 0.0;
  bool exited = false;
};

/// Run the walk from x0 up to time `horizon`. Replica r of a seed uses the
/// substream (seed, r).
Trajectory simulate(const ClusterGraph& cg, std::span<const std::int64_t> x0,
                    double horizon, std::uint64_t seed,
                    std::uint64_t replica = 0);

/// Run the walk from x0 until it first leaves the domain. `max_jumps` guards
/// against runaway runs (dynamics error).
Trajectory simulate_until_exit(const ClusterGraph& cg,
                               const LatticeDomain& domain,
                               std::span<const std::int64_t> x0,
                               std::uint64_t seed, std::uint64_t replica = 0,
                               std::uint64_t max_jumps = 100'000'000);

/// CSV: t,x1..xd
void write_trajectory_csv(const ClusterGraph& cg, const Trajectory& traj,
                          std::ostream& out);

/// Mean exit time from the domain over independent replicas.
Estimate exit_time_mc(const ClusterGraph& cg, const LatticeDomain& domain,
                      std::span<const std::int64_t> x0, std::size_t replicas,
                      std::uint64_t seed, int workers = 1);

/// Expected time spent at y before exiting the domain, started at x.
Estimate occupation_green_mc(const ClusterGraph& cg,
                             const LatticeDomain& domain,
                             std::span<const std::int64_t> x,
                             std::span<const std::int64_t> y,
                             std::size_t replicas, std::uint64_t seed,
                             int workers = 1);

/// Per-replica total occupation at every interior vertex: returns, for each
/// cluster vertex, the mean time spent there before exit, together with the
/// mean exit time. Used for the total-time decomposition check.
struct OccupationProfile {
  std::vector<double> mean_time;  // indexed by cluster vertex
  Estimate exit_time;
};
OccupationProfile occupation_profile_mc(const ClusterGraph& cg,
                                        const LatticeDomain& domain,
                                        std::span<const std::int64_t> x,
                                        std::size_t replicas,
                                        std::uint64_t seed, int workers = 1);

/// Fraction of replicas with X_t = y, started from x.
Estimate heat_kernel_mc(const ClusterGraph& cg, double t,
                        std::span<const std::int64_t> x,
                        std::span<const std::int64_t> y, std::size_t replicas,
                        std::uint64_t seed, int workers = 1);

struct DiffusivityEstimate {
  Eigen::MatrixXd sigma2;
  Eigen::MatrixXd se;
  int n = 0;
  double t = 0.0;
  std::size_t replicas = 0;
  /// Rescaled endpoint displacements X_{tn^2}/(n sqrt t), replica-major.
  std::vector<double> endpoints;
};

/// Smallest free-box side for which estimate_sigma accepts (n, t) at
/// mean conductance `mean_weight`.
int sigma_box_side(int n, double t, double mean_weight);

/// Empirical covariance of the rescaled endpoint X_{tn^2}/(n sqrt t).
/// Start sites are uniform over cluster sites in the central window of side
/// L/4; displacements are unwrapped on a torus. Standard errors come from
/// 50 batches. On a free box, throws a scale error unless the distance from
/// the window to the box faces is at least 5 n sqrt(2 t cbar), cbar being
/// the mean open conductance.
DiffusivityEstimate estimate_sigma(const ClusterGraph& cg, int n, double t,
                                   std::size_t replicas, std::uint64_t seed,
                                   int workers = 1);

}  // namespace rcgff
