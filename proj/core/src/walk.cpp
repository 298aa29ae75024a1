#include "rcgff/walk.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "rcgff/errors.hpp"
#include "rcgff/parallel.hpp"
#include "rcgff/rng.hpp"

namespace rcgff {
namespace {

// One jump: holding time and the next vertex. Both draws come from the
// same Philox block.
struct Step {
  double hold;
  std::size_t slot;
};

inline Step draw_step(const ClusterGraph& cg, Vertex v, RandomStream& rng) {
  const double mu = cg.mu(v);
  if (!(mu > 0)) fail(ErrorKind::dynamics, "walk reached an isolated vertex");
  const double hold = rng.exponential(mu);
  const auto w = cg.neighbor_weights(v);
  double target = rng.uniform() * mu;
  std::size_t k = 0;
  for (; k + 1 < w.size(); ++k) {
    target -= w[k];
    if (target < 0) break;
  }
  return {hold, k};
}

Estimate reduce(std::span<const double> values) { return estimate_of(values); }

}  // namespace

Trajectory simulate(const ClusterGraph& cg, std::span<const std::int64_t> x0,
                    double horizon, std::uint64_t seed, std::uint64_t replica) {
  require(horizon >= 0, ErrorKind::parameter, "horizon must be >= 0");
  Vertex v = cg.require_vertex(x0);
  RandomStream rng(seed, replica, stream_tag::walk);
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.vertices.push_back(v);
  tr.total_time = horizon;
  double t = 0.0;
  while (true) {
    const Step s = draw_step(cg, v, rng);
    t += s.hold;
    if (t > horizon) break;
    v = cg.neighbors(v)[s.slot];
    tr.times.push_back(t);
    tr.vertices.push_back(v);
  }
  return tr;
}

Trajectory simulate_until_exit(const ClusterGraph& cg,
                               const LatticeDomain& domain,
                               std::span<const std::int64_t> x0,
                               std::uint64_t seed, std::uint64_t replica,
                               std::uint64_t max_jumps) {
  const auto mask = interior_mask(cg, domain);
  Vertex v = cg.require_vertex(x0);
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.vertices.push_back(v);
  if (!mask[v]) {
    tr.exited = true;
    return tr;
  }
  RandomStream rng(seed, replica, stream_tag::walk);
  double t = 0.0;
  for (std::uint64_t j = 0; j < max_jumps; ++j) {
    const Step s = draw_step(cg, v, rng);
    t += s.hold;
    v = cg.neighbors(v)[s.slot];
    tr.times.push_back(t);
    tr.vertices.push_back(v);
    if (!mask[v]) {
      tr.exited = true;
      tr.total_time = t;
      return tr;
    }
  }
  fail(ErrorKind::dynamics, "walk did not exit within the jump cap");
}

void write_trajectory_csv(const ClusterGraph& cg, const Trajectory& traj,
                          std::ostream& out) {
  const int d = cg.dim();
  std::ostringstream os;
  os.precision(17);
  os << 't';
  for (int a = 0; a < d; ++a) os << ",x" << (a + 1);
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i];
    for (std::int64_t c : cg.coord(traj.vertices[i])) os << ',' << c;
    os << '\n';
  }
  out << os.str();
}

namespace {

// Runs one killed walk and calls visit(vertex, holding time) for every
// holding interval spent inside the domain. Returns the exit time.
template <class Visit>
double killed_walk(const ClusterGraph& cg, const std::vector<std::uint8_t>& mask,
                   Vertex v, RandomStream& rng, Visit&& visit) {
  double t = 0.0;
  while (mask[v]) {
    const Step s = draw_step(cg, v, rng);
    visit(v, s.hold);
    t += s.hold;
    v = cg.neighbors(v)[s.slot];
  }
  return t;
}

}  // namespace

Estimate exit_time_mc(const ClusterGraph& cg, const LatticeDomain& domain,
                      std::span<const std::int64_t> x0, std::size_t replicas,
                      std::uint64_t seed, int workers) {
  require(replicas >= 1, ErrorKind::parameter, "replicas must be >= 1");
  const auto mask = interior_mask(cg, domain);
  const Vertex start = cg.require_vertex(x0);
  std::vector<double> tau(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, stream_tag::walk);
    tau[r] = killed_walk(cg, mask, start, rng, [](Vertex, double) {});
  });
  return reduce(tau);
}

Estimate occupation_green_mc(const ClusterGraph& cg,
                             const LatticeDomain& domain,
                             std::span<const std::int64_t> x,
                             std::span<const std::int64_t> y,
                             std::size_t replicas, std::uint64_t seed,
                             int workers) {
  require(replicas >= 1, ErrorKind::parameter, "replicas must be >= 1");
  const auto mask = interior_mask(cg, domain);
  const Vertex start = cg.require_vertex(x);
  const auto target = cg.vertex_of(y);
  if (!target || !mask[*target] || !mask[start])
    return {0.0, 0.0, replicas};
  const Vertex tv = *target;
  std::vector<double> occ(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, stream_tag::walk);
    double acc = 0.0;
    killed_walk(cg, mask, start, rng, [&](Vertex v, double h) {
      if (v == tv) acc += h;
    });
    occ[r] = acc;
  });
  return reduce(occ);
}

OccupationProfile occupation_profile_mc(const ClusterGraph& cg,
                                        const LatticeDomain& domain,
                                        std::span<const std::int64_t> x,
                                        std::size_t replicas,
                                        std::uint64_t seed, int workers) {
  require(replicas >= 1, ErrorKind::parameter, "replicas must be >= 1");
  const auto mask = interior_mask(cg, domain);
  const Vertex start = cg.require_vertex(x);
  if (workers <= 0) workers = default_workers();
  const std::size_t chunks = std::min<std::size_t>(64, replicas);
  std::vector<std::vector<double>> partial(chunks,
                                           std::vector<double>(cg.size(), 0.0));
  std::vector<double> tau(replicas, 0.0);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t begin = replicas * c / chunks;
    const std::size_t end = replicas * (c + 1) / chunks;
    auto& acc = partial[c];
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(seed, r, stream_tag::walk);
      tau[r] = killed_walk(cg, mask, start, rng,
                           [&](Vertex v, double h) { acc[v] += h; });
    }
  });
  OccupationProfile prof;
  prof.mean_time.assign(cg.size(), 0.0);
  for (const auto& p : partial)
    for (std::size_t v = 0; v < p.size(); ++v) prof.mean_time[v] += p[v];
  for (double& m : prof.mean_time) m /= static_cast<double>(replicas);
  prof.exit_time = reduce(tau);
  return prof;
}

Estimate heat_kernel_mc(const ClusterGraph& cg, double t,
                        std::span<const std::int64_t> x,
                        std::span<const std::int64_t> y, std::size_t replicas,
                        std::uint64_t seed, int workers) {
  require(t >= 0, ErrorKind::parameter, "time must be >= 0");
  require(replicas >= 1, ErrorKind::parameter, "replicas must be >= 1");
  const Vertex start = cg.require_vertex(x);
  const auto target = cg.vertex_of(y);
  if (!target) return {0.0, 0.0, replicas};
  std::vector<double> hit(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, stream_tag::walk);
    Vertex v = start;
    double s = 0.0;
    while (true) {
      const Step st = draw_step(cg, v, rng);
      s += st.hold;
      if (s > t) break;
      v = cg.neighbors(v)[st.slot];
    }
    hit[r] = v == *target ? 1.0 : 0.0;
  });
  return reduce(hit);
}

int sigma_box_side(int n, double t, double mean_weight) {
  const double spread = 5.0 * n * std::sqrt(2.0 * t * mean_weight);
  return static_cast<int>(std::ceil(spread * 8.0 / 3.0));
}

DiffusivityEstimate estimate_sigma(const ClusterGraph& cg, int n, double t,
                                   std::size_t replicas, std::uint64_t seed,
                                   int workers) {
  require(n >= 1, ErrorKind::parameter, "n must be >= 1");
  require(t > 0, ErrorKind::parameter, "t must be > 0");
  require(replicas >= 100, ErrorKind::parameter,
          "estimate_sigma needs at least 100 replicas");
  const int d = cg.dim();
  const Lattice& lat = cg.lattice();

  // Mean conductance over open edges, used by the scale rule.
  double wsum = 0.0, wcount = 0.0;
  for (std::size_t v = 0; v < cg.size(); ++v) {
    for (double w : cg.neighbor_weights(static_cast<Vertex>(v))) {
      wsum += w;
      wcount += 1.0;
    }
  }
  const double cbar = wsum / wcount;

  // Central window of side L/4 in every direction.
  std::vector<std::int64_t> wlo(d), whi(d);
  for (int a = 0; a < d; ++a) {
    const std::int64_t L = lat.extents()[a];
    const std::int64_t mid = lat.origin()[a] + L / 2;
    const std::int64_t half = std::max<std::int64_t>(L / 8, 0);
    wlo[a] = mid - half;
    whi[a] = mid + half;
    if (lat.boundary() == Boundary::free) {
      const double margin = 3.0 * static_cast<double>(L) / 8.0;
      const double need = 5.0 * n * std::sqrt(2.0 * t * cbar);
      if (margin < need) {
        std::ostringstream os;
        os << "box side " << L << " too small for n=" << n << ", t=" << t
           << " (need side >= " << sigma_box_side(n, t, cbar) << ")";
        fail(ErrorKind::scale, os.str());
      }
    }
  }
  std::vector<Vertex> window;
  for (std::size_t v = 0; v < cg.size(); ++v) {
    const std::size_t s = cg.site_of(static_cast<Vertex>(v));
    bool in = true;
    for (int a = 0; a < d && in; ++a) {
      const auto c = lat.coord(s, a);
      in = c >= wlo[a] && c <= whi[a];
    }
    if (in) window.push_back(static_cast<Vertex>(v));
  }
  require(!window.empty(), ErrorKind::scale,
          "no cluster sites in the central window");

  const double horizon = t * static_cast<double>(n) * n;
  const double scale = 1.0 / (n * std::sqrt(t));
  DiffusivityEstimate est;
  est.n = n;
  est.t = t;
  est.replicas = replicas;
  est.endpoints.assign(replicas * d, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    RandomStream pick(seed, r, stream_tag::start_site);
    Vertex v = window[pick.below(window.size())];
    RandomStream rng(seed, r, stream_tag::walk);
    std::vector<std::int64_t> disp(d, 0);
    double s = 0.0;
    while (true) {
      const Step st = draw_step(cg, v, rng);
      s += st.hold;
      if (s > horizon) break;
      const std::uint8_t dir = cg.neighbor_dirs(v)[st.slot];
      disp[dir >> 1] += (dir & 1) ? 1 : -1;
      v = cg.neighbors(v)[st.slot];
    }
    for (int a = 0; a < d; ++a)
      est.endpoints[r * d + a] = static_cast<double>(disp[a]) * scale;
  });

  auto covariance = [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t r = begin; r < end; ++r) {
      Eigen::Map<const Eigen::VectorXd> x(&est.endpoints[r * d], d);
      mean += x;
      m2 += x * x.transpose();
    }
    const double k = static_cast<double>(end - begin);
    mean /= k;
    return Eigen::MatrixXd((m2 - k * mean * mean.transpose()) / (k - 1.0));
  };
  est.sigma2 = covariance(0, replicas);
  constexpr std::size_t kBatches = 50;
  Eigen::MatrixXd bmean = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd bsq = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t b = 0; b < kBatches; ++b) {
    const Eigen::MatrixXd c =
        covariance(replicas * b / kBatches, replicas * (b + 1) / kBatches);
    bmean += c;
    bsq += c.cwiseProduct(c);
  }
  bmean /= kBatches;
  const Eigen::MatrixXd var =
      (bsq / kBatches - bmean.cwiseProduct(bmean)) * (kBatches / (kBatches - 1.0));
  est.se = (var / static_cast<double>(kBatches)).cwiseMax(0.0).cwiseSqrt();
  return est;
}

}  // namespace rcgff
