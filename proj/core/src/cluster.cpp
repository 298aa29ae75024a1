#include "rcgff/cluster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "rcgff/errors.hpp"
#include "rcgff/parallel.hpp"
#include "rcgff/rng.hpp"

namespace rcgff {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

std::int64_t linf(std::span<const std::int64_t> a,
                  std::span<const std::int64_t> b) {
  std::int64_t m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::int64_t l1(std::span<const std::int64_t> a,
                std::span<const std::int64_t> b) {
  std::int64_t m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m += std::abs(a[i] - b[i]);
  return m;
}

/// Size of the largest open component of a field (no graph assembly).
std::size_t largest_component_size(const ConductanceField& field) {
  const Lattice& lat = field.lattice();
  DisjointSets sets(lat.num_sites());
  for (std::size_t s = 0; s < lat.num_sites(); ++s)
    for (int i = 0; i < lat.dim(); ++i)
      if (lat.has_edge(s, i) && field.weight(s, i) > 0)
        sets.unite(s, *lat.neighbor(s, i, +1));
  std::size_t best = 0;
  for (std::size_t s = 0; s < lat.num_sites(); ++s)
    if (sets.find(s) == s) best = std::max(best, sets.size_of(s));
  return best;
}

}  // namespace

ClusterGraph ClusterGraph::largest_component(const ConductanceField& field) {
  const Lattice& lat = field.lattice();
  const int d = lat.dim();
  DisjointSets sets(lat.num_sites());
  bool any_open = false;
  for (std::size_t s = 0; s < lat.num_sites(); ++s) {
    for (int i = 0; i < d; ++i) {
      if (lat.has_edge(s, i) && field.weight(s, i) > 0) {
        sets.unite(s, *lat.neighbor(s, i, +1));
        any_open = true;
      }
    }
  }
  require(any_open, ErrorKind::degenerate_environment,
          "all edges are closed");

  // Scanning sites in lexicographic order, the first root reaching the
  // maximal size is the component with the smallest minimal site.
  std::size_t best_root = 0, best_size = 0;
  for (std::size_t s = 0; s < lat.num_sites(); ++s) {
    const std::size_t r = sets.find(s);
    const std::size_t sz = sets.size_of(r);
    if (sz > best_size) {
      best_size = sz;
      best_root = r;
    }
  }

  ClusterGraph cg;
  cg.lattice_ = lat;
  cg.site_vertex_.assign(lat.num_sites(), -1);
  cg.sites_.reserve(best_size);
  for (std::size_t s = 0; s < lat.num_sites(); ++s) {
    if (sets.find(s) == best_root) {
      cg.site_vertex_[s] = static_cast<Vertex>(cg.sites_.size());
      cg.sites_.push_back(s);
    }
  }

  const std::size_t nv = cg.sites_.size();
  cg.offsets_.assign(nv + 1, 0);
  cg.mu_.assign(nv, 0.0);
  cg.nu_.assign(nv, 0.0);
  cg.adj_.reserve(nv * 2 * d);
  cg.adj_w_.reserve(nv * 2 * d);
  cg.adj_dir_.reserve(nv * 2 * d);
  for (std::size_t v = 0; v < nv; ++v) {
    const std::size_t s = cg.sites_[v];
    for (int i = 0; i < d; ++i) {
      for (int sign : {-1, +1}) {
        const auto nb = lat.neighbor(s, i, sign);
        if (!nb) continue;
        const double w = sign > 0 ? field.weight(s, i) : field.weight(*nb, i);
        if (w <= 0) continue;
        cg.adj_.push_back(cg.site_vertex_[*nb]);
        cg.adj_w_.push_back(w);
        cg.adj_dir_.push_back(static_cast<std::uint8_t>(2 * i + (sign > 0)));
        cg.mu_[v] += w;
        cg.nu_[v] += 1.0 / w;
      }
    }
    cg.offsets_[v + 1] = cg.adj_.size();
  }

  // Assembly check: mu equals the sum of the listed incident weights and
  // every neighbor belongs to the component.
  for (std::size_t v = 0; v < nv; ++v) {
    double sum = 0;
    for (std::size_t k = cg.offsets_[v]; k < cg.offsets_[v + 1]; ++k) {
      require(cg.adj_[k] >= 0, ErrorKind::numerical,
              "open edge leaves the component");
      sum += cg.adj_w_[k];
    }
    require(std::abs(sum - cg.mu_[v]) <= 1e-12 * std::max(1.0, sum),
            ErrorKind::numerical, "mu does not match incident weights");
  }
  return cg;
}

std::optional<Vertex> ClusterGraph::vertex_of(
    std::span<const std::int64_t> x) const {
  const auto s = lattice_.index_of(x);
  if (!s) return std::nullopt;
  const Vertex v = site_vertex_[*s];
  if (v < 0) return std::nullopt;
  return v;
}

Vertex ClusterGraph::require_vertex(std::span<const std::int64_t> x) const {
  const auto v = vertex_of(x);
  require(v.has_value(), ErrorKind::membership, "site is not in the cluster");
  return *v;
}

void ClusterGraph::write_vertices_csv(std::ostream& out) const {
  for (int i = 0; i < dim(); ++i) out << 'x' << (i + 1) << ',';
  out << "id,mu,nu\n" << std::setprecision(17);
  for (std::size_t v = 0; v < size(); ++v) {
    for (auto c : coord(static_cast<Vertex>(v))) out << c << ',';
    out << v << ',' << mu_[v] << ',' << nu_[v] << '\n';
  }
}

void ClusterGraph::write_edges_csv(std::ostream& out) const {
  out << "id_a,id_b,weight\n" << std::setprecision(17);
  for (std::size_t v = 0; v < size(); ++v) {
    for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
      if (adj_[k] > static_cast<Vertex>(v))
        out << v << ',' << adj_[k] << ',' << adj_w_[k] << '\n';
    }
  }
}

// ------------------------------------------------------------- distances

std::vector<int> bfs_distances(const ClusterGraph& cg, Vertex source,
                               int max_depth) {
  std::vector<int> dist(cg.size(), -1);
  std::vector<Vertex> frontier{source}, next;
  dist[source] = 0;
  int depth = 0;
  while (!frontier.empty() && (max_depth < 0 || depth < max_depth)) {
    next.clear();
    for (Vertex v : frontier) {
      for (Vertex w : cg.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = depth + 1;
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
    ++depth;
  }
  return dist;
}

namespace {

int targeted_distance(const ClusterGraph& cg, Vertex a, Vertex b,
                      std::vector<int>& mark, std::vector<Vertex>& queue,
                      int stamp) {
  if (a == b) return 0;
  queue.clear();
  queue.push_back(a);
  mark[a] = stamp;
  std::size_t head = 0;
  std::size_t level_end = 1;
  int depth = 0;
  while (head < queue.size()) {
    if (head == level_end) {
      ++depth;
      level_end = queue.size();
    }
    const Vertex v = queue[head++];
    for (Vertex w : cg.neighbors(v)) {
      if (mark[w] == stamp) continue;
      if (w == b) return depth + 1;
      mark[w] = stamp;
      queue.push_back(w);
    }
  }
  return -1;
}

}  // namespace

int chemical_distance(const ClusterGraph& cg, std::span<const std::int64_t> x,
                      std::span<const std::int64_t> y) {
  const Vertex a = cg.require_vertex(x);
  const Vertex b = cg.require_vertex(y);
  std::vector<int> mark(cg.size(), -1);
  std::vector<Vertex> queue;
  return targeted_distance(cg, a, b, mark, queue, 0);
}

std::vector<Vertex> ball(const ClusterGraph& cg,
                         std::span<const std::int64_t> x, double r) {
  const Vertex c = cg.require_vertex(x);
  require(r >= 0, ErrorKind::parameter, "ball radius must be >= 0");
  const int radius = static_cast<int>(std::floor(r));
  const auto dist = bfs_distances(cg, c, radius);
  std::vector<Vertex> out;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] >= 0) out.push_back(static_cast<Vertex>(v));
  return out;
}

std::vector<std::pair<Vertex, Vertex>> relative_boundary(
    const ClusterGraph& cg, std::span<const Vertex> a,
    std::span<const Vertex> b) {
  std::vector<std::uint8_t> in_a(cg.size(), 0), in_b(cg.size(), 0);
  for (Vertex v : b) {
    require(v >= 0 && static_cast<std::size_t>(v) < cg.size(),
            ErrorKind::membership, "vertex not in cluster");
    in_b[v] = 1;
  }
  for (Vertex v : a) {
    require(v >= 0 && static_cast<std::size_t>(v) < cg.size(),
            ErrorKind::membership, "vertex not in cluster");
    require(in_b[v], ErrorKind::parameter, "A must be a subset of B");
    in_a[v] = 1;
  }
  std::vector<Vertex> sorted_a(a.begin(), a.end());
  std::sort(sorted_a.begin(), sorted_a.end());
  sorted_a.erase(std::unique(sorted_a.begin(), sorted_a.end()), sorted_a.end());
  std::vector<std::pair<Vertex, Vertex>> out;
  for (Vertex v : sorted_a)
    for (Vertex w : cg.neighbors(v))
      if (in_b[w] && !in_a[w]) out.emplace_back(v, w);
  return out;
}

// ------------------------------------------------------------ regularity

RegularityReport regularity_check(const ClusterGraph& cg,
                                  std::span<const std::int64_t> x, int n,
                                  double c_v, double c_riso, double c_w,
                                  std::size_t dense_cap) {
  require(n >= 0, ErrorKind::parameter, "radius must be >= 0");
  require(c_v > 0 && c_riso > 0 && c_w >= 1, ErrorKind::parameter,
          "need C_V > 0, C_riso > 0, C_W >= 1");
  const Lattice& lat = cg.lattice();
  const double margin = c_w * n;
  for (int i = 0; i < lat.dim(); ++i) {
    const double lo = static_cast<double>(x[i] - lat.origin()[i]);
    const double hi =
        static_cast<double>(lat.origin()[i] + lat.extents()[i] - 1 - x[i]);
    require(lo >= margin && hi >= margin, ErrorKind::geometry,
            "ball B(x, C_W n) is not inside the box");
  }
  const Vertex c = cg.require_vertex(x);

  RegularityReport rep;
  rep.center.assign(x.begin(), x.end());
  rep.radius = n;
  rep.c_v = c_v;
  rep.c_riso = c_riso;
  rep.c_w = c_w;

  const auto dist = bfs_distances(cg, c, static_cast<int>(std::floor(margin)));
  std::vector<Vertex> s_set;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] >= 0 && dist[v] <= n) s_set.push_back(static_cast<Vertex>(v));
  rep.volume = s_set.size();
  rep.volume_ok = c_v * std::pow(static_cast<double>(n), lat.dim()) <=
                  static_cast<double>(rep.volume);

  rep.distance_comparison_ok = true;
  for (std::size_t v = 0; v < cg.size(); ++v) {
    const Site y = cg.coord(static_cast<Vertex>(v));
    if (l1(x, y) <= n && dist[v] < 0) {
      rep.distance_comparison_ok = false;
      break;
    }
  }

  const std::size_t m = s_set.size();
  if (m < 2) {
    // No admissible non-empty A with |A| <= |S|/2.
    rep.cheeger_lower_estimate = std::numeric_limits<double>::infinity();
    rep.cheeger_upper_estimate = std::numeric_limits<double>::infinity();
    rep.riso_certified = true;
    return rep;
  }
  require(m <= dense_cap, ErrorKind::size,
          "ball too large for the dense spectral bound");

  std::vector<int> local(cg.size(), -1);
  for (std::size_t k = 0; k < m; ++k) local[s_set[k]] = static_cast<int>(k);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    for (Vertex w : cg.neighbors(s_set[k])) {
      const int j = local[w];
      if (j < 0) continue;
      lap(k, j) -= 1.0;
      lap(k, k) += 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  require(eig.info() == Eigen::Success, ErrorKind::numerical,
          "eigensolver failed");
  const double lambda2 = std::max(0.0, eig.eigenvalues()(1));
  const Eigen::VectorXd fiedler = eig.eigenvectors().col(1);

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fiedler(a) < fiedler(b); });
  double best = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::uint8_t> in(m, 0);
    long boundary = 0;
    for (std::size_t k = 0; k < m / 2; ++k) {
      const int v = pass == 0 ? order[k] : order[m - 1 - k];
      in[v] = 1;
      for (Vertex w : cg.neighbors(s_set[v])) {
        const int j = local[w];
        if (j < 0) continue;
        boundary += in[j] ? -1 : 1;
      }
      best = std::min(best, static_cast<double>(boundary) /
                                static_cast<double>(k + 1));
    }
  }
  rep.cheeger_lower_estimate = n * lambda2 / 2.0;
  rep.cheeger_upper_estimate = n * best;
  rep.riso_certified = rep.cheeger_lower_estimate >= c_riso;
  rep.riso_refuted = rep.cheeger_upper_estimate < c_riso;
  return rep;
}

DistanceCheck distance_comparison_check(const ClusterGraph& cg, int n,
                                        double c_d, double delta,
                                        std::span<const std::int64_t> center,
                                        std::uint64_t seed,
                                        std::size_t full_limit) {
  require(n >= 1 && c_d > 0 && delta > 0 && delta < 1, ErrorKind::parameter,
          "need n >= 1, C_d > 0, delta in (0,1)");
  std::vector<Vertex> window;
  for (std::size_t v = 0; v < cg.size(); ++v)
    if (linf(cg.coord(static_cast<Vertex>(v)), center) <= n)
      window.push_back(static_cast<Vertex>(v));
  require(!window.empty(), ErrorKind::geometry,
          "cluster does not meet the window");

  const double floor_term = std::pow(static_cast<double>(n), 1.0 - delta);
  DistanceCheck out;
  auto check = [&](Vertex a, int dist, Vertex b) {
    const Site xa = cg.coord(a), xb = cg.coord(b);
    const double bound =
        std::max(c_d * static_cast<double>(linf(xa, xb)), floor_term);
    const double ratio = dist / bound;
    ++out.pairs_checked;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_x = xa;
      out.worst_y = xb;
      out.worst_distance = dist;
    }
    if (dist > bound) out.ok = false;
  };

  if (window.size() <= full_limit) {
    for (std::size_t i = 0; i < window.size(); ++i) {
      const auto dist = bfs_distances(cg, window[i]);
      for (std::size_t j = i + 1; j < window.size(); ++j)
        check(window[i], dist[window[j]], window[j]);
    }
    return out;
  }

  out.sampled = true;
  RandomStream rng(seed, 0, stream_tag::misc);
  std::vector<int> mark(cg.size(), -1);
  std::vector<Vertex> queue;
  for (int k = 0; k < 10000; ++k) {
    const Vertex a = window[rng.below(window.size())];
    const Vertex b = window[rng.below(window.size())];
    check(a, targeted_distance(cg, a, b, mark, queue, k), b);
  }
  return out;
}

Estimate theta_estimate(const LawSpec& law, const std::vector<int>& extents,
                        int replicas, std::uint64_t seed, Boundary boundary,
                        int workers) {
  require(replicas >= 1, ErrorKind::parameter, "replicas must be >= 1");
  std::vector<double> fractions(static_cast<std::size_t>(replicas));
  parallel_for(fractions.size(), workers, [&](std::size_t r) {
    const auto field =
        ConductanceField::generate(law, extents, derive_seed(seed, r), boundary);
    std::size_t best = largest_component_size(field);
    fractions[r] = static_cast<double>(best) /
                   static_cast<double>(field.lattice().num_sites());
  });
  return estimate_of(fractions);
}

Site project(const ClusterGraph& cg, std::span<const double> x, double n) {
  require(cg.size() > 0, ErrorKind::degenerate_environment, "empty cluster");
  const Lattice& lat = cg.lattice();
  const int d = lat.dim();
  require(static_cast<int>(x.size()) == d, ErrorKind::parameter,
          "point dimension mismatch");
  std::vector<double> target(d);
  Site base(d);
  for (int i = 0; i < d; ++i) {
    target[i] = n * x[i];
    base[i] = static_cast<std::int64_t>(std::floor(target[i]));
  }
  std::int64_t max_extent = 0;
  for (int i = 0; i < d; ++i) max_extent = std::max<std::int64_t>(max_extent, lat.extents()[i]);

  // Scan the cube base + [-R, R]^d (clipped to the box). Any site outside
  // it is at distance >= R from the target, so a best distance <= R - 1 is
  // final. Ties are broken by comparing coordinate tuples.
  for (std::int64_t radius = 1;; radius *= 2) {
    std::vector<std::int64_t> lo(d), hi(d);
    bool empty = false;
    for (int i = 0; i < d; ++i) {
      lo[i] = std::max(base[i] - radius, lat.origin()[i]);
      hi[i] = std::min(base[i] + radius,
                       lat.origin()[i] + lat.extents()[i] - 1);
      if (lo[i] > hi[i]) empty = true;
    }
    double best = std::numeric_limits<double>::infinity();
    Site best_site;
    if (!empty) {
      Site y = lo;
      while (true) {
        const auto idx = lat.index_of(y);
        if (idx && cg.vertex_of_site(*idx) >= 0) {
          double dist2 = 0;
          for (int i = 0; i < d; ++i) {
            const double diff = static_cast<double>(y[i]) - target[i];
            dist2 += diff * diff;
          }
          if (dist2 < best || (dist2 == best && y < best_site)) {
            best = dist2;
            best_site = y;
          }
        }
        int i = d - 1;
        while (i >= 0 && y[i] == hi[i]) {
          y[i] = lo[i];
          --i;
        }
        if (i < 0) break;
        ++y[i];
      }
    }
    const double r1 = static_cast<double>(radius - 1);
    if (!best_site.empty() && std::sqrt(best) <= r1) return best_site;
    if (radius > 4 * max_extent + 4) {
      require(!best_site.empty(), ErrorKind::degenerate_environment,
              "no cluster site found");
      return best_site;
    }
  }
}

}  // namespace rcgff
