#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rcgff/cluster.hpp"
#include "rcgff/errors.hpp"
#include "rcgff/rng.hpp"

using namespace rcgff;

namespace {

// Hand-built free-boundary field with all edges closed until opened.
struct Builder {
  Lattice lat;
  std::vector<double> w;
  explicit Builder(std::vector<int> ext)
      : lat(std::move(ext), Site{0, 0}, Boundary::free),
        w(2 * lat.num_sites(), 0.0) {}
  void open(std::int64_t x, std::int64_t y, int axis, double v = 1.0) {
    w[lat.edge_index(*lat.index_of(Site{x, y}), axis)] = v;
  }
  ConductanceField field() const { return ConductanceField::from_weights(lat, w); }
};

ConductanceField full(int w, int h) {
  return ConductanceField::generate(LawSpec::constant(1.0), {w, h}, 1);
}

std::int64_t l1(const Site& a, const Site& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

TEST_CASE("largest component of a full box is the whole box") {
  const auto cg = ClusterGraph::largest_component(
      ConductanceField::generate(LawSpec::bernoulli(1.0), {9, 7}, 3));
  CHECK(cg.size() == 63);
  CHECK(cg.density() == 1.0);
}

TEST_CASE("hand-built field: path component beats isolated edge") {
  Builder b({3, 3});
  b.open(0, 0, 0);
  b.open(1, 0, 0);
  b.open(2, 0, 1);
  b.open(2, 1, 1);
  b.open(1, 2, 0);  // (1,2)-(2,2)
  b.open(0, 1, 1);  // isolated edge (0,1)-(0,2)
  const auto cg = ClusterGraph::largest_component(b.field());
  CHECK(cg.size() == 6);
  CHECK_FALSE(cg.vertex_of(Site{0, 1}).has_value());
  CHECK(cg.vertex_of(Site{1, 2}).has_value());
}

TEST_CASE("all-closed field is degenerate") {
  Builder b({4, 4});
  CHECK_THROWS_AS(ClusterGraph::largest_component(b.field()), Error);
}

TEST_CASE("mu and nu sum incident weights and inverse weights") {
  const auto f = ConductanceField::generate(LawSpec::exponential(1.0), {12, 12}, 5);
  const auto cg = ClusterGraph::largest_component(f);
  for (std::size_t v = 0; v < cg.size(); ++v) {
    double mu = 0, nu = 0;
    for (double w : cg.neighbor_weights(static_cast<Vertex>(v))) {
      CHECK(w > 0);
      mu += w;
      nu += 1 / w;
    }
    CHECK(cg.mu(static_cast<Vertex>(v)) == doctest::Approx(mu).epsilon(1e-14));
    CHECK(cg.nu(static_cast<Vertex>(v)) == doctest::Approx(nu).epsilon(1e-14));
  }
}

TEST_CASE("chemical distance on simple geometries") {
  const auto cg = ClusterGraph::largest_component(full(8, 8));
  CHECK(chemical_distance(cg, Site{3, 3}, Site{3, 3}) == 0);
  CHECK(chemical_distance(cg, Site{0, 1}, Site{5, 7}) == 11);

  Builder b({3, 3});
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      if (x + 1 < 3) b.open(x, y, 0);
      if (y + 1 < 3) b.open(x, y, 1);
    }
  b.w[b.lat.edge_index(*b.lat.index_of(Site{0, 1}), 0)] = 0.0;
  const auto cut = ClusterGraph::largest_component(b.field());
  CHECK(chemical_distance(cut, Site{0, 1}, Site{2, 1}) == 2 + 2);
  CHECK_THROWS_AS(chemical_distance(cg, Site{0, 0}, Site{20, 0}), Error);
}

TEST_CASE("chemical distance is a metric on random clusters") {
  const auto cg = ClusterGraph::largest_component(
      ConductanceField::generate(LawSpec::bernoulli(0.7), {20, 20}, 77));
  RandomStream r(1, 0);
  for (int k = 0; k < 30; ++k) {
    const Site x = cg.coord(static_cast<Vertex>(r.below(cg.size())));
    const Site y = cg.coord(static_cast<Vertex>(r.below(cg.size())));
    const Site z = cg.coord(static_cast<Vertex>(r.below(cg.size())));
    const int dxy = chemical_distance(cg, x, y);
    CHECK(dxy == chemical_distance(cg, y, x));
    CHECK(dxy >= l1(x, y));
    CHECK(dxy <= chemical_distance(cg, x, z) + chemical_distance(cg, z, y));
    CHECK((dxy == 0) == (x == y));
  }
}

TEST_CASE("balls and relative boundaries") {
  const auto cg = ClusterGraph::largest_component(full(9, 9));
  const Site c{4, 4};
  const auto b0 = ball(cg, c, 0);
  REQUIRE(b0.size() == 1);
  CHECK(cg.coord(b0[0]) == c);
  CHECK(ball(cg, c, 2.7).size() == 13);  // floor(r) = 2: 2r^2+2r+1

  std::vector<Vertex> all(cg.size());
  for (std::size_t v = 0; v < cg.size(); ++v) all[v] = static_cast<Vertex>(v);
  CHECK(relative_boundary(cg, b0, all).size() == 4);
  CHECK(relative_boundary(cg, all, all).empty());

  const auto rc = ClusterGraph::largest_component(
      ConductanceField::generate(LawSpec::bernoulli(0.6), {16, 16}, 12));
  const Site x = rc.coord(0);
  for (int r = 0; r < 6; ++r) {
    auto a = ball(rc, x, r), bb = ball(rc, x, r + 1);
    std::sort(a.begin(), a.end());
    std::sort(bb.begin(), bb.end());
    CHECK(std::includes(bb.begin(), bb.end(), a.begin(), a.end()));
  }
}

TEST_CASE("empty relative boundary iff A is a union of components of B") {
  // B = two separate segments; A = one of them.
  Builder b({5, 1 + 2});
  b.open(0, 0, 0);
  b.open(1, 0, 0);
  b.open(3, 0, 0);
  b.open(0, 0, 1);
  b.open(0, 1, 1);
  b.open(0, 2, 0);
  b.open(1, 2, 0);
  b.open(2, 2, 0);
  b.open(3, 2, 0);
  b.open(4, 1, 1);
  b.open(4, 0, 1);
  const auto cg = ClusterGraph::largest_component(b.field());
  auto v = [&](std::int64_t x, std::int64_t y) { return cg.require_vertex(Site{x, y}); };
  std::vector<Vertex> seg1{v(0, 0), v(1, 0), v(2, 0)}, seg2{v(3, 0), v(4, 0)};
  std::vector<Vertex> bset = seg1;
  bset.insert(bset.end(), seg2.begin(), seg2.end());
  CHECK(relative_boundary(cg, seg1, bset).empty());
  std::vector<Vertex> part{v(0, 0), v(1, 0)};
  CHECK(relative_boundary(cg, part, bset).size() == 1);
}

TEST_CASE("regularity report") {
  const auto cg = ClusterGraph::largest_component(full(41, 41));
  const auto rep = regularity_check(cg, Site{20, 20}, 10, 0.5, 0.1, 1.5);
  CHECK(rep.volume == 221);
  CHECK(rep.volume_ok);
  CHECK(rep.cheeger_lower_estimate <= rep.cheeger_upper_estimate);
  const auto r0 = regularity_check(cg, Site{20, 20}, 0, 1.0, 0.1, 1.0);
  CHECK(r0.volume == 1);
  CHECK(r0.volume_ok);
  CHECK_THROWS_AS(regularity_check(cg, Site{3, 20}, 10, 0.5, 0.1, 1.0), Error);

  const auto rc = ClusterGraph::largest_component(
      ConductanceField::generate(LawSpec::bernoulli(0.7), {80, 80}, 4));
  const Site c = project(rc, std::vector<double>{40.0, 40.0}, 1.0);
  const auto rr = regularity_check(rc, c, 16, 0.2, 0.05, 2.0);
  CHECK(rr.cheeger_lower_estimate <= rr.cheeger_upper_estimate);
  CHECK(rr.cheeger_lower_estimate >= 0);
}

TEST_CASE("distance comparison") {
  const auto cg = ClusterGraph::largest_component(full(11, 11));
  const auto ok = distance_comparison_check(cg, 5, 2.0, 0.3, Site{5, 5});
  CHECK(ok.ok);
  CHECK_FALSE(ok.sampled);

  // U-shaped corridor: (0,0) to (2,0) needs 6 steps, |x-y|_inf = 2.
  Builder b({3, 3});
  b.open(0, 0, 1);
  b.open(0, 1, 1);
  b.open(0, 2, 0);
  b.open(1, 2, 0);
  b.open(2, 1, 1);
  b.open(2, 0, 1);
  const auto u = ClusterGraph::largest_component(b.field());
  const auto bad = distance_comparison_check(u, 2, 1.0, 0.5, Site{1, 1});
  CHECK_FALSE(bad.ok);
  CHECK(bad.worst_distance == 6);
  CHECK(((bad.worst_x == Site{0, 0} && bad.worst_y == Site{2, 0}) ||
         (bad.worst_x == Site{2, 0} && bad.worst_y == Site{0, 0})));

  const auto big = ClusterGraph::largest_component(full(61, 61));
  const auto s = distance_comparison_check(big, 30, 2.0, 0.3, Site{30, 30});
  CHECK(s.sampled);
  CHECK(s.ok);
}

TEST_CASE("theta estimates") {
  CHECK(theta_estimate(LawSpec::bernoulli(1.0), {32, 32}, 3, 1).mean == 1.0);
  CHECK(theta_estimate(LawSpec::constant(1.0), {32, 32}, 3, 1).mean == 1.0);
  double prev = 0, prev_se = 0;
  for (double p : {0.55, 0.7, 0.9, 1.0}) {
    const auto e = theta_estimate(LawSpec::bernoulli(p), {64, 64}, 8, 2);
    CHECK(e.mean > 0);
    CHECK(e.mean <= 1);
    CHECK(e.mean + 3 * std::hypot(e.se, prev_se) >= prev);
    prev = e.mean;
    prev_se = e.se;
  }
  const auto mid = theta_estimate(LawSpec::bernoulli(0.7), {128, 128}, 4, 9);
  CHECK(mid.mean > 0.0);
  CHECK(mid.mean < 1.0);
}

TEST_CASE("projection onto the cluster") {
  const auto f = ConductanceField::generate(LawSpec::constant(1.0), {9, 9}, 1,
                                            Boundary::free, Site{-4, -4});
  const auto cg = ClusterGraph::largest_component(f);
  CHECK(project(cg, std::vector<double>{0.25, -0.5}, 8) == Site{2, -4});
  CHECK(project(cg, std::vector<double>{0.5, 0.0}, 1) == Site{0, 0});

  const auto rc = ClusterGraph::largest_component(
      ConductanceField::generate(LawSpec::bernoulli(0.6), {20, 20}, 3));
  RandomStream r(4, 0);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x{r.uniform(), r.uniform()};
    const double n = 19;
    const Site p = project(rc, x, n);
    double best = std::numeric_limits<double>::infinity();
    Site arg;
    for (std::size_t v = 0; v < rc.size(); ++v) {
      const Site z = rc.coord(static_cast<Vertex>(v));
      const double d = std::hypot(z[0] - n * x[0], z[1] - n * x[1]);
      if (d < best || (d == best && z < arg)) {
        best = d;
        arg = z;
      }
    }
    CHECK(p == arg);
  }
}

TEST_CASE("projection converges along a ladder on a supercritical cluster") {
  const std::vector<double> x{0.3, 0.6};
  double last = 1;
  for (int n : {8, 32, 128}) {
    const auto cg = ClusterGraph::largest_component(
        ConductanceField::generate(LawSpec::bernoulli(0.8), {n + 1, n + 1}, 6));
    const Site p = project(cg, x, n);
    last = std::hypot(p[0] / double(n) - x[0], p[1] / double(n) - x[1]);
  }
  CHECK(last <= 0.05);
}

TEST_CASE("cluster CSV export") {
  const auto cg = ClusterGraph::largest_component(full(3, 2));
  std::ostringstream v, e;
  cg.write_vertices_csv(v);
  cg.write_edges_csv(e);
  const std::string vs = v.str(), es = e.str();
  CHECK(std::count(vs.begin(), vs.end(), '\n') == 1 + 6);
  CHECK(std::count(es.begin(), es.end(), '\n') == 1 + 7);
}
