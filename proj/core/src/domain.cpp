#include "rcgff/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rcgff/errors.hpp"

namespace rcgff {

Rectangle unit_cube(int d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

Ball unit_ball(int d) { return {std::vector<double>(d, 0.0), 1.0}; }

int dim(const ContinuumDomain& domain) {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Rectangle>)
          return static_cast<int>(s.lo.size());
        else
          return static_cast<int>(s.center.size());
      },
      domain);
}

bool contains(const ContinuumDomain& domain, std::span<const double> x) {
  if (const auto* r = std::get_if<Rectangle>(&domain)) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] > r->lo[i] && x[i] < r->hi[i])) return false;
    return true;
  }
  const auto& b = std::get<Ball>(domain);
  double r2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    r2 += (x[i] - b.center[i]) * (x[i] - b.center[i]);
  return r2 < b.radius * b.radius;
}

double boundary_distance(const ContinuumDomain& domain,
                         std::span<const double> x) {
  if (const auto* r = std::get_if<Rectangle>(&domain)) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i)
      m = std::min({m, x[i] - r->lo[i], r->hi[i] - x[i]});
    return m;
  }
  const auto& b = std::get<Ball>(domain);
  double r2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    r2 += (x[i] - b.center[i]) * (x[i] - b.center[i]);
  return b.radius - std::sqrt(r2);
}

std::pair<std::vector<double>, std::vector<double>> bounding_box(
    const ContinuumDomain& domain) {
  if (const auto* r = std::get_if<Rectangle>(&domain)) return {r->lo, r->hi};
  const auto& b = std::get<Ball>(domain);
  std::vector<double> lo(b.center), hi(b.center);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] -= b.radius;
    hi[i] += b.radius;
  }
  return {lo, hi};
}

std::string describe(const ContinuumDomain& domain) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* r = std::get_if<Rectangle>(&domain)) {
    os << "rectangle";
    for (std::size_t i = 0; i < r->lo.size(); ++i)
      os << (i ? "x" : " ") << '(' << r->lo[i] << ',' << r->hi[i] << ')';
    return os.str();
  }
  const auto& b = std::get<Ball>(domain);
  os << "ball center=(";
  for (std::size_t i = 0; i < b.center.size(); ++i)
    os << (i ? "," : "") << b.center[i];
  os << ") radius=" << b.radius;
  return os.str();
}

std::string describe(const LatticeDomain& domain) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* s = std::get_if<ScaledDomain>(&domain)) {
    os << "n=" << s->n << " * " << describe(s->shape);
  } else if (const auto* c = std::get_if<ChemicalBall>(&domain)) {
    os << "chemical ball radius=" << c->radius << " center=(";
    for (std::size_t i = 0; i < c->center.size(); ++i)
      os << (i ? "," : "") << c->center[i];
    os << ')';
  } else {
    const auto& b = std::get<LatticeBox>(domain);
    os << "lattice box";
    for (std::size_t i = 0; i < b.lo.size(); ++i)
      os << (i ? "x" : " ") << '[' << b.lo[i] << ',' << b.hi[i] << ']';
  }
  return os.str();
}

std::vector<std::uint8_t> interior_mask(const ClusterGraph& cg,
                                        const LatticeDomain& domain) {
  const int d = cg.dim();
  std::vector<std::uint8_t> mask(cg.size(), 0);
  if (const auto* s = std::get_if<ScaledDomain>(&domain)) {
    require(dim(s->shape) == d, ErrorKind::parameter,
            "domain dimension mismatch");
    require(s->n > 0, ErrorKind::parameter, "scale n must be > 0");
    std::vector<double> x(d);
    for (std::size_t v = 0; v < cg.size(); ++v) {
      const std::size_t site = cg.site_of(static_cast<Vertex>(v));
      for (int i = 0; i < d; ++i)
        x[i] = static_cast<double>(cg.lattice().coord(site, i)) / s->n;
      mask[v] = contains(s->shape, x) ? 1 : 0;
    }
  } else if (const auto* c = std::get_if<ChemicalBall>(&domain)) {
    require(c->radius >= 0, ErrorKind::parameter, "radius must be >= 0");
    const Vertex center = cg.require_vertex(c->center);
    const auto dist = bfs_distances(cg, center, c->radius);
    for (std::size_t v = 0; v < cg.size(); ++v) mask[v] = dist[v] >= 0;
  } else {
    const auto& b = std::get<LatticeBox>(domain);
    require(static_cast<int>(b.lo.size()) == d &&
                static_cast<int>(b.hi.size()) == d,
            ErrorKind::parameter, "lattice box dimension mismatch");
    for (std::size_t v = 0; v < cg.size(); ++v) {
      const std::size_t site = cg.site_of(static_cast<Vertex>(v));
      bool in = true;
      for (int i = 0; i < d && in; ++i) {
        const auto z = cg.lattice().coord(site, i);
        in = z >= b.lo[i] && z <= b.hi[i];
      }
      mask[v] = in;
    }
  }
  return mask;
}

std::vector<Vertex> interior_vertices(const ClusterGraph& cg,
                                      const LatticeDomain& domain) {
  const auto mask = interior_mask(cg, domain);
  std::vector<Vertex> out;
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) out.push_back(static_cast<Vertex>(v));
  return out;
}

std::pair<std::vector<int>, Site> box_for(const ContinuumDomain& shape,
                                          double n) {
  const auto [lo, hi] = bounding_box(shape);
  const int d = static_cast<int>(lo.size());
  std::vector<int> extents(d);
  Site origin(d);
  for (int i = 0; i < d; ++i) {
    const auto a = static_cast<std::int64_t>(std::floor(n * lo[i])) - 1;
    const auto b = static_cast<std::int64_t>(std::ceil(n * hi[i])) + 1;
    origin[i] = a;
    extents[i] = static_cast<int>(b - a + 1);
  }
  return {extents, origin};
}

}  // namespace rcgff
