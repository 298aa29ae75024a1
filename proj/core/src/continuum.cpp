#include "rcgff/continuum.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rcgff/errors.hpp"
#include "rcgff/parallel.hpp"
#include "rcgff/rng.hpp"

namespace rcgff {
namespace {

constexpr double kPi = std::numbers::pi;

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Composite 10-point Gauss-Legendre on [lo, hi] with `panels` panels.
Rule composite_gauss(double lo, double hi, int panels) {
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  Rule r;
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(mid - 0.5 * h * a[i]);
      r.w.push_back(0.5 * h * wt[i]);
      r.x.push_back(mid + 0.5 * h * a[i]);
      r.w.push_back(0.5 * h * wt[i]);
    }
  }
  return r;
}

const Rectangle& require_rectangle(const ContinuumGreenSpec& spec) {
  const auto* r = std::get_if<Rectangle>(&spec.domain);
  require(r != nullptr, ErrorKind::unsupported, "domain is not a rectangle");
  require(is_diagonal(spec.sigma2), ErrorKind::unsupported,
          "the rectangle series needs a diagonal Sigma^2; use mc_green");
  return *r;
}

double isotropic_s2(const ContinuumGreenSpec& spec) {
  const int d = dim(spec);
  const double s2 = spec.sigma2(0, 0);
  bool iso = is_diagonal(spec.sigma2);
  for (int i = 1; i < d && iso; ++i)
    iso = std::abs(spec.sigma2(i, i) - s2) <= 1e-14 * std::abs(s2);
  require(iso, ErrorKind::unsupported,
          "the ball formulas need an isotropic Sigma^2 = s2 I; use mc_green");
  return s2;
}

void check_points(const ContinuumGreenSpec& spec, std::span<const double> x,
                  std::span<const double> y) {
  const auto d = static_cast<std::size_t>(dim(spec));
  require(x.size() == d && y.size() == d, ErrorKind::parameter,
          "point dimension mismatch");
  require(contains(spec.domain, x) && contains(spec.domain, y),
          ErrorKind::domain, "points must lie in the open domain");
  bool same = true;
  for (std::size_t i = 0; i < d && same; ++i) same = x[i] == y[i];
  require(!same, ErrorKind::singularity, "Green function is singular at x = y");
}

// sinh(a) sinh(b) / sinh(c) for 0 <= a, b and a + b <= c, without overflow.
double sinh_ratio(double a, double b, double c) {
  return 0.5 * std::exp(a + b - c) * (-std::expm1(-2 * a)) *
         (-std::expm1(-2 * b)) / (-std::expm1(-2 * c));
}

struct RectangleSeries {
  const Rectangle& rect;
  const Eigen::MatrixXd& s2;
  std::span<const double> x, y;
  int d;
  int axis;               // closed-form axis
  std::vector<int> other; // sine-series axes

  RectangleSeries(const ContinuumGreenSpec& spec, std::span<const double> x_,
                  std::span<const double> y_)
      : rect(require_rectangle(spec)), s2(spec.sigma2), x(x_), y(y_),
        d(dim(spec)) {
    axis = 0;
    double best = -1;
    for (int i = 0; i < d; ++i) {
      const double sep = std::abs(x[i] - y[i]) / std::sqrt(s2(i, i));
      if (sep > best) {
        best = sep;
        axis = i;
      }
    }
    for (int i = 0; i < d; ++i)
      if (i != axis) other.push_back(i);
  }

  // Contribution and absolute bound of one mode k (over `other`).
  std::pair<double, double> mode(const std::vector<int>& k) const {
    double m = 0, prod = 1, bound = 1;
    for (std::size_t j = 0; j < other.size(); ++j) {
      const int i = other[j];
      const double L = rect.hi[i] - rect.lo[i];
      const double kk = k[j] * kPi / L;
      m += 0.5 * s2(i, i) * kk * kk;
      prod *= (2.0 / L) * std::sin(kk * (x[i] - rect.lo[i])) *
              std::sin(kk * (y[i] - rect.lo[i]));
      bound *= 2.0 / L;
    }
    const double sa = s2(axis, axis);
    const double La = rect.hi[axis] - rect.lo[axis];
    const double alpha = std::sqrt(2.0 * m / sa);
    const double ulo = std::min(x[axis], y[axis]) - rect.lo[axis];
    const double uhi = rect.hi[axis] - std::max(x[axis], y[axis]);
    const double h =
        (2.0 / sa) * sinh_ratio(alpha * ulo, alpha * uhi, alpha * La) / alpha;
    return {prod * h, bound * h};
  }

  // Sum and bound over shell s: all k in [1, s]^{d-1} with max k = s.
  std::pair<double, double> shell(int s) const {
    const std::size_t q = other.size();
    std::vector<int> k(q, 1);
    double sum = 0, bound = 0;
    while (true) {
      int mx = 0;
      for (int v : k) mx = std::max(mx, v);
      if (mx == s) {
        const auto [c, b] = mode(k);
        sum += c;
        bound += b;
      }
      std::size_t j = 0;
      while (j < q && k[j] == s) k[j++] = 1;
      if (j == q) break;
      ++k[j];
    }
    return {sum, bound};
  }
};

int default_max_shells(int d) {
  if (d == 2) return 400000;
  if (d == 3) return 3000;
  return 150;
}

}  // namespace

ContinuumGreenSpec ContinuumGreenSpec::isotropic(ContinuumDomain domain,
                                                 double s2) {
  const int d = rcgff::dim(domain);
  return {std::move(domain), s2 * Eigen::MatrixXd::Identity(d, d), 0};
}

int dim(const ContinuumGreenSpec& spec) { return dim(spec.domain); }

bool is_diagonal(const Eigen::MatrixXd& sigma2) {
  for (Eigen::Index i = 0; i < sigma2.rows(); ++i)
    for (Eigen::Index j = 0; j < sigma2.cols(); ++j)
      if (i != j && sigma2(i, j) != 0.0) return false;
  return true;
}

double heat_kernel(const Eigen::MatrixXd& sigma2, double t,
                   std::span<const double> x, std::span<const double> y) {
  require(t > 0, ErrorKind::parameter, "t must be > 0");
  const auto d = sigma2.rows();
  require(sigma2.cols() == d && static_cast<Eigen::Index>(x.size()) == d &&
              static_cast<Eigen::Index>(y.size()) == d,
          ErrorKind::parameter, "dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma2);
  require(llt.info() == Eigen::Success, ErrorKind::parameter,
          "Sigma^2 must be positive definite");
  Eigen::VectorXd diff(d);
  for (Eigen::Index i = 0; i < d; ++i) diff[i] = x[i] - y[i];
  const double quad = diff.dot(llt.solve(diff));
  double logdet = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return std::exp(-quad / (2.0 * t) - 0.5 * (d * std::log(2.0 * kPi * t) +
                                             logdet));
}

SeriesValue green_rectangle_series(const ContinuumGreenSpec& spec,
                                   std::span<const double> x,
                                   std::span<const double> y, double tol) {
  require(tol > 0, ErrorKind::parameter, "tol must be > 0");
  const RectangleSeries series(spec, x, y);
  check_points(spec, x, y);
  const int cap =
      spec.max_shells > 0 ? spec.max_shells : default_max_shells(series.d);
  double total = 0;
  int quiet = 0;
  for (int s = 1; s <= cap; ++s) {
    const auto [sum, bound] = series.shell(s);
    total += sum;
    if (bound <= tol * std::abs(total)) {
      if (++quiet == 3) return {total, s};
    } else {
      quiet = 0;
    }
  }
  std::ostringstream os;
  os << "rectangle series did not reach tol " << tol << " within " << cap
     << " shells";
  fail(ErrorKind::accuracy, os.str());
}

double green_rectangle_truncated(const ContinuumGreenSpec& spec,
                                 std::span<const double> x,
                                 std::span<const double> y, int shells) {
  const RectangleSeries series(spec, x, y);
  check_points(spec, x, y);
  double total = 0;
  for (int s = 1; s <= shells; ++s) total += series.shell(s).first;
  return total;
}

double green_rectangle(const ContinuumGreenSpec& spec,
                       std::span<const double> x, std::span<const double> y,
                       double tol) {
  return green_rectangle_series(spec, x, y, tol).value;
}

double green_ball(const ContinuumGreenSpec& spec, std::span<const double> x,
                  std::span<const double> y, double /*tol*/) {
  const auto* b = std::get_if<Ball>(&spec.domain);
  require(b != nullptr, ErrorKind::unsupported, "domain is not a ball");
  const double s2 = isotropic_s2(spec);
  check_points(spec, x, y);
  const int d = dim(spec);
  double xx = 0, yy = 0, xy = 0, dist2 = 0;
  for (int i = 0; i < d; ++i) {
    const double a = x[i] - b->center[i], c = y[i] - b->center[i];
    xx += a * a;
    yy += c * c;
    xy += a * c;
    dist2 += (a - c) * (a - c);
  }
  const double R = b->radius, R2 = R * R;
  // |y| |x - y*| with y* the inversion of y in the sphere.
  const double image2 = std::max(xx * yy - 2.0 * R2 * xy + R2 * R2, 0.0);
  double g;
  if (d == 2) {
    g = (0.5 / kPi) * 0.5 * std::log(image2 / (R2 * dist2));
  } else {
    const double omega = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
    const double cd = 1.0 / ((d - 2) * omega);
    g = cd * (std::pow(dist2, 0.5 * (2 - d)) -
              std::pow(image2 / R2, 0.5 * (2 - d)));
  }
  return (2.0 / s2) * g;
}

double green(const ContinuumGreenSpec& spec, std::span<const double> x,
             std::span<const double> y, double tol) {
  if (std::holds_alternative<Rectangle>(spec.domain))
    return green_rectangle(spec, x, y, tol);
  return green_ball(spec, x, y, tol);
}

double green_cell_average(const ContinuumGreenSpec& spec,
                          std::span<const double> x,
                          std::span<const double> y, double h, double tol) {
  const int d = dim(spec);
  require(h > 0, ErrorKind::parameter, "cell half-width must be > 0");
  const Rule r = composite_gauss(-h, h, 1);
  const int m = static_cast<int>(r.x.size());
  int total = 1;
  for (int i = 0; i < d; ++i) total *= m;
  std::vector<double> p(d);
  double acc = 0, vol = 0;
  for (int c = 0; c < total; ++c) {
    int rem = c;
    double w = 1;
    for (int i = 0; i < d; ++i) {
      const int j = rem % m;
      rem /= m;
      p[i] = y[i] + r.x[j];
      w *= r.w[j];
    }
    vol += w;
    if (!contains(spec.domain, p)) continue;
    acc += w * green(spec, x, p, tol);
  }
  return acc / vol;
}

// ------------------------------------------------------------ Monte Carlo

namespace {

struct Stepper {
  const ContinuumGreenSpec& spec;
  int d;
  std::vector<double> chol;  // row-major lower factor of Sigma^2
  std::vector<double> var;   // diagonal of Sigma^2
  const Rectangle* rect;
  const Ball* ball;

  explicit Stepper(const ContinuumGreenSpec& s)
      : spec(s), d(dim(s)), rect(std::get_if<Rectangle>(&s.domain)),
        ball(std::get_if<Ball>(&s.domain)) {
    require(s.sigma2.rows() == d && s.sigma2.cols() == d,
            ErrorKind::parameter, "Sigma^2 dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(s.sigma2);
    require(llt.info() == Eigen::Success, ErrorKind::parameter,
            "Sigma^2 must be positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    chol.resize(static_cast<std::size_t>(d * d));
    var.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      var[i] = s.sigma2(i, i);
      for (int j = 0; j < d; ++j) chol[i * d + j] = l(i, j);
    }
  }

  // Survival factor of one half-space crossing test: the bridge between
  // two points at distances a, b from a face, with normal variance v.
  static double face_survival(double a, double b, double v) {
    const double e = 2.0 * a * b / v;
    return e > 40.0 ? 1.0 : -std::expm1(-e);
  }

  // Probability that the Brownian bridge from a to b (both inside) touched
  // the boundary, treating each face (or the tangent plane of the sphere)
  // as a half-space.
  double crossing_probability(const double* a, const double* b,
                              double dt) const {
    double survive = 1.0;
    if (rect) {
      for (int i = 0; i < d; ++i) {
        const double v = var[i] * dt;
        survive *= face_survival(a[i] - rect->lo[i], b[i] - rect->lo[i], v);
        survive *= face_survival(rect->hi[i] - a[i], rect->hi[i] - b[i], v);
      }
    } else {
      double na = 0, nb = 0;
      for (int i = 0; i < d; ++i) {
        na += (a[i] - ball->center[i]) * (a[i] - ball->center[i]);
        nb += (b[i] - ball->center[i]) * (b[i] - ball->center[i]);
      }
      na = std::sqrt(na);
      nb = std::sqrt(nb);
      if (nb > 0) {
        double v = 0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            v += (b[i] - ball->center[i]) * spec.sigma2(i, j) *
                 (b[j] - ball->center[j]);
        v = v / (nb * nb) * dt;
        survive *= face_survival(ball->radius - na, ball->radius - nb, v);
      }
    }
    return 1.0 - survive;
  }

  // Runs one killed path from x; calls on_step(position, dt) before every
  // step. Returns the exit time.
  template <class OnStep>
  double run(std::span<const double> x, double dt, RandomStream& rng,
             OnStep&& on_step) const {
    std::vector<double> pos(x.begin(), x.end()), next(d), xi(d);
    const double sq = std::sqrt(dt);
    double t = 0;
    while (true) {
      on_step(pos.data(), dt);
      t += dt;
      for (int i = 0; i < d; ++i) xi[i] = rng.normal();
      for (int i = 0; i < d; ++i) {
        double acc = 0;
        for (int j = 0; j <= i; ++j) acc += chol[i * d + j] * xi[j];
        next[i] = pos[i] + sq * acc;
      }
      if (!contains(spec.domain, next)) return t;
      const double p = crossing_probability(pos.data(), next.data(), dt);
      if (p > 0 && rng.uniform() < p) return t;
      pos.swap(next);
    }
  }
};

}  // namespace

Estimate mc_green_fixed(const ContinuumGreenSpec& spec,
                        std::span<const double> x, std::span<const double> y,
                        std::uint64_t seed, std::size_t replicas, double step,
                        double cell_half_width, int workers) {
  require(replicas >= 2, ErrorKind::parameter, "replicas must be >= 2");
  require(step > 0 && cell_half_width > 0, ErrorKind::parameter,
          "step and cell width must be > 0");
  const Stepper stepper(spec);
  const int d = stepper.d;
  require(contains(spec.domain, x), ErrorKind::domain,
          "start point must lie in the domain");
  // Cells outside D collect no time.
  std::vector<double> corner(d);
  bool inside = true;
  for (int c = 0; c < (1 << d) && inside; ++c) {
    for (int i = 0; i < d; ++i)
      corner[i] = y[i] + (((c >> i) & 1) ? cell_half_width : -cell_half_width);
    inside = contains(spec.domain, corner);
  }
  if (!inside) return {0.0, 0.0, replicas};
  const double vol = std::pow(2.0 * cell_half_width, d);
  std::vector<double> occ(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, stream_tag::brownian);
    double acc = 0;
    stepper.run(x, step, rng, [&](const double* p, double dt) {
      for (int i = 0; i < d; ++i)
        if (std::abs(p[i] - y[i]) >= cell_half_width) return;
      acc += dt;
    });
    occ[r] = acc / vol;
  });
  return estimate_of(occ);
}

McGreenResult mc_green(const ContinuumGreenSpec& spec,
                       std::span<const double> x, std::span<const double> y,
                       std::uint64_t seed, const McGreenOptions& opts) {
  McGreenResult res;
  double step = opts.step;
  Estimate prev = mc_green_fixed(spec, x, y, derive_seed(seed, 0),
                                 opts.replicas, step, opts.cell_half_width,
                                 opts.workers);
  res.estimate = prev;
  res.step = step;
  for (int h = 1; h <= opts.max_halvings; ++h) {
    step *= 0.5;
    const Estimate cur =
        mc_green_fixed(spec, x, y, derive_seed(seed, static_cast<std::uint64_t>(h)),
                       opts.replicas, step, opts.cell_half_width, opts.workers);
    res.estimate = cur;
    res.step = step;
    res.halvings = h;
    const double combined = std::sqrt(cur.se * cur.se + prev.se * prev.se);
    if (std::abs(cur.mean - prev.mean) <= combined) {
      res.step_converged = true;
      break;
    }
    prev = cur;
  }
  return res;
}

Estimate mc_exit_time(const ContinuumGreenSpec& spec,
                      std::span<const double> x, std::uint64_t seed,
                      std::size_t replicas, double step, int workers) {
  require(replicas >= 2, ErrorKind::parameter, "replicas must be >= 2");
  require(contains(spec.domain, x), ErrorKind::domain,
          "start point must lie in the domain");
  const Stepper stepper(spec);
  std::vector<double> tau(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    RandomStream rng(seed, r, stream_tag::brownian);
    tau[r] = stepper.run(x, step, rng, [](const double*, double) {});
  });
  return estimate_of(tau);
}

double exit_time_moment(const ContinuumGreenSpec& spec,
                        std::span<const double> x) {
  const auto* b = std::get_if<Ball>(&spec.domain);
  require(b != nullptr, ErrorKind::unsupported,
          "exit_time_moment needs a ball domain");
  const double s2 = isotropic_s2(spec);
  const int d = dim(spec);
  double r2 = 0;
  for (int i = 0; i < d; ++i) r2 += (x[i] - b->center[i]) * (x[i] - b->center[i]);
  return std::max(b->radius * b->radius - r2, 0.0) / (s2 * d);
}

// ------------------------------------------------------------ sigma^2(f)

namespace {

// Rectangle: theta * sum_k fhat_k^2 / lambda_k with K modes per axis and
// coefficients from composite Gauss with `panels` panels per axis.
double sigma_sq_rectangle(const ContinuumGreenSpec& spec,
                          const ContinuumFunction& f, int modes, int panels) {
  const Rectangle& rect = require_rectangle(spec);
  const int d = dim(spec);
  std::vector<Rule> rules;
  std::vector<Eigen::MatrixXd> basis;  // K x M per axis, weights folded in
  for (int i = 0; i < d; ++i) {
    rules.push_back(composite_gauss(rect.lo[i], rect.hi[i], panels));
    const Rule& r = rules.back();
    const double L = rect.hi[i] - rect.lo[i];
    Eigen::MatrixXd b(modes, static_cast<Eigen::Index>(r.x.size()));
    for (int k = 0; k < modes; ++k)
      for (std::size_t m = 0; m < r.x.size(); ++m)
        b(k, static_cast<Eigen::Index>(m)) =
            std::sqrt(2.0 / L) * std::sin((k + 1) * kPi * (r.x[m] - rect.lo[i]) / L) *
            r.w[m];
    basis.push_back(std::move(b));
  }
  const auto M = static_cast<Eigen::Index>(rules[0].x.size());
  // Tensor of f values, axis 0 slowest; contract one axis at a time.
  std::vector<Eigen::Index> dims(d, M);
  Eigen::Index total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<double> data(static_cast<std::size_t>(total));
  std::vector<double> p(d);
  for (Eigen::Index c = 0; c < total; ++c) {
    Eigen::Index rem = c;
    for (int i = d - 1; i >= 0; --i) {
      p[i] = rules[i].x[static_cast<std::size_t>(rem % M)];
      rem /= M;
    }
    data[static_cast<std::size_t>(c)] = f(p);
  }
  for (int axis = 0; axis < d; ++axis) {
    Eigen::Index outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= dims[i];
    for (int i = axis + 1; i < d; ++i) inner *= dims[i];
    const Eigen::Index n_in = dims[axis];
    std::vector<double> out(static_cast<std::size_t>(outer * modes * inner));
    for (Eigen::Index o = 0; o < outer; ++o) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
          src(&data[static_cast<std::size_t>(o * n_in * inner)], n_in, inner);
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
          dst(&out[static_cast<std::size_t>(o * modes * inner)], modes, inner);
      dst.noalias() = basis[axis] * src;
    }
    data.swap(out);
    dims[axis] = modes;
  }
  double sum = 0;
  std::vector<int> k(d, 0);
  for (std::size_t c = 0; c < data.size(); ++c) {
    std::size_t rem = c;
    double lambda = 0;
    for (int i = d - 1; i >= 0; --i) {
      const int ki = static_cast<int>(rem % static_cast<std::size_t>(modes)) + 1;
      rem /= static_cast<std::size_t>(modes);
      const double L = rect.hi[i] - rect.lo[i];
      lambda += 0.5 * spec.sigma2(i, i) * (ki * kPi / L) * (ki * kPi / L);
    }
    sum += data[c] * data[c] / lambda;
  }
  return sum;
}

// Disk: outer polar integral over x; the inner integral over y is in polar
// coordinates centred at x with r = rho_max s^2, which removes the
// logarithmic singularity.
double sigma_sq_disk(const ContinuumGreenSpec& spec, const ContinuumFunction& f,
                     int radial, int angular) {
  const auto& b = std::get<Ball>(spec.domain);
  const double R = b.radius;
  const Rule rr = composite_gauss(0.0, R, radial / 10);
  const Rule rs = composite_gauss(0.0, 1.0, radial / 10);
  const double dphi = 2.0 * kPi / angular;
  std::vector<double> x(2), y(2);
  double outer = 0;
  for (std::size_t i = 0; i < rr.x.size(); ++i) {
    for (int a = 0; a < angular; ++a) {
      const double psi = (a + 0.5) * dphi;
      x[0] = b.center[0] + rr.x[i] * std::cos(psi);
      x[1] = b.center[1] + rr.x[i] * std::sin(psi);
      const double fx = f(x);
      if (fx == 0.0) continue;
      const double cx = x[0] - b.center[0], cy = x[1] - b.center[1];
      const double c2 = cx * cx + cy * cy;
      double inner = 0;
      for (int q = 0; q < angular; ++q) {
        const double phi = q * dphi;
        const double ex = std::cos(phi), ey = std::sin(phi);
        const double bb = cx * ex + cy * ey;
        const double rmax = -bb + std::sqrt(bb * bb + R * R - c2);
        for (std::size_t j = 0; j < rs.x.size(); ++j) {
          const double s = rs.x[j];
          const double r = rmax * s * s;
          y[0] = x[0] + r * ex;
          y[1] = x[1] + r * ey;
          if (r <= 0 || !contains(spec.domain, y)) continue;
          const double fy = f(y);
          if (fy == 0.0) continue;
          inner += rs.w[j] * 2.0 * rmax * rmax * s * s * s * fy *
                   green_ball(spec, x, y);
        }
      }
      outer += rr.w[i] * dphi * rr.x[i] * fx * inner * dphi;
    }
  }
  return outer;
}

}  // namespace

SigmaSqResult sigma_sq_f(const ContinuumGreenSpec& spec,
                         const ContinuumFunction& f, double theta,
                         double tol) {
  require(theta > 0 && theta <= 1, ErrorKind::parameter,
          "theta must lie in (0, 1]");
  require(tol > 0, ErrorKind::parameter, "tol must be > 0");
  const int d = dim(spec);
  std::function<double(int)> level;
  if (std::holds_alternative<Rectangle>(spec.domain)) {
    require_rectangle(spec);
    const int base = d == 2 ? 64 : (d == 3 ? 16 : 6);
    level = [&, base](int l) {
      const int modes = base << l;
      return sigma_sq_rectangle(spec, f, modes, std::max(1, modes / 2));
    };
  } else {
    require(d == 2, ErrorKind::unsupported,
            "sigma_sq_f on a ball is implemented for d = 2 only");
    isotropic_s2(spec);
    level = [&](int l) { return sigma_sq_disk(spec, f, 20 << l, 32 << l); };
  }
  SigmaSqResult res;
  double prev = level(0);
  for (int l = 1; l <= 2; ++l) {
    const double cur = level(l);
    const double scale = std::max(std::abs(cur), 1e-300);
    res.coarse = theta * prev;
    res.fine = theta * cur;
    res.value = res.fine;
    res.relative_change = cur == prev ? 0.0 : std::abs(cur - prev) / scale;
    if (res.relative_change <= tol) return res;
    prev = cur;
  }
  std::ostringstream os;
  os << "sigma^2(f) quadrature did not settle: relative change "
     << res.relative_change << " > " << tol;
  fail(ErrorKind::accuracy, os.str());
}

double bar_g(const Eigen::MatrixXd& sigma2, double mean_mu) {
  require(sigma2.rows() == 2 && sigma2.cols() == 2, ErrorKind::parameter,
          "bar_g is defined for d = 2");
  require(mean_mu > 0, ErrorKind::parameter, "E[mu] must be > 0");
  const double det = sigma2.determinant();
  require(det > 0, ErrorKind::parameter, "Sigma^2 must be positive definite");
  return 1.0 / (kPi * std::sqrt(det) * mean_mu);
}

double centering_m_n(double bar_g_value, double n, int d) {
  require(n > 1, ErrorKind::parameter, "n must be > 1");
  require(bar_g_value > 0, ErrorKind::parameter, "bar_g must be > 0");
  const double s = std::sqrt(2.0 * d);
  return std::sqrt(bar_g_value) *
         (s * std::log(n) - 3.0 / (2.0 * s) * std::log(std::log(n)));
}

double homogeneous_log_coefficient(double c) {
  require(c > 0, ErrorKind::parameter, "conductance must be > 0");
  return (2.0 / kPi) * (1.0 / (4.0 * c));
}

double product_bump(std::span<const double> x) {
  double v = 1.0;
  for (double s : x) {
    const double r = (s - 0.5) / 0.3;
    if (std::abs(r) >= 1.0) return 0.0;
    v *= std::exp(-1.0 / (1.0 - r * r));
  }
  return v;
}

}  // namespace rcgff
