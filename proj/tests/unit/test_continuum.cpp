#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rcgff/continuum.hpp"
#include "rcgff/errors.hpp"
#include "rcgff/rng.hpp"

using namespace rcgff;
using std::numbers::pi;

namespace {

using V = std::vector<double>;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io;
}

ContinuumGreenSpec square(double s2 = 2.0) {
  return ContinuumGreenSpec::isotropic(unit_cube(2), s2);
}

}  // namespace

TEST_CASE("Gaussian heat kernel") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  CHECK(heat_kernel(id, 0.7, V{0.1, 0.2}, V{0.1, 0.2}) ==
        doctest::Approx(1 / (2 * pi * 0.7)).epsilon(1e-14));
  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.3, 0.3, 1.0;
  CHECK(heat_kernel(s, 0.5, V{0, 0}, V{0.4, -0.2}) ==
        doctest::Approx(heat_kernel(s, 0.5, V{0.4, -0.2}, V{0, 0})).epsilon(1e-15));
  // tensor midpoint rule on [-8, 8]^2 around x
  double total = 0;
  const int m = 800;
  const double h = 16.0 / m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      total += heat_kernel(s, 0.5, V{0, 0}, V{-8 + (i + 0.5) * h, -8 + (j + 0.5) * h});
  CHECK(std::abs(total * h * h - 1.0) <= 1e-6);
  CHECK(kind_of([&] { heat_kernel(id, 0.0, V{0, 0}, V{0, 0}); }) == ErrorKind::parameter);
}

TEST_CASE("rectangle series: reference value, symmetry, truncation") {
  const auto spec = square();
  const V x{0.25, 0.5}, y{0.75, 0.5};
  const auto sv = green_rectangle_series(spec, x, y, 1e-12);
  CHECK(sv.value == doctest::Approx(0.042558031523).epsilon(1e-9));
  CHECK(std::abs(green_rectangle_truncated(spec, x, y, sv.shells) -
                 green_rectangle_truncated(spec, x, y, 2 * sv.shells)) <= 1e-6);
  CHECK(std::abs(green(spec, x, y) - green(spec, y, x)) <= 1e-10);

  RandomStream r(3, 0);
  for (int k = 0; k < 10; ++k) {
    const V a{0.1 + 0.8 * r.uniform(), 0.1 + 0.8 * r.uniform()};
    const V b{0.1 + 0.8 * r.uniform(), 0.1 + 0.8 * r.uniform()};
    const auto s1 = green_rectangle_series(spec, a, b, 1e-10);
    CHECK(std::abs(green_rectangle_truncated(spec, a, b, 2 * s1.shells) - s1.value) <=
          1e-10 * std::max(1.0, s1.value) * 10);
    CHECK(s1.value > 0);
  }
}

TEST_CASE("rectangle series: Dirichlet boundary and errors") {
  const auto spec = square();
  const V y{0.5, 0.5};
  const double center = green(spec, V{0.5, 0.3}, y);
  CHECK(green(spec, V{0.5, 1e-3}, y) <= 1e-2 * center);
  CHECK(kind_of([&] { green(spec, y, y); }) == ErrorKind::singularity);
  CHECK(kind_of([&] { green(spec, V{1.2, 0.5}, y); }) == ErrorKind::domain);
  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.5, 0.5, 2.0;
  CHECK(kind_of([&] { green_rectangle({unit_cube(2), s, 0}, V{0.2, 0.2}, y); }) ==
        ErrorKind::unsupported);
}

TEST_CASE("anisotropic diagonal rectangle agrees with the rescaled isotropic one") {
  // Sigma^2 = diag(a, b) on (0,1)^2 maps to Sigma^2 = 2I on (0, s1) x (0, s2)
  // with s_i = sqrt(2 / a_i); the Green function is unchanged by the map.
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.0, 0.0, 4.0;
  const ContinuumGreenSpec an{unit_cube(2), s, 0};
  const double s1 = std::sqrt(2.0), s2 = std::sqrt(0.5);
  const ContinuumGreenSpec iso{Rectangle{{0, 0}, {s1, s2}}, 2.0 * Eigen::MatrixXd::Identity(2, 2), 0};
  const V x{0.3, 0.4}, y{0.6, 0.7};
  // Jacobian of the map y -> (s1 y1, s2 y2) converts densities.
  CHECK(green(an, x, y) ==
        doctest::Approx(green(iso, V{s1 * x[0], s2 * x[1]}, V{s1 * y[0], s2 * y[1]}) * s1 * s2)
            .epsilon(1e-9));
}

TEST_CASE("Brownian scaling of rectangle Green functions") {
  for (int d : {2, 3}) {
    const ContinuumGreenSpec a = ContinuumGreenSpec::isotropic(unit_cube(d), 2.0);
    const double c = 2.5;
    Rectangle big{V(d, 0.0), V(d, c)};
    const ContinuumGreenSpec b = ContinuumGreenSpec::isotropic(big, 2.0);
    V x(d, 0.3), y(d, 0.55);
    x[0] = 0.2;
    V cx = x, cy = y;
    for (int i = 0; i < d; ++i) {
      cx[i] *= c;
      cy[i] *= c;
    }
    const double lhs = green(b, cx, cy), rhs = std::pow(c, 2 - d) * green(a, x, y);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("ball Green function") {
  const double s2 = 2.0, R = 1.0;
  const auto disk = ContinuumGreenSpec::isotropic(unit_ball(2), s2);
  const V o{0, 0}, y{0.3, 0.4};
  CHECK(green(disk, o, y) == doctest::Approx(std::log(R / 0.5) / (pi * s2)).epsilon(1e-12));
  const V a{0.2, -0.1}, b{-0.4, 0.5};
  CHECK(std::abs(green(disk, a, b) - green(disk, b, a)) <= 1e-10);
  RandomStream r(8, 0);
  for (int k = 0; k < 5; ++k) {
    const double th = 2 * pi * r.uniform();
    const double c = std::cos(th), s = std::sin(th);
    const V ra{c * a[0] - s * a[1], s * a[0] + c * a[1]};
    const V rb{c * b[0] - s * b[1], s * b[0] + c * b[1]};
    CHECK(std::abs(green(disk, ra, rb) - green(disk, a, b)) <= 1e-8);
  }
  // 3D: free-space kernel minus image, centre case reduces to (1/|y| - 1/R)/(2 pi s2)
  const auto b3 = ContinuumGreenSpec::isotropic(unit_ball(3), s2);
  CHECK(green(b3, V{0, 0, 0}, V{0, 0.5, 0}) ==
        doctest::Approx((1 / 0.5 - 1) / (2 * pi * s2)).epsilon(1e-12));
  Eigen::MatrixXd an(2, 2);
  an << 1.0, 0.0, 0.0, 2.0;
  CHECK(kind_of([&] { green_ball({unit_ball(2), an, 0}, a, b); }) == ErrorKind::unsupported);
}

TEST_CASE("kernels are nonnegative on a probe set") {
  const auto sq = square();
  const auto disk = ContinuumGreenSpec::isotropic(unit_ball(2), 2.0);
  RandomStream r(10, 0);
  for (int k = 0; k < 20; ++k) {
    const V a{r.uniform(), r.uniform()}, b{r.uniform(), r.uniform()};
    CHECK(green(sq, a, b) >= 0);
    const V c{a[0] - 0.5, a[1] - 0.5}, e{b[0] - 0.5, b[1] - 0.5};
    CHECK(green(disk, c, e) >= 0);
  }
}

TEST_CASE("Monte Carlo Green oracle") {
  const auto spec = square();
  const V x{0.5, 0.5}, y{0.3, 0.5};
  CHECK(mc_green_fixed(spec, x, V{0.99, 0.5}, 1, 100, 1e-3, 0.02).mean == 0.0);
  const auto e1 = mc_green_fixed(spec, x, y, 5, 10000, 4e-4, 0.03);
  const auto e2 = mc_green_fixed(spec, x, y, 6, 20000, 4e-4, 0.03);
  const double ref = green_cell_average(spec, x, y, 0.03);
  CHECK(std::abs(e2.mean - ref) <= 4 * e2.se);
  CHECK(e1.se / e2.se == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
  const auto w1 = mc_green_fixed(spec, x, y, 5, 4000, 4e-4, 0.03, 1);
  const auto w3 = mc_green_fixed(spec, x, y, 5, 4000, 4e-4, 0.03, 3);
  CHECK(w1.mean == w3.mean);
}

TEST_CASE("exit-time moment") {
  const auto disk = ContinuumGreenSpec::isotropic(unit_ball(2), 2.0);
  CHECK(exit_time_moment(disk, V{0, 0}) == doctest::Approx(0.25));
  CHECK(exit_time_moment(disk, V{1, 0}) == doctest::Approx(0.0));
  const auto mc = mc_exit_time(disk, V{0.3, 0.1}, 2, 10000, 2e-4);
  CHECK(std::abs(mc.mean - exit_time_moment(disk, V{0.3, 0.1})) <= 3 * mc.se + 2e-3);
  CHECK(kind_of([&] { exit_time_moment(square(), V{0.5, 0.5}); }) == ErrorKind::unsupported);
}

TEST_CASE("sigma^2(f) quadrature") {
  const auto spec = square();
  const ContinuumFunction zero = [](std::span<const double>) { return 0.0; };
  const ContinuumFunction one = [](std::span<const double>) { return 1.0; };
  CHECK(sigma_sq_f(spec, zero, 1.0).value == 0.0);

  // Independent oracle: sum over odd modes of 64 / (pi^6 j^2 k^2 (j^2 + k^2)).
  double oracle = 0;
  for (int j = 1; j < 4000; j += 2)
    for (int k = 1; k < 4000; k += 2)
      oracle += 64.0 / (std::pow(pi, 6) * j * j * k * k * (double(j) * j + double(k) * k));
  const auto s1 = sigma_sq_f(spec, one, 1.0);
  CHECK(s1.value == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(sigma_sq_f(spec, one, 0.5).value == doctest::Approx(0.5 * s1.value).epsilon(1e-12));

  const ContinuumFunction bump = [](std::span<const double> x) { return product_bump(x); };
  const auto b = sigma_sq_f(spec, bump, 1.0, 1e-4);
  CHECK(b.relative_change <= 1e-4);
  CHECK(b.value > 0);

  const auto disk = ContinuumGreenSpec::isotropic(unit_ball(2), 2.0);
  CHECK(sigma_sq_f(disk, one, 1.0).value == doctest::Approx(pi / 8).epsilon(1e-6));
}

TEST_CASE("on-diagonal constants and centring") {
  const Eigen::MatrixXd s = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  CHECK(bar_g(s, 4.0) == doctest::Approx(1 / (8 * pi)));
  CHECK(bar_g(2.0 * s, 4.0) == doctest::Approx(0.5 * bar_g(s, 4.0)));
  const double g = 0.1;
  CHECK(centering_m_n(g, std::exp(1.0), 2) == doctest::Approx(std::sqrt(g) * 2.0));
  CHECK(homogeneous_log_coefficient(1.0) == doctest::Approx(1 / (2 * pi)));
  CHECK(product_bump(V{0.5, 0.5}) > 0);
  CHECK(product_bump(V{0.0, 0.5}) == 0.0);
}
