#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rcgff/environment.hpp"
#include "rcgff/errors.hpp"
#include "rcgff/rng.hpp"
#include "rcgff/stats.hpp"

using namespace rcgff;

namespace {

bool throws_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_CASE("constant law fills every axis-weight") {
  const auto t = ConductanceField::generate(LawSpec::constant(1.0), {3, 3}, 9,
                                            Boundary::torus);
  REQUIRE(t.weights().size() == 18);
  for (double w : t.weights()) CHECK(w == 1.0);
  // On a free box the slots of edges leaving the box stay closed.
  const auto f = ConductanceField::generate(LawSpec::constant(1.0), {3, 3}, 9);
  for (std::size_t s = 0; s < 9; ++s)
    for (int a = 0; a < 2; ++a)
      CHECK(f.weight(s, a) == (f.lattice().has_edge(s, a) ? 1.0 : 0.0));
}

TEST_CASE("bernoulli(1) opens every edge") {
  const auto f = ConductanceField::generate(LawSpec::bernoulli(1.0), {7, 5}, 3);
  for (std::size_t s = 0; s < f.lattice().num_sites(); ++s)
    for (int a = 0; a < 2; ++a)
      if (f.lattice().has_edge(s, a)) CHECK(f.weight(s, a) > 0);
}

TEST_CASE("exponential(1) sample mean within 3 SE of 1") {
  const auto f = ConductanceField::generate(LawSpec::exponential(1.0), {50, 50}, 42);
  RunningStats rs;
  for (std::size_t s = 0; s < f.lattice().num_sites(); ++s)
    for (int a = 0; a < 2; ++a)
      if (f.lattice().has_edge(s, a)) rs.add(f.weight(s, a));
  const auto e = rs.estimate();
  CHECK(std::abs(e.mean - 1.0) < 3 * e.se);
}

TEST_CASE("generation is deterministic and stable under box growth") {
  const LawSpec law = LawSpec::exponential(1.0);
  const auto a = ConductanceField::generate(law, {10, 10}, 5);
  const auto b = ConductanceField::generate(law, {10, 10}, 5);
  CHECK(a == b);
  const auto big = ConductanceField::generate(law, {20, 17}, 5);
  for (std::size_t s = 0; s < a.lattice().num_sites(); ++s) {
    const Site x = a.lattice().site(s);
    for (int ax = 0; ax < 2; ++ax)
      if (a.lattice().has_edge(s, ax)) CHECK(a.weight(s, ax) == big.weight_at(x, ax));
  }
  const auto c = ConductanceField::generate(law, {10, 10}, 6);
  CHECK_FALSE(a == c);
}

TEST_CASE("invalid laws are parameter errors") {
  CHECK(throws_kind(ErrorKind::parameter, [] { LawSpec::exponential(-1).validate(); }));
  CHECK(throws_kind(ErrorKind::parameter, [] { LawSpec::bernoulli(1.5).validate(); }));
  CHECK(throws_kind(ErrorKind::parameter, [] { LawSpec::parse("nonsense"); }));
  CHECK(throws_kind(ErrorKind::parameter, [] {
    ConductanceField::generate(LawSpec::constant(1), {1, 4}, 1);
  }));
}

TEST_CASE("law text round-trips") {
  for (const char* text : {"const:2", "exp:1", "bernoulli:0.7", "uniform:0.5,2",
                           "lines:exp:1"}) {
    const LawSpec law = LawSpec::parse(text);
    CHECK(LawSpec::parse(law.describe()) == law);
  }
}

TEST_CASE("line-correlated weights are constant along lines") {
  const auto f = ConductanceField::generate(
      LawSpec::line_correlated(LawSpec::exponential(1.0), 0), {8, 6}, 2);
  const Lattice& L = f.lattice();
  for (std::int64_t y = 0; y < 6; ++y)
    for (std::int64_t x = 1; x < 7; ++x)
      CHECK(f.weight_at(Site{x, y}, 0) == f.weight_at(Site{0, y}, 0));
  // different lines differ almost surely
  CHECK(f.weight_at(Site{0, 0}, 0) != f.weight_at(Site{0, 1}, 0));
  (void)L;
}

TEST_CASE("shift: identity, group action and index oracle on a torus") {
  const auto f = ConductanceField::generate(LawSpec::exponential(1.0), {4, 4}, 17,
                                            Boundary::torus);
  CHECK(shift(f, Site{0, 0}) == f);
  const Site u{1, 3}, v{2, 2}, uv{3, 5};
  CHECK(shift(shift(f, u), v) == shift(f, uv));

  const auto g = shift(f, u);
  RandomStream r(99, 0);
  for (int k = 0; k < 5; ++k) {
    const std::int64_t x = r.below(4), y = r.below(4);
    const int axis = static_cast<int>(r.below(2));
    const Site src{(x + u[0]) % 4, (y + u[1]) % 4};
    // direction-major index: axis * |box| + 4 x + y (last axis fastest)
    const std::size_t idx = axis * 16 + 4 * src[0] + src[1];
    CHECK(g.weight_at(Site{x, y}, axis) == f.weights()[idx]);
  }

  auto a = std::vector<double>(f.weights().begin(), f.weights().end());
  auto b = std::vector<double>(g.weights().begin(), g.weights().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("free-boundary shift crops and errors when leaving the box") {
  const auto f = ConductanceField::generate(LawSpec::exponential(1.0), {6, 6}, 4);
  const auto g = shift(f, Site{1, 0});
  CHECK(g.weight_at(Site{0, 2}, 1) == f.weight_at(Site{1, 2}, 1));
  CHECK(throws_kind(ErrorKind::domain, [&] { shift(f, Site{5, 0}); }));
}

TEST_CASE("moment report") {
  const auto c = ConductanceField::generate(LawSpec::constant(1.0), {10, 10}, 1);
  const auto rc = moment_report(c, 2.0, 3.0, 0.5);
  CHECK(rc.mean_omega_p == doctest::Approx(1.0));
  CHECK(rc.mean_inv_omega_q == doctest::Approx(1.0));
  CHECK(rc.threshold == doctest::Approx(2 * (1 - 0.5) / (2 - 0.5)));
  CHECK(rc.satisfied == (1.0 / 2 + 1.0 / 3 < rc.threshold));

  const auto e = ConductanceField::generate(LawSpec::exponential(1.0), {150, 150}, 8);
  const auto re = moment_report(e, 1.0, 0.5, 0.5);
  CHECK(std::abs(re.mean_inv_omega_q - std::sqrt(std::numbers::pi)) <
        3 * re.se_inv_omega_q);

  const auto b = ConductanceField::generate(LawSpec::bernoulli(0.7), {100, 100}, 8);
  const auto rb = moment_report(b, 1.0, 1.0, 0.5);
  CHECK(std::abs(rb.mean_omega_p - 0.7) < 3 * rb.se_omega_p);

  const auto closed = ConductanceField::generate(LawSpec::bernoulli(0.0), {4, 4}, 8);
  CHECK(throws_kind(ErrorKind::degenerate_environment,
                    [&] { moment_report(closed, 1, 1, 0.5); }));
}

TEST_CASE("heavy lower tail: P[omega < t] = t^q_tail near 0") {
  const LawSpec law = LawSpec::pareto_inverse(2.0);
  constexpr int k = 20000;
  int below = 0;
  for (int i = 0; i < k; ++i) below += law.sample((i + 0.5) / k) < 0.1;
  CHECK(below / double(k) == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("i.i.d. draws at neighbouring edges look independent") {
  // 2x2 contingency table of (above median, above median) over 10^4 pairs.
  const auto f = ConductanceField::generate(LawSpec::exponential(1.0), {200, 100}, 23);
  double n[2][2] = {};
  const double med = std::log(2.0);
  for (std::int64_t y = 0; y < 100; ++y)
    for (std::int64_t x = 0; x + 1 < 200; x += 2) {
      const int a = f.weight_at(Site{x, y}, 1) > med;
      const int b = f.weight_at(Site{x + 1, y}, 1) > med;
      n[a][b] += 1;
    }
  const double tot = n[0][0] + n[0][1] + n[1][0] + n[1][1];
  double chi2 = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double e = (n[a][0] + n[a][1]) * (n[0][b] + n[1][b]) / tot;
      chi2 += (n[a][b] - e) * (n[a][b] - e) / e;
    }
  CHECK(chi_square_sf(chi2, 1) > 0.01);
}

TEST_CASE("binary and CSV export") {
  const auto f = ConductanceField::generate(LawSpec::uniform(0.5, 2.0), {5, 4}, 31,
                                            Boundary::torus);
  std::stringstream ss;
  f.write_binary(ss);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "RCGF");
  std::stringstream in(bytes);
  CHECK(ConductanceField::read_binary(in) == f);

  std::ostringstream csv;
  f.write_csv(csv);
  const std::string text = csv.str();
  CHECK(text.rfind("x1,x2,axis,weight\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 40);

  std::stringstream bad("RCGX0000");
  CHECK(throws_kind(ErrorKind::io, [&] { ConductanceField::read_binary(bad); }));
}
