#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rcgff/lattice.hpp"

namespace rcgff {

/// Law of the conductances.
///
/// Text form (used by the CLI, manifests and `describe()`):
///   const:C  exp:RATE  bernoulli:P  uniform:A,B  pareto-inv:Q
///   lines:BASE       one draw per lattice line, every direction
///   lines@K:BASE     one draw per line parallel to axis K; other edges i.i.d.
class LawSpec {
 public:
  enum class Kind : std::uint8_t {
    constant = 0,
    exponential = 1,
    bernoulli = 2,
    uniform = 3,
    pareto_inverse = 4,
    line_correlated = 5,
    explicit_weights = 6,
  };

  static LawSpec constant(double c);
  static LawSpec exponential(double rate);
  static LawSpec bernoulli(double p);
  static LawSpec uniform(double a, double b);
  /// Heavy lower tail: omega = V^(1/q_tail) with V uniform on (0,1], so
  /// P[omega < t] = t^q_tail on [0,1] and E[omega^-q] < inf iff q < q_tail.
  static LawSpec pareto_inverse(double q_tail);
  /// axis = -1 correlates along every lattice line.
  static LawSpec line_correlated(const LawSpec& base, int axis = -1);
  /// Marker for hand-built fields that were not drawn from a law.
  static LawSpec explicit_weights();

  static LawSpec parse(const std::string& text);
  std::string describe() const;

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  int axis() const { return axis_; }
  const LawSpec& base() const { return *base_; }
  bool is_iid() const;

  /// Map a uniform variate u in [0,1) to a draw of the (base) law.
  double sample(double u) const;
  /// Throws a parameter error if the law is malformed.
  void validate() const;

  void write_binary(std::ostream& out) const;
  static LawSpec read_binary(std::istream& in);

  bool operator==(const LawSpec& other) const;

 private:
  LawSpec(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}

  Kind kind_ = Kind::constant;
  double a_ = 1.0;
  double b_ = 0.0;
  int axis_ = -1;
  std::shared_ptr<const LawSpec> base_;
};

/// A random conductance environment on a finite box of Z^d.
///
/// Weights are stored direction-major: edge {x, x+e_i} lives at
/// i * |box| + linear(x). An edge is open iff its weight is > 0. On a free
/// box, slots of edges that would leave the box hold 0 and are not edges of
/// the environment.
class ConductanceField {
 public:
  /// Draw a field. Each edge's value depends only on (law, seed, absolute
  /// edge coordinates), so the environment is stable under box growth.
  static ConductanceField generate(const LawSpec& law, std::vector<int> extents,
                                   std::uint64_t seed,
                                   Boundary boundary = Boundary::free,
                                   Site origin = {});
  /// Wrap explicit weights (direction-major). Used for hand-built fields.
  static ConductanceField from_weights(Lattice lattice,
                                       std::vector<double> weights,
                                       LawSpec law = LawSpec::explicit_weights(),
                                       std::uint64_t seed = 0);

  const Lattice& lattice() const { return lattice_; }
  int dim() const { return lattice_.dim(); }
  const LawSpec& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }
  Boundary boundary() const { return lattice_.boundary(); }

  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t site, int axis) const {
    return weights_[lattice_.edge_index(site, axis)];
  }
  /// Weight of edge {x, x+e_axis}; 0 if the edge is not in the box.
  double weight_at(std::span<const std::int64_t> x, int axis) const;
  /// Number of edges inside the box.
  std::size_t num_edges() const;

  /// Binary ".rcgf" format, see README.
  void write_binary(std::ostream& out) const;
  static ConductanceField read_binary(std::istream& in);
  void save(const std::string& path) const;
  static ConductanceField load(const std::string& path);
  /// CSV: x1..xd,axis,weight for every edge inside the box.
  void write_csv(std::ostream& out) const;

  bool operator==(const ConductanceField& other) const;

 private:
  ConductanceField(Lattice lattice, std::vector<double> weights, LawSpec law,
                   std::uint64_t seed)
      : lattice_(std::move(lattice)),
        weights_(std::move(weights)),
        law_(std::move(law)),
        seed_(seed) {}

  Lattice lattice_;
  std::vector<double> weights_;
  LawSpec law_;
  std::uint64_t seed_ = 0;
};

/// Translate the environment: the output weight at {x, x+e_i} equals the
/// input weight at {x+z, x+z+e_i}. On a torus this wraps; on a free box the
/// output is cropped to the sites x with x+z inside the box.
ConductanceField shift(const ConductanceField& field,
                       std::span<const std::int64_t> z);

/// Empirical moments against the integrability condition
/// E[omega^p] < inf, E[omega^-q 1{open}] < inf, 1/p + 1/q < 2(1-theta)/(d-theta).
struct MomentReport {
  double p = 1.0;
  double q = 1.0;
  double theta = 0.5;
  double mean_omega_p = 0.0;
  double se_omega_p = 0.0;
  /// Average of omega^-q 1{open} over all edges (closed edges contribute 0).
  double mean_inv_omega_q = 0.0;
  double se_inv_omega_q = 0.0;
  double threshold = 0.0;
  /// 2/(d-1): the weaker condition available when every edge is open.
  double lattice_threshold = 0.0;
  bool satisfied = false;
  std::size_t edges = 0;
  std::size_t open_edges = 0;
};

MomentReport moment_report(const ConductanceField& field, double p, double q,
                           double theta);

}  // namespace rcgff
