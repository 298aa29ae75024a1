#include "rcgff/environment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "rcgff/errors.hpp"
#include "rcgff/rng.hpp"
#include "rcgff/stats.hpp"

namespace rcgff {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::parameter, "not a number: '" + text + "'");
  }
  require(used == text.size(), ErrorKind::parameter,
          "not a number: '" + text + "'");
  return v;
}

std::uint64_t edge_stream(std::span<const std::int64_t> x, int axis) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(axis) + 0x100);
  for (std::int64_t c : x) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return h;
}

std::uint64_t line_stream(std::span<const std::int64_t> x, int axis) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(axis) + 0x200);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (static_cast<int>(j) == axis) continue;
    h = mix64(h ^ static_cast<std::uint64_t>(x[j]));
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- LawSpec

LawSpec LawSpec::constant(double c) { return {Kind::constant, c, 0}; }
LawSpec LawSpec::exponential(double rate) {
  return {Kind::exponential, rate, 0};
}
LawSpec LawSpec::bernoulli(double p) { return {Kind::bernoulli, p, 0}; }
LawSpec LawSpec::uniform(double a, double b) { return {Kind::uniform, a, b}; }
LawSpec LawSpec::pareto_inverse(double q_tail) {
  return {Kind::pareto_inverse, q_tail, 0};
}
LawSpec LawSpec::explicit_weights() { return {Kind::explicit_weights, 0, 0}; }

LawSpec LawSpec::line_correlated(const LawSpec& base, int axis) {
  LawSpec law(Kind::line_correlated, 0, 0);
  law.axis_ = axis;
  law.base_ = std::make_shared<const LawSpec>(base);
  return law;
}

bool LawSpec::is_iid() const {
  return kind_ != Kind::line_correlated && kind_ != Kind::explicit_weights;
}

void LawSpec::validate() const {
  auto positive = [](double v, const char* what) {
    require(std::isfinite(v) && v > 0, ErrorKind::parameter,
            std::string(what) + " must be finite and > 0");
  };
  switch (kind_) {
    case Kind::constant: positive(a_, "constant conductance"); break;
    case Kind::exponential: positive(a_, "exponential rate"); break;
    case Kind::bernoulli:
      require(a_ >= 0 && a_ <= 1, ErrorKind::parameter,
              "bernoulli p must lie in [0,1]");
      break;
    case Kind::uniform:
      require(std::isfinite(a_) && std::isfinite(b_) && a_ >= 0 && b_ > a_,
              ErrorKind::parameter, "uniform law needs 0 <= a < b");
      break;
    case Kind::pareto_inverse: positive(a_, "pareto-inv tail exponent"); break;
    case Kind::line_correlated:
      require(base_ != nullptr && base_->is_iid(), ErrorKind::parameter,
              "line-correlated law needs an i.i.d. base law");
      base_->validate();
      require(axis_ >= -1, ErrorKind::parameter, "line axis must be >= -1");
      break;
    case Kind::explicit_weights:
      fail(ErrorKind::parameter, "explicit weights cannot be generated");
  }
}

double LawSpec::sample(double u) const {
  switch (kind_) {
    case Kind::constant: return a_;
    case Kind::exponential: return -std::log1p(-u) / a_;
    case Kind::bernoulli: return u < a_ ? 1.0 : 0.0;
    case Kind::uniform: return a_ + (b_ - a_) * u;
    case Kind::pareto_inverse: return std::pow(1.0 - u, 1.0 / a_);
    case Kind::line_correlated: return base_->sample(u);
    case Kind::explicit_weights: break;
  }
  fail(ErrorKind::parameter, "law cannot be sampled");
}

std::string LawSpec::describe() const {
  switch (kind_) {
    case Kind::constant: return "const:" + format_number(a_);
    case Kind::exponential: return "exp:" + format_number(a_);
    case Kind::bernoulli: return "bernoulli:" + format_number(a_);
    case Kind::uniform:
      return "uniform:" + format_number(a_) + "," + format_number(b_);
    case Kind::pareto_inverse: return "pareto-inv:" + format_number(a_);
    case Kind::line_correlated:
      return (axis_ < 0 ? std::string("lines:")
                        : "lines@" + std::to_string(axis_) + ":") +
             base_->describe();
    case Kind::explicit_weights: return "explicit";
  }
  return "?";
}

LawSpec LawSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorKind::parameter,
          "law must look like NAME:PARAMS, got '" + text + "'");
  const std::string name = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  LawSpec law = constant(1);
  if (name == "const" || name == "constant") {
    law = constant(parse_number(rest));
  } else if (name == "exp" || name == "exponential") {
    law = exponential(parse_number(rest));
  } else if (name == "bernoulli") {
    law = bernoulli(parse_number(rest));
  } else if (name == "uniform") {
    const auto comma = rest.find(',');
    require(comma != std::string::npos, ErrorKind::parameter,
            "uniform law needs A,B");
    law = uniform(parse_number(rest.substr(0, comma)),
                  parse_number(rest.substr(comma + 1)));
  } else if (name == "pareto-inv" || name == "pareto_inverse") {
    law = pareto_inverse(parse_number(rest));
  } else if (name == "lines") {
    law = line_correlated(parse(rest), -1);
  } else if (name.rfind("lines@", 0) == 0) {
    law = line_correlated(parse(rest),
                          static_cast<int>(parse_number(name.substr(6))));
  } else {
    fail(ErrorKind::parameter, "unknown law '" + name + "'");
  }
  law.validate();
  return law;
}

void LawSpec::write_binary(std::ostream& out) const {
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(kind_));
  detail::put_le<std::int32_t>(out, axis_);
  detail::put_le<double>(out, a_);
  detail::put_le<double>(out, b_);
  if (kind_ == Kind::line_correlated) base_->write_binary(out);
}

LawSpec LawSpec::read_binary(std::istream& in) {
  const auto kind = detail::get_le<std::uint8_t>(in);
  require(kind <= static_cast<std::uint8_t>(Kind::explicit_weights),
          ErrorKind::io, "bad law kind in binary stream");
  LawSpec law(static_cast<Kind>(kind), 0, 0);
  law.axis_ = detail::get_le<std::int32_t>(in);
  law.a_ = detail::get_le<double>(in);
  law.b_ = detail::get_le<double>(in);
  if (law.kind_ == Kind::line_correlated)
    law.base_ = std::make_shared<const LawSpec>(read_binary(in));
  return law;
}

bool LawSpec::operator==(const LawSpec& other) const {
  if (kind_ != other.kind_ || a_ != other.a_ || b_ != other.b_ ||
      axis_ != other.axis_)
    return false;
  if (kind_ == Kind::line_correlated) return *base_ == *other.base_;
  return true;
}

// --------------------------------------------------------- ConductanceField

ConductanceField ConductanceField::generate(const LawSpec& law,
                                            std::vector<int> extents,
                                            std::uint64_t seed,
                                            Boundary boundary, Site origin) {
  law.validate();
  require(extents.size() >= 2, ErrorKind::parameter, "dimension must be >= 2");
  for (int e : extents)
    require(e >= 2, ErrorKind::parameter, "box extents must be >= 2");
  Lattice lattice(std::move(extents), std::move(origin), boundary);
  const int d = lattice.dim();
  std::vector<double> weights(static_cast<std::size_t>(d) *
                              lattice.num_sites(), 0.0);
  const bool lines = law.kind() == LawSpec::Kind::line_correlated;
  require(!lines || law.axis() < d, ErrorKind::parameter,
          "line axis must be < d");
  Site x;
  for (std::size_t s = 0; s < lattice.num_sites(); ++s) {
    x = lattice.site(s);
    for (int i = 0; i < d; ++i) {
      if (!lattice.has_edge(s, i)) continue;
      double u;
      if (lines && (law.axis() < 0 || law.axis() == i)) {
        u = RandomStream(seed, line_stream(x, i), stream_tag::line).uniform();
      } else {
        u = RandomStream(seed, edge_stream(x, i), stream_tag::edge).uniform();
      }
      weights[lattice.edge_index(s, i)] = law.sample(u);
    }
  }
  return ConductanceField(std::move(lattice), std::move(weights), law, seed);
}

ConductanceField ConductanceField::from_weights(Lattice lattice,
                                                std::vector<double> weights,
                                                LawSpec law,
                                                std::uint64_t seed) {
  require(lattice.dim() >= 2, ErrorKind::parameter, "dimension must be >= 2");
  require(weights.size() ==
              static_cast<std::size_t>(lattice.dim()) * lattice.num_sites(),
          ErrorKind::parameter, "weight count must be d * |box|");
  for (std::size_t s = 0; s < lattice.num_sites(); ++s) {
    for (int i = 0; i < lattice.dim(); ++i) {
      double& w = weights[lattice.edge_index(s, i)];
      require(std::isfinite(w) && w >= 0, ErrorKind::parameter,
              "weights must be finite and >= 0");
      if (!lattice.has_edge(s, i)) w = 0.0;
    }
  }
  return ConductanceField(std::move(lattice), std::move(weights),
                          std::move(law), seed);
}

double ConductanceField::weight_at(std::span<const std::int64_t> x,
                                   int axis) const {
  const auto idx = lattice_.index_of(x);
  if (!idx || axis < 0 || axis >= dim()) return 0.0;
  return weight(*idx, axis);
}

std::size_t ConductanceField::num_edges() const {
  std::size_t count = 0;
  for (std::size_t s = 0; s < lattice_.num_sites(); ++s)
    for (int i = 0; i < dim(); ++i)
      if (lattice_.has_edge(s, i)) ++count;
  return count;
}

void ConductanceField::write_binary(std::ostream& out) const {
  out.write(kMagic, 4);
  detail::put_le<std::uint32_t>(out, kVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim()));
  for (int e : lattice_.extents())
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
  for (std::int64_t o : lattice_.origin()) detail::put_le<std::int64_t>(out, o);
  detail::put_le<std::uint8_t>(out, boundary() == Boundary::torus ? 1 : 0);
  law_.write_binary(out);
  detail::put_le<std::uint64_t>(out, seed_);
  for (double w : weights_) detail::put_le<double>(out, w);
}

ConductanceField ConductanceField::read_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  require(in && std::equal(magic, magic + 4, kMagic), ErrorKind::io,
          "not an RCGF environment file");
  const auto version = detail::get_le<std::uint32_t>(in);
  require(version == kVersion, ErrorKind::io,
          "unsupported RCGF version " + std::to_string(version));
  const auto d = detail::get_le<std::uint32_t>(in);
  require(d >= 2 && d <= 16, ErrorKind::io, "bad dimension in RCGF header");
  std::vector<int> extents(d);
  for (auto& e : extents) e = static_cast<int>(detail::get_le<std::uint32_t>(in));
  Site origin(d);
  for (auto& o : origin) o = detail::get_le<std::int64_t>(in);
  const auto boundary = detail::get_le<std::uint8_t>(in) == 1 ? Boundary::torus
                                                               : Boundary::free;
  LawSpec law = LawSpec::read_binary(in);
  const auto seed = detail::get_le<std::uint64_t>(in);
  Lattice lattice(std::move(extents), std::move(origin), boundary);
  std::vector<double> weights(static_cast<std::size_t>(d) *
                              lattice.num_sites());
  for (auto& w : weights) w = detail::get_le<double>(in);
  return from_weights(std::move(lattice), std::move(weights), std::move(law),
                      seed);
}

void ConductanceField::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path);
  write_binary(out);
}

ConductanceField ConductanceField::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path);
  return read_binary(in);
}

void ConductanceField::write_csv(std::ostream& out) const {
  for (int i = 0; i < dim(); ++i) out << 'x' << (i + 1) << ',';
  out << "axis,weight\n";
  out << std::setprecision(17);
  for (std::size_t s = 0; s < lattice_.num_sites(); ++s) {
    const Site x = lattice_.site(s);
    for (int i = 0; i < dim(); ++i) {
      if (!lattice_.has_edge(s, i)) continue;
      for (auto c : x) out << c << ',';
      out << i << ',' << weight(s, i) << '\n';
    }
  }
}

bool ConductanceField::operator==(const ConductanceField& other) const {
  return lattice_ == other.lattice_ && law_ == other.law_ &&
         seed_ == other.seed_ && weights_ == other.weights_;
}

// ------------------------------------------------------------------- shift

ConductanceField shift(const ConductanceField& field,
                       std::span<const std::int64_t> z) {
  const Lattice& in = field.lattice();
  const int d = in.dim();
  require(static_cast<int>(z.size()) == d, ErrorKind::parameter,
          "shift vector dimension mismatch");
  Lattice out_lattice = in;
  if (in.boundary() == Boundary::free) {
    std::vector<int> extents(d);
    Site origin(d);
    for (int i = 0; i < d; ++i) {
      const std::int64_t len = in.extents()[i] - std::abs(z[i]);
      require(len >= 2, ErrorKind::domain,
              "free-boundary shift leaves the box");
      extents[i] = static_cast<int>(len);
      origin[i] = in.origin()[i] + std::max<std::int64_t>(0, -z[i]);
    }
    out_lattice = Lattice(std::move(extents), std::move(origin), Boundary::free);
  }
  std::vector<double> weights(static_cast<std::size_t>(d) *
                              out_lattice.num_sites(), 0.0);
  Site x;
  for (std::size_t s = 0; s < out_lattice.num_sites(); ++s) {
    x = out_lattice.site(s);
    for (int i = 0; i < d; ++i) x[i] += z[i];
    for (int i = 0; i < d; ++i) {
      if (!out_lattice.has_edge(s, i)) continue;
      weights[out_lattice.edge_index(s, i)] = field.weight_at(x, i);
    }
  }
  return ConductanceField::from_weights(std::move(out_lattice),
                                        std::move(weights), field.law(),
                                        field.seed());
}

// ---------------------------------------------------------- moment report

MomentReport moment_report(const ConductanceField& field, double p, double q,
                           double theta) {
  require(p > 0 && q > 0, ErrorKind::parameter, "moments need p, q > 0");
  require(theta > 0 && theta < 1, ErrorKind::parameter,
          "theta must lie in (0,1)");
  MomentReport r;
  r.p = p;
  r.q = q;
  r.theta = theta;
  const double d = field.dim();
  r.threshold = 2.0 * (1.0 - theta) / (d - theta);
  r.lattice_threshold = 2.0 / (d - 1.0);
  RunningStats pos, neg;
  const Lattice& lat = field.lattice();
  for (std::size_t s = 0; s < lat.num_sites(); ++s) {
    for (int i = 0; i < field.dim(); ++i) {
      if (!lat.has_edge(s, i)) continue;
      const double w = field.weight(s, i);
      ++r.edges;
      pos.add(std::pow(w, p));
      if (w > 0) {
        ++r.open_edges;
        neg.add(std::pow(w, -q));
      } else {
        neg.add(0.0);
      }
    }
  }
  require(r.open_edges > 0, ErrorKind::degenerate_environment,
          "no open edges in the box");
  r.mean_omega_p = pos.mean();
  r.se_omega_p = pos.estimate().se;
  r.mean_inv_omega_q = neg.mean();
  r.se_inv_omega_q = neg.estimate().se;
  r.satisfied = 1.0 / p + 1.0 / q < r.threshold;
  return r;
}

}  // namespace rcgff
