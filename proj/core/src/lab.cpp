#include "rcgff/lab.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "lab_io.hpp"
#include "rcgff/cluster.hpp"
#include "rcgff/dirichlet.hpp"
#include "rcgff/errors.hpp"
#include "rcgff/rng.hpp"
#include "rcgff/stats.hpp"
#include "rcgff/walk.hpp"

namespace rcgff::lab {

using io::num;

// ------------------------------------------------------------------ config

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::parameter, "bad number for " + key + ": '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::parameter, "bad integer for " + key + ": '" + v + "'");
}

std::string normalise_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  return key;
}

}  // namespace

void ExperimentConfig::set(const std::string& raw_key,
                           const std::string& raw_value) {
  const std::string key = normalise_key(trim(raw_key));
  const std::string v = trim(raw_value);
  if (key == "experiment") experiment = v;
  else if (key == "law") law = LawSpec::parse(v);
  else if (key == "box") box = static_cast<int>(parse_int(key, v));
  else if (key == "d") d = static_cast<int>(parse_int(key, v));
  else if (key == "boundary") boundary = parse_boundary(v);
  else if (key == "domain") domain = v;
  else if (key == "n-ladder") {
    n_ladder.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
      n_ladder.push_back(static_cast<int>(parse_int(key, trim(item))));
  } else if (key == "eps") eps = parse_double(key, v);
  else if (key == "delta") delta = parse_double(key, v);
  else if (key == "grid") grid = parse_double(key, v);
  else if (key == "replicas") {
    const long long r = parse_int(key, v);
    require(r >= 1, ErrorKind::parameter, "replicas must be >= 1");
    replicas = static_cast<std::size_t>(r);
  } else if (key == "seed") {
    try {
      std::size_t pos = 0;
      seed = std::stoull(v, &pos);
      require(pos == v.size(), ErrorKind::parameter, "bad seed '" + v + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::parameter, "bad seed '" + v + "'");
    }
  } else if (key == "tol") tol = parse_double(key, v);
  else if (key == "t") t = parse_double(key, v);
  else if (key == "q") q = parse_double(key, v);
  else if (key == "ensemble") ensemble = static_cast<int>(parse_int(key, v));
  else if (key == "theta") theta = parse_double(key, v);
  else if (key == "sigma2") sigma2 = parse_double(key, v);
  else if (key == "out") out = v;
  else if (key == "threads") threads = static_cast<int>(parse_int(key, v));
  else fail(ErrorKind::parameter, "unknown config key '" + raw_key + "'");
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::parameter,
            path + ":" + std::to_string(lineno) + ": expected key=value");
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ExperimentConfig::validate() const {
  law.validate();
  require(d >= 2 && d <= 4, ErrorKind::parameter, "d must lie in [2, 4]");
  require(box >= 0, ErrorKind::parameter, "box must be >= 0");
  require(domain == "square" || domain == "ball", ErrorKind::parameter,
          "domain must be 'square' or 'ball'");
  require(!n_ladder.empty(), ErrorKind::parameter, "n-ladder is empty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    require(n_ladder[i] >= 2, ErrorKind::parameter, "ladder entries must be >= 2");
    if (i)
      require(n_ladder[i] > n_ladder[i - 1], ErrorKind::parameter,
              "n-ladder must be strictly increasing");
  }
  require(eps > 0 && eps < delta, ErrorKind::parameter,
          "need 0 < eps < delta");
  require(grid > 0, ErrorKind::parameter, "grid must be > 0");
  require(replicas >= 1, ErrorKind::parameter, "replicas must be >= 1");
  require(tol > 0, ErrorKind::parameter, "tol must be > 0");
  require(t > 0, ErrorKind::parameter, "t must be > 0");
  require(q >= 1, ErrorKind::parameter, "q must be >= 1");
  require(ensemble >= 1, ErrorKind::parameter, "ensemble must be >= 1");
  require(theta <= 1, ErrorKind::parameter, "theta must be <= 1");
  require(threads >= 0, ErrorKind::parameter, "threads must be >= 0");
}

ContinuumDomain ExperimentConfig::continuum_domain() const {
  if (domain == "ball") return unit_ball(d);
  return unit_cube(d);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "experiment=" << experiment << '\n'
     << "law=" << law.describe() << '\n'
     << "d=" << d << '\n'
     << "box=" << box << '\n'
     << "boundary=" << to_string(boundary) << '\n'
     << "domain=" << domain << '\n'
     << "n-ladder=";
  for (std::size_t i = 0; i < n_ladder.size(); ++i)
    os << (i ? "," : "") << n_ladder[i];
  os << '\n'
     << "eps=" << num(eps) << '\n'
     << "delta=" << num(delta) << '\n'
     << "grid=" << num(grid) << '\n'
     << "replicas=" << replicas << '\n'
     << "seed=" << seed << '\n'
     << "tol=" << num(tol) << '\n'
     << "t=" << num(t) << '\n'
     << "q=" << num(q) << '\n'
     << "ensemble=" << ensemble << '\n'
     << "theta=" << num(theta) << '\n'
     << "sigma2=" << num(sigma2) << '\n';
  return os.str();
}

// ------------------------------------------------------------------- KGrid

bool in_k(const ContinuumDomain& domain, const KPair& p, double eps,
          double delta) {
  constexpr double slack = 1e-12;
  if (!contains(domain, p.x) || !contains(domain, p.y)) return false;
  double dist2 = 0;
  for (std::size_t i = 0; i < p.x.size(); ++i)
    dist2 += (p.x[i] - p.y[i]) * (p.x[i] - p.y[i]);
  return std::sqrt(dist2) >= eps - slack &&
         boundary_distance(domain, p.x) >= delta - slack &&
         boundary_distance(domain, p.y) >= delta - slack;
}

std::vector<KPair> kgrid(const ContinuumDomain& domain, double eps,
                         double delta, double grid) {
  require(eps > 0 && eps < delta, ErrorKind::parameter, "need 0 < eps < delta");
  require(grid > 0, ErrorKind::parameter, "grid must be > 0");
  const auto [lo, hi] = bounding_box(domain);
  const int d = static_cast<int>(lo.size());
  std::vector<std::vector<double>> axis(d);
  for (int i = 0; i < d; ++i) {
    const auto k0 = static_cast<long long>(std::ceil(lo[i] / grid - 1e-9));
    const auto k1 = static_cast<long long>(std::floor(hi[i] / grid + 1e-9));
    for (long long k = k0; k <= k1; ++k)
      axis[i].push_back(std::round(k * grid * 1e9) / 1e9);
  }
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    std::vector<double> p(d);
    for (int i = 0; i < d; ++i) p[i] = axis[i][idx[i]];
    if (contains(domain, p) && boundary_distance(domain, p) >= delta - 1e-12)
      points.push_back(p);
    int j = d - 1;
    while (j >= 0 && ++idx[j] == axis[j].size()) idx[j--] = 0;
    if (j < 0) break;
  }
  std::vector<KPair> pairs;
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      KPair p{points[a], points[b]};
      if (in_k(domain, p, eps, delta)) pairs.push_back(std::move(p));
    }
  return pairs;
}

// -------------------------------------------------------- shared plumbing

namespace {

namespace seeds {
inline std::uint64_t environment(const ExperimentConfig& c) {
  return derive_seed(c.seed, 1);
}
inline std::uint64_t field(const ExperimentConfig& c, std::uint64_t k) {
  return derive_seed(derive_seed(c.seed, 2), k);
}
inline std::uint64_t walk(const ExperimentConfig& c, std::uint64_t k) {
  return derive_seed(derive_seed(c.seed, 3), k);
}
inline std::uint64_t estimate(const ExperimentConfig& c) {
  return derive_seed(c.seed, 4);
}
}  // namespace seeds

bool all_edges_open(const LawSpec& law) {
  switch (law.kind()) {
    case LawSpec::Kind::bernoulli: return law.a() >= 1.0;
    case LawSpec::Kind::uniform: return law.a() > 0.0;
    case LawSpec::Kind::line_correlated: return all_edges_open(law.base());
    default: return true;
  }
}

// Constant conductance value if the law is deterministic, else 0.
double constant_value(const LawSpec& law) {
  switch (law.kind()) {
    case LawSpec::Kind::constant: return law.a();
    case LawSpec::Kind::bernoulli: return law.a() >= 1.0 ? 1.0 : 0.0;
    case LawSpec::Kind::line_correlated: return constant_value(law.base());
    default: return 0.0;
  }
}

// Mean of omega given omega > 0, by quantile midpoints.
double open_mean(const LawSpec& law) {
  constexpr int kN = 20000;
  double s = 0, c = 0;
  for (int i = 0; i < kN; ++i) {
    const double w = law.sample((i + 0.5) / kN);
    if (w > 0) {
      s += w;
      c += 1;
    }
  }
  require(c > 0, ErrorKind::degenerate_environment, "law has no open edges");
  return s / c;
}

struct Scaled {
  std::shared_ptr<const ClusterGraph> cg;
  std::unique_ptr<DirichletSystem> sys;
};

Scaled scaled_system(const ExperimentConfig& cfg, const ContinuumDomain& shape,
                     int n) {
  auto [ext, origin] = box_for(shape, n);
  const auto field = ConductanceField::generate(
      cfg.law, ext, seeds::environment(cfg), Boundary::free, origin);
  Scaled s;
  s.cg = std::make_shared<const ClusterGraph>(
      ClusterGraph::largest_component(field));
  s.sys = std::make_unique<DirichletSystem>(
      DirichletSystem::assemble(s.cg, ScaledDomain{shape, double(n)}));
  return s;
}

SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.tol;
  return o;
}

ContinuumGreenSpec limit_spec(const ExperimentConfig& cfg,
                              const LimitParameters& lp) {
  return {cfg.continuum_domain(), lp.sigma2, 0};
}

std::vector<double> center_point(const ExperimentConfig& cfg) {
  return cfg.domain == "ball" ? std::vector<double>(cfg.d, 0.0)
                              : std::vector<double>(cfg.d, 0.5);
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      s += (s.empty() ? "" : " ") + num(m(i, j));
  return s;
}

void write_manifest(const ExperimentConfig& cfg, const LimitParameters* lp,
                    const std::vector<std::pair<std::string, std::string>>& extra,
                    std::vector<std::string>& written) {
  std::ostringstream os;
  os << "tool=rcgff " << kToolVersion << '\n' << cfg.canonical();
  os << "environment_seed=" << seeds::environment(cfg) << '\n';
  if (lp) {
    os << "theta=" << num(lp->theta) << '\n'
       << "theta_source=" << lp->theta_source << '\n'
       << "sigma2=" << matrix_text(lp->sigma2) << '\n'
       << "sigma2_source=" << lp->sigma2_source << '\n';
  }
  for (const auto& [k, v] : extra) os << k << '=' << v << '\n';
  std::vector<std::string> names;
  for (const auto& p : written)
    names.push_back(std::filesystem::path(p).filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& nm : names) os << "file=" << nm << '\n';
  io::write_file(cfg.out, "manifest.txt", os.str(), written);
}

}  // namespace

LimitParameters limit_parameters(const ExperimentConfig& cfg) {
  LimitParameters lp;
  const int d = cfg.d;
  if (cfg.theta > 0) {
    lp.theta = cfg.theta;
    lp.theta_source = "config";
  } else if (all_edges_open(cfg.law)) {
    lp.theta = 1.0;
    lp.theta_source = "exact (every edge open)";
  } else {
    const int side = d == 2 ? 256 : (d == 3 ? 48 : 20);
    const std::uint64_t s = derive_seed(seeds::estimate(cfg), 1);
    const Estimate e = theta_estimate(cfg.law, std::vector<int>(d, side), 10, s,
                                      Boundary::free, cfg.threads);
    lp.theta = e.mean;
    lp.theta_source = "estimated (box " + std::to_string(side) +
                      ", 10 replicas, seed " + std::to_string(s) +
                      ", se " + num(e.se) + ")";
  }
  const double c = constant_value(cfg.law);
  if (cfg.sigma2 > 0) {
    lp.sigma2 = cfg.sigma2 * Eigen::MatrixXd::Identity(d, d);
    lp.sigma2_source = "config";
  } else if (c > 0) {
    lp.sigma2 = 2.0 * c * Eigen::MatrixXd::Identity(d, d);
    lp.sigma2_source = "exact (2c I for constant conductance c)";
  } else {
    constexpr int kN = 25;
    const std::size_t reps = std::clamp<std::size_t>(cfg.replicas, 2000, 20000);
    const int side = sigma_box_side(kN, 1.0, open_mean(cfg.law)) + 8;
    const std::uint64_t s = derive_seed(seeds::estimate(cfg), 2);
    const auto field = ConductanceField::generate(
        cfg.law, std::vector<int>(d, side), s, Boundary::free,
        Site(d, 0));
    const auto cg = ClusterGraph::largest_component(field);
    const auto est = estimate_sigma(cg, kN, 1.0, reps, s, cfg.threads);
    // Axis-symmetric laws force a diagonal limit; keep the diagonal part.
    lp.sigma2 = est.sigma2.diagonal().asDiagonal();
    lp.sigma2_source = "estimated diagonal (n " + std::to_string(kN) +
                       ", t 1, replicas " + std::to_string(reps) + ", seed " +
                       std::to_string(s) + ")";
  }
  return lp;
}

// ------------------------------------------------------------------- LCLT

namespace {

struct LcltDetail {
  int n;
  KPair pair;
  double discrete_scaled;
  double limit;
};

LcltResult lclt_impl(const ExperimentConfig& cfg,
                     std::vector<LcltDetail>* details) {
  cfg.validate();
  LcltResult res;
  res.limit = limit_parameters(cfg);
  const auto spec = limit_spec(cfg, res.limit);
  const auto pairs = kgrid(cfg.continuum_domain(), cfg.eps, cfg.delta, cfg.grid);
  require(!pairs.empty(), ErrorKind::parameter, "K grid is empty");
  std::vector<double> limit(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    limit[i] = green(spec, pairs[i].x, pairs[i].y) / res.limit.theta;
  for (int n : cfg.n_ladder) {
    const Scaled s = scaled_system(cfg, cfg.continuum_domain(), n);
    const double scale = std::pow(double(n), cfg.d - 2);
    // Cache one solve per projected source.
    std::map<Site, Eigen::VectorXd> columns;
    LcltRow row;
    row.n = n;
    row.pairs = pairs.size();
    double total = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Site px = project(*s.cg, pairs[i].x, n);
      const Site py = project(*s.cg, pairs[i].y, n);
      auto it = columns.find(px);
      if (it == columns.end())
        it = columns
                 .emplace(px, green_column(*s.sys, px, solver_options(cfg)).values)
                 .first;
      const double gd = scale * it->second[s.sys->require_index(py)];
      const double err = std::abs(gd - limit[i]);
      row.sup_abs = std::max(row.sup_abs, err);
      row.sup_rel = std::max(row.sup_rel, err / limit[i]);
      total += err;
      if (details) details->push_back({n, pairs[i], gd, limit[i]});
    }
    row.mean_abs = total / static_cast<double>(pairs.size());
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace

LcltResult lclt_experiment(const ExperimentConfig& cfg) {
  return lclt_impl(cfg, nullptr);
}

// ------------------------------------------------------ covariance scaling

namespace {

struct CovDetail {
  int n;
  KPair pair;
  double solved, empirical, se, z, scaled_error;
};

CovScaleResult cov_impl(const ExperimentConfig& cfg,
                        std::vector<CovDetail>* details) {
  cfg.validate();
  CovScaleResult res;
  res.limit = limit_parameters(cfg);
  const auto spec = limit_spec(cfg, res.limit);
  const auto pairs = kgrid(cfg.continuum_domain(), cfg.eps, cfg.delta, cfg.grid);
  require(!pairs.empty(), ErrorKind::parameter, "K grid is empty");
  const double k = static_cast<double>(cfg.replicas);
  for (std::size_t li = 0; li < cfg.n_ladder.size(); ++li) {
    const int n = cfg.n_ladder[li];
    const Scaled s = scaled_system(cfg, cfg.continuum_domain(), n);
    const auto ens = sample_dgff(*s.sys, cfg.replicas, seeds::field(cfg, li),
                                 cfg.threads);
    std::map<int, Eigen::VectorXd> columns;
    auto column = [&](int idx) -> const Eigen::VectorXd& {
      auto it = columns.find(idx);
      if (it == columns.end()) {
        it = columns.emplace(idx, green_column(*s.sys, s.sys->site(idx),
                                               solver_options(cfg)).values)
                 .first;
      }
      return it->second;
    };
    CovScaleRow row;
    row.n = n;
    row.pairs = pairs.size();
    const double scale = std::pow(double(n), cfg.d - 2);
    for (const auto& p : pairs) {
      const int i = s.sys->require_index(project(*s.cg, p.x, n));
      const int j = s.sys->require_index(project(*s.cg, p.y, n));
      const double gij = column(i)[j];
      const double gii = column(i)[i];
      const double gjj = column(j)[j];
      const double emp = ens.samples.col(i).dot(ens.samples.col(j)) / k;
      const double se = std::sqrt((gii * gjj + gij * gij) / k);
      const double z = (emp - gij) / se;
      if (std::abs(z) <= 4.0) ++row.within_4se;
      row.max_abs_z = std::max(row.max_abs_z, std::abs(z));
      const double serr =
          std::abs(scale * emp - green(spec, p.x, p.y) / res.limit.theta);
      row.sup_scaled_error = std::max(row.sup_scaled_error, serr);
      for (int idx : {i, j}) {
        const double mz = ens.samples.col(idx).mean() /
                          std::sqrt(column(idx)[idx] / k);
        row.max_mean_z = std::max(row.max_mean_z, std::abs(mz));
      }
      if (details) details->push_back({n, p, gij, emp, se, z, serr});
    }
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace

CovScaleResult covariance_scaling_experiment(const ExperimentConfig& cfg) {
  return cov_impl(cfg, nullptr);
}

// -------------------------------------------------------- variance limit

VarLimitResult variance_limit_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  VarLimitResult res;
  res.limit = limit_parameters(cfg);
  const auto spec = limit_spec(cfg, res.limit);
  const ContinuumFunction bump = [](std::span<const double> x) {
    return product_bump(x);
  };
  res.sigma_sq = sigma_sq_f(spec, bump, res.limit.theta, 1e-4);
  for (std::size_t li = 0; li < cfg.n_ladder.size(); ++li) {
    const int n = cfg.n_ladder[li];
    const Scaled s = scaled_system(cfg, cfg.continuum_domain(), n);
    const double v =
        variance_phi_exact(*s.sys, bump, n, Discretization::point,
                           solver_options(cfg));
    res.rows.push_back({n, v, v / res.sigma_sq.value});
    if (li + 1 == cfg.n_ladder.size() && cfg.replicas >= 50) {
      const auto ens = sample_dgff(*s.sys, cfg.replicas, seeds::field(cfg, li),
                                   cfg.threads);
      const Eigen::VectorXd w = test_vector(*s.sys, bump, n);
      const double scale = std::pow(double(n), cfg.d / 2.0 - 1.0 - cfg.d);
      std::vector<double> z(cfg.replicas);
      for (std::size_t r = 0; r < cfg.replicas; ++r)
        z[r] = scale * ens.samples.row(static_cast<Eigen::Index>(r)).dot(w) /
               std::sqrt(v);
      res.ks = ks_test_standard_normal(std::move(z));
    }
  }
  return res;
}

// --------------------------------------------------------- on-diagonal 2d

OnDiagResult ondiag2d_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.d == 2, ErrorKind::parameter, "ondiag2d needs d = 2");
  OnDiagResult res;
  res.limit = limit_parameters(cfg);
  std::vector<double> logn, g;
  const std::vector<double> origin(2, 0.0);
  double mu_sum = 0;
  std::size_t mu_count = 0;
  for (int n : cfg.n_ladder) {
    const Scaled s = scaled_system(cfg, unit_ball(2), n);
    const Site c = project(*s.cg, origin, n);
    const auto col = green_column(*s.sys, c, solver_options(cfg));
    const double v = col.values[s.sys->require_index(c)];
    res.rows.push_back({n, v});
    logn.push_back(std::log(double(n)));
    g.push_back(v);
    if (n == cfg.n_ladder.back()) {
      for (Vertex u : s.sys->interior()) mu_sum += s.cg->mu(u);
      mu_count = s.sys->size();
    }
  }
  if (res.rows.size() >= 2) {
    const auto fit = least_squares(logn, g);
    res.slope = fit.slope;
    res.intercept = fit.intercept;
  }
  const double c = constant_value(cfg.law);
  res.oracle = c > 0 ? homogeneous_log_coefficient(c) : 0.0;
  res.mean_mu = mu_sum / static_cast<double>(mu_count);
  if (c > 0) res.mean_mu = 4.0 * c;
  res.bar_g_formula = bar_g(res.limit.sigma2, res.mean_mu);
  return res;
}

// ---------------------------------------------------------- exit bound

ExitBoundResult exit_bound_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExitBoundResult res;
  const int d = cfg.d;
  for (int n : cfg.n_ladder) {
    RunningStats stats;
    ExitBoundRow row;
    row.n = n;
    row.min_ratio = INFINITY;
    row.max_ratio = -INFINITY;
    // A deterministic law has a single environment.
    const int members = constant_value(cfg.law) > 0 ? 1 : cfg.ensemble;
    for (int e = 0; e < members; ++e) {
      const auto field = ConductanceField::generate(
          cfg.law, std::vector<int>(d, 2 * n + 3),
          derive_seed(seeds::environment(cfg), static_cast<std::uint64_t>(e)),
          Boundary::free, Site(d, -(n + 1)));
      auto cg = std::make_shared<const ClusterGraph>(
          ClusterGraph::largest_component(field));
      const Site center = project(*cg, std::vector<double>(d, 0.0), 1.0);
      const auto sys = DirichletSystem::assemble(cg, ChemicalBall{center, n});
      const Eigen::VectorXd u = mean_exit_time(sys, solver_options(cfg));
      double norm = 0;
      for (Vertex v : sys.interior()) norm += std::pow(cg->nu(v), cfg.q);
      norm = std::pow(norm / static_cast<double>(sys.size()), 1.0 / cfg.q);
      const double ratio = u.maxCoeff() / (norm * double(n) * n);
      stats.add(ratio);
      row.min_ratio = std::min(row.min_ratio, ratio);
      row.max_ratio = std::max(row.max_ratio, ratio);
    }
    row.mean_ratio = stats.mean();
    row.se_ratio = stats.estimate().se;
    res.rows.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------------- max2d

Max2dResult max2d_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.d == 2, ErrorKind::parameter, "max2d needs d = 2");
  Max2dResult res;
  const OnDiagResult od = ondiag2d_experiment(cfg);
  res.bar_g_empirical = od.slope;
  res.bar_g_formula = od.bar_g_formula;
  require(res.bar_g_empirical > 0, ErrorKind::numerical,
          "empirical on-diagonal slope is not positive");
  for (std::size_t li = 0; li < cfg.n_ladder.size(); ++li) {
    const int n = cfg.n_ladder[li];
    const auto field = ConductanceField::generate(
        cfg.law, {2 * n + 1, 2 * n + 1}, seeds::environment(cfg),
        Boundary::free, Site{-n, -n});
    auto cg = std::make_shared<const ClusterGraph>(
        ClusterGraph::largest_component(field));
    const auto sys = DirichletSystem::assemble(
        cg, LatticeBox{{-n + 1, -n + 1}, {n - 1, n - 1}});
    const auto ens = sample_dgff(sys, cfg.replicas, seeds::field(cfg, li),
                                 cfg.threads);
    Max2dRow row;
    row.n = n;
    row.m_n_empirical = centering_m_n(res.bar_g_empirical, n, 2);
    row.m_n_formula = centering_m_n(res.bar_g_formula, n, 2);
    // The closed box contains the zero boundary layer, so M_n >= 0.
    for (Eigen::Index r = 0; r < ens.samples.rows(); ++r)
      row.maxima.push_back(std::max(0.0, ens.samples.row(r).maxCoeff()));
    double sum = 0;
    for (double m : row.maxima) sum += m;
    row.mean_max = sum / static_cast<double>(row.maxima.size());
    std::vector<double> sorted = row.maxima;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = sorted.size();
    const double median =
        k % 2 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
    row.median_centered_empirical = median - row.m_n_empirical;
    row.median_centered_formula = median - row.m_n_formula;
    res.rows.push_back(std::move(row));
  }
  return res;
}

// --------------------------------------------------------------- qfclt

namespace {

struct SigmaRun {
  DiffusivityEstimate est;
  int side;
};

SigmaRun run_sigma(const ExperimentConfig& cfg, int n, std::uint64_t k) {
  const int d = cfg.d;
  int side = sigma_box_side(n, cfg.t, open_mean(cfg.law)) + 8;
  if (cfg.box > side) side = cfg.box;
  const auto field = ConductanceField::generate(
      cfg.law, std::vector<int>(d, side), seeds::environment(cfg),
      cfg.boundary, Site(d, 0));
  const auto cg = ClusterGraph::largest_component(field);
  return {estimate_sigma(cg, n, cfg.t, cfg.replicas, seeds::walk(cfg, k),
                         cfg.threads),
          side};
}

// Chi-square of the whitened first two endpoint coordinates on an 8 x 8
// grid of equiprobable normal cells.
void chi_square(const DiffusivityEstimate& est, int d, QfcltRow& row) {
  constexpr int kBins = 8;
  const Eigen::MatrixXd s2 = est.sigma2.topLeftCorner(2, 2);
  Eigen::LLT<Eigen::MatrixXd> llt(s2);
  require(llt.info() == Eigen::Success, ErrorKind::numerical,
          "estimated covariance is not positive definite");
  std::vector<double> counts(kBins * kBins, 0.0);
  const std::size_t reps = est.endpoints.size() / d;
  Eigen::Vector2d v;
  for (std::size_t r = 0; r < reps; ++r) {
    v << est.endpoints[r * d], est.endpoints[r * d + 1];
    const Eigen::Vector2d z = llt.matrixL().solve(v);
    const int a = std::min(kBins - 1, static_cast<int>(normal_cdf(z[0]) * kBins));
    const int b = std::min(kBins - 1, static_cast<int>(normal_cdf(z[1]) * kBins));
    counts[a * kBins + b] += 1.0;
  }
  const double expected = static_cast<double>(reps) / (kBins * kBins);
  double chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  row.chi2 = chi2;
  row.chi2_dof = kBins * kBins - 1 - 3;
  row.chi2_p = chi_square_sf(chi2, row.chi2_dof);
}

}  // namespace

QfcltResult qfclt_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  QfcltResult res;
  for (std::size_t li = 0; li < cfg.n_ladder.size(); ++li) {
    const SigmaRun sr = run_sigma(cfg, cfg.n_ladder[li], li);
    QfcltRow row;
    row.n = cfg.n_ladder[li];
    row.sigma2 = sr.est.sigma2;
    row.se = sr.est.se;
    chi_square(sr.est, cfg.d, row);
    res.rows.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------- CLI outputs

namespace {

std::vector<std::string> coord_headers(const std::string& prefix, int d) {
  std::vector<std::string> h;
  for (int i = 0; i < d; ++i) h.push_back(prefix + std::to_string(i + 1));
  return h;
}

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> nums(std::span<const double> v) {
  std::vector<std::string> out;
  for (double x : v) out.push_back(num(x));
  return out;
}

std::vector<std::string> sigma_headers(int d) {
  std::vector<std::string> h;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      h.push_back("s" + std::to_string(i + 1) + std::to_string(j + 1));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      h.push_back("se" + std::to_string(i + 1) + std::to_string(j + 1));
  return h;
}

std::vector<std::string> sigma_cells(const Eigen::MatrixXd& s,
                                     const Eigen::MatrixXd& se) {
  std::vector<std::string> c;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = i; j < s.cols(); ++j) c.push_back(num(s(i, j)));
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = i; j < s.cols(); ++j) c.push_back(num(se(i, j)));
  return c;
}

std::vector<std::string> cmd_gen(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const int side = cfg.box > 0 ? cfg.box : 64;
  const auto field = ConductanceField::generate(
      cfg.law, std::vector<int>(cfg.d, side), seeds::environment(cfg),
      cfg.boundary, Site(cfg.d, 0));
  std::ostringstream bin;
  field.write_binary(bin);
  io::write_file(cfg.out, "environment.rcgf", bin.str(), w);
  std::ostringstream csv;
  field.write_csv(csv);
  io::write_file(cfg.out, "environment.csv", csv.str(), w);
  const auto cg = ClusterGraph::largest_component(field);
  io::Csv summary({"law", "d", "side", "edges", "open_edges", "cluster_size",
                   "density"});
  std::size_t open = 0;
  for (double x : field.weights()) open += x > 0;
  summary.row({cfg.law.describe(), std::to_string(cfg.d), std::to_string(side),
               std::to_string(field.num_edges()), std::to_string(open),
               std::to_string(cg.size()), num(cg.density())});
  io::write_file(cfg.out, "summary.csv", summary.str(), w);
  std::ostringstream vc, ec;
  cg.write_vertices_csv(vc);
  cg.write_edges_csv(ec);
  io::write_file(cfg.out, "cluster_vertices.csv", vc.str(), w);
  io::write_file(cfg.out, "cluster_edges.csv", ec.str(), w);
  write_manifest(cfg, nullptr, {}, w);
  return w;
}

std::vector<std::string> cmd_theta(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const int side = cfg.box > 0 ? cfg.box : 128;
  const Estimate e =
      theta_estimate(cfg.law, std::vector<int>(cfg.d, side), static_cast<int>(cfg.replicas),
                     seeds::environment(cfg), cfg.boundary, cfg.threads);
  io::Csv csv({"law", "d", "side", "replicas", "theta", "se"});
  csv.row({cfg.law.describe(), std::to_string(cfg.d), std::to_string(side),
           std::to_string(cfg.replicas), num(e.mean), num(e.se)});
  io::write_file(cfg.out, "theta.csv", csv.str(), w);
  write_manifest(cfg, nullptr, {}, w);
  return w;
}

std::vector<std::string> cmd_green(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const int n = cfg.n_ladder.front();
  const Scaled s = scaled_system(cfg, cfg.continuum_domain(), n);
  const Site src = project(*s.cg, center_point(cfg), n);
  const auto col = green_column(*s.sys, src, solver_options(cfg));
  std::ostringstream csv;
  write_interior_csv(*s.sys, {col.values.data(), static_cast<std::size_t>(col.values.size())}, csv);
  io::write_file(cfg.out, "green.csv", csv.str(), w);
  std::ostringstream bin;
  write_interior_binary(*s.sys, col.values.transpose(), bin);
  io::write_file(cfg.out, "green.rcgb", bin.str(), w);
  io::Csv info({"n", "interior", "iterations", "residual", "dense_fallback",
                "g_source_source"});
  info.row({std::to_string(n), std::to_string(s.sys->size()),
            std::to_string(col.info.iterations), num(col.info.residual),
            col.info.dense_fallback ? "1" : "0",
            num(col.values[col.source])});
  io::write_file(cfg.out, "green_info.csv", info.str(), w);
  write_manifest(cfg, nullptr, {}, w);
  return w;
}

std::vector<std::string> cmd_sample(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const int n = cfg.n_ladder.front();
  const Scaled s = scaled_system(cfg, cfg.continuum_domain(), n);
  const auto ens = sample_dgff(*s.sys, cfg.replicas, seeds::field(cfg, 0), cfg.threads);
  const Eigen::VectorXd first = ens.samples.row(0).transpose();
  std::ostringstream csv;
  write_interior_csv(*s.sys, {first.data(), static_cast<std::size_t>(first.size())}, csv);
  io::write_file(cfg.out, "sample.csv", csv.str(), w);
  std::ostringstream bin;
  write_interior_binary(*s.sys, ens.samples, bin);
  io::write_file(cfg.out, "samples.rcgb", bin.str(), w);
  const Eigen::VectorXd var =
      ens.samples.colwise().squaredNorm().transpose() / static_cast<double>(cfg.replicas);
  std::ostringstream vcsv;
  write_interior_csv(*s.sys, {var.data(), static_cast<std::size_t>(var.size())}, vcsv);
  io::write_file(cfg.out, "sample_variance.csv", vcsv.str(), w);
  write_manifest(cfg, nullptr, {{"field_seed", std::to_string(seeds::field(cfg, 0))}}, w);
  return w;
}

std::vector<std::string> cmd_walk(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const int n = cfg.n_ladder.front();
  const Scaled s = scaled_system(cfg, cfg.continuum_domain(), n);
  const Site x0 = project(*s.cg, center_point(cfg), n);
  const auto traj = simulate(*s.cg, x0, cfg.t * n * n, seeds::walk(cfg, 0));
  std::ostringstream tcsv;
  write_trajectory_csv(*s.cg, traj, tcsv);
  io::write_file(cfg.out, "trajectory.csv", tcsv.str(), w);
  const LatticeDomain dom = ScaledDomain{cfg.continuum_domain(), double(n)};
  const Estimate mc = exit_time_mc(*s.cg, dom, x0, cfg.replicas,
                                   seeds::walk(cfg, 1), cfg.threads);
  const Eigen::VectorXd u = mean_exit_time(*s.sys, solver_options(cfg));
  io::Csv csv({"n", "replicas", "exit_mc", "exit_se", "exit_solve", "z"});
  const double solved = u[s.sys->require_index(x0)];
  csv.row({std::to_string(n), std::to_string(cfg.replicas), num(mc.mean),
           num(mc.se), num(solved), num((mc.mean - solved) / mc.se)});
  io::write_file(cfg.out, "walk_exit.csv", csv.str(), w);
  write_manifest(cfg, nullptr, {}, w);
  return w;
}

std::vector<std::string> cmd_sigma(const ExperimentConfig& cfg, bool qfclt) {
  std::vector<std::string> w;
  std::vector<std::string> header = concat({"n", "t", "replicas", "side"},
                                           sigma_headers(cfg.d));
  if (qfclt) header = concat(header, {"chi2", "dof", "p_value"});
  io::Csv csv(header);
  DiffusivityEstimate last;
  QfcltRow last_row;
  for (std::size_t li = 0; li < cfg.n_ladder.size(); ++li) {
    const SigmaRun sr = run_sigma(cfg, cfg.n_ladder[li], li);
    auto cells = concat({std::to_string(cfg.n_ladder[li]), num(cfg.t),
                         std::to_string(cfg.replicas), std::to_string(sr.side)},
                        sigma_cells(sr.est.sigma2, sr.est.se));
    if (qfclt) {
      QfcltRow row;
      chi_square(sr.est, cfg.d, row);
      cells = concat(cells, {num(row.chi2), num(row.chi2_dof), num(row.chi2_p)});
    }
    csv.row(cells);
    last = sr.est;
  }
  io::write_file(cfg.out, qfclt ? "qfclt.csv" : "sigma.csv", csv.str(), w);
  if (qfclt) {
    // Marginal histogram of the first rescaled coordinate at the largest n.
    constexpr int kBins = 40;
    const double s11 = last.sigma2(0, 0);
    const double lim = 4.0 * std::sqrt(s11);
    std::vector<double> edges, dens(kBins, 0.0);
    for (int i = 0; i <= kBins; ++i) edges.push_back(-lim + 2 * lim * i / kBins);
    const std::size_t reps = last.endpoints.size() / cfg.d;
    for (std::size_t r = 0; r < reps; ++r) {
      const double x = last.endpoints[r * cfg.d];
      const int b = static_cast<int>(std::floor((x + lim) / (2 * lim) * kBins));
      if (b >= 0 && b < kBins) dens[b] += 1.0;
    }
    const double width = 2 * lim / kBins;
    for (double& v : dens) v /= static_cast<double>(reps) * width;
    io::Series overlay{"Gaussian kernel, variance = estimated Sigma^2_11", {}, {}, false};
    for (int i = 0; i <= 200; ++i) {
      const double x = -lim + 2 * lim * i / 200.0;
      overlay.x.push_back(x);
      overlay.y.push_back(std::exp(-x * x / (2 * s11)) /
                          std::sqrt(2 * std::numbers::pi * s11));
    }
    io::Csv h({"left", "right", "density", "kernel_mid"});
    for (int i = 0; i < kBins; ++i) {
      const double mid = 0.5 * (edges[i] + edges[i + 1]);
      h.row({num(edges[i]), num(edges[i + 1]), num(dens[i]),
             num(std::exp(-mid * mid / (2 * s11)) /
                 std::sqrt(2 * std::numbers::pi * s11))});
    }
    io::write_file(cfg.out, "qfclt_histogram.csv", h.str(), w);
    io::write_file(cfg.out, "qfclt_endpoints.svg",
                   io::histogram("Rescaled endpoint, first coordinate (n = " +
                                     std::to_string(last.n) + ")",
                                 edges, dens, &overlay),
                   w);
  }
  write_manifest(cfg, nullptr, {}, w);
  return w;
}

std::vector<std::string> cmd_lclt(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  std::vector<LcltDetail> det;
  const auto res = lclt_impl(cfg, &det);
  io::Csv csv({"n", "pairs", "sup_abs", "sup_rel", "mean_abs"});
  io::Series sa{"sup |error|", {}, {}}, sr{"sup relative error", {}, {}};
  for (const auto& r : res.rows) {
    csv.row({std::to_string(r.n), std::to_string(r.pairs), num(r.sup_abs),
             num(r.sup_rel), num(r.mean_abs)});
    sa.x.push_back(r.n);
    sa.y.push_back(r.sup_abs);
    sr.x.push_back(r.n);
    sr.y.push_back(r.sup_rel);
  }
  io::write_file(cfg.out, "lclt.csv", csv.str(), w);
  io::Csv pc(concat(concat({"n"}, concat(coord_headers("x", cfg.d),
                                         coord_headers("y", cfg.d))),
                    {"discrete_scaled", "limit", "abs_error"}));
  for (const auto& dd : det)
    pc.row(concat(concat({std::to_string(dd.n)},
                         concat(nums(dd.pair.x), nums(dd.pair.y))),
                  {num(dd.discrete_scaled), num(dd.limit),
                   num(std::abs(dd.discrete_scaled - dd.limit))}));
  io::write_file(cfg.out, "lclt_pairs.csv", pc.str(), w);
  io::write_file(cfg.out, "lclt.svg",
                 io::line_plot("Green function local limit: error vs n", "n",
                               "error", {sa, sr}, true),
                 w);
  write_manifest(cfg, &res.limit, {}, w);
  return w;
}

std::vector<std::string> cmd_cov_scale(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  std::vector<CovDetail> det;
  const auto res = cov_impl(cfg, &det);
  io::Csv csv({"n", "pairs", "within_4se", "max_abs_z", "sup_scaled_error",
               "max_mean_z", "samples"});
  for (const auto& r : res.rows)
    csv.row({std::to_string(r.n), std::to_string(r.pairs),
             std::to_string(r.within_4se), num(r.max_abs_z),
             num(r.sup_scaled_error), num(r.max_mean_z),
             std::to_string(cfg.replicas)});
  io::write_file(cfg.out, "cov_scale.csv", csv.str(), w);
  io::Csv pc(concat(concat({"n"}, concat(coord_headers("x", cfg.d),
                                         coord_headers("y", cfg.d))),
                    {"green_solved", "covariance", "se", "z", "scaled_error"}));
  for (const auto& dd : det)
    pc.row(concat(concat({std::to_string(dd.n)},
                         concat(nums(dd.pair.x), nums(dd.pair.y))),
                  {num(dd.solved), num(dd.empirical), num(dd.se), num(dd.z),
                   num(dd.scaled_error)}));
  io::write_file(cfg.out, "cov_scale_pairs.csv", pc.str(), w);
  write_manifest(cfg, &res.limit, {}, w);
  return w;
}

std::vector<std::string> cmd_var_limit(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const auto res = variance_limit_experiment(cfg);
  io::Csv csv({"n", "variance", "sigma_sq", "ratio"});
  io::Series s{"Var / sigma^2", {}, {}};
  for (const auto& r : res.rows) {
    csv.row({std::to_string(r.n), num(r.variance), num(res.sigma_sq.value),
             num(r.ratio)});
    s.x.push_back(r.n);
    s.y.push_back(r.ratio);
  }
  io::write_file(cfg.out, "var_limit.csv", csv.str(), w);
  io::Csv q({"sigma_sq", "coarse", "fine", "relative_change", "ks_statistic",
             "ks_p_value"});
  q.row({num(res.sigma_sq.value), num(res.sigma_sq.coarse),
         num(res.sigma_sq.fine), num(res.sigma_sq.relative_change),
         num(res.ks.statistic), num(res.ks.p_value)});
  io::write_file(cfg.out, "var_limit_summary.csv", q.str(), w);
  io::write_file(cfg.out, "var_limit.svg",
                 io::line_plot("Variance of the field functional vs its limit",
                               "n", "ratio", {s}, true),
                 w);
  write_manifest(cfg, &res.limit, {}, w);
  return w;
}

std::vector<std::string> cmd_ondiag(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const auto res = ondiag2d_experiment(cfg);
  io::Csv csv({"n", "log_n", "g_center"});
  io::Series s{"g(0,0)", {}, {}};
  for (const auto& r : res.rows) {
    csv.row({std::to_string(r.n), num(std::log(double(r.n))), num(r.g)});
    s.x.push_back(r.n);
    s.y.push_back(r.g);
  }
  io::write_file(cfg.out, "ondiag2d.csv", csv.str(), w);
  io::Csv sum({"slope", "intercept", "oracle", "bar_g_formula", "mean_mu",
               "slope_over_oracle", "formula_over_oracle"});
  sum.row({num(res.slope), num(res.intercept), num(res.oracle),
           num(res.bar_g_formula), num(res.mean_mu),
           res.oracle > 0 ? num(res.slope / res.oracle) : "nan",
           res.oracle > 0 ? num(res.bar_g_formula / res.oracle) : "nan"});
  io::write_file(cfg.out, "ondiag2d_summary.csv", sum.str(), w);
  io::write_file(cfg.out, "ondiag2d.svg",
                 io::line_plot("On-diagonal Green function at the ball centre",
                               "n (log scale)", "g", {s}, true),
                 w);
  write_manifest(cfg, &res.limit, {}, w);
  return w;
}

std::vector<std::string> cmd_exit_bound(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const auto res = exit_bound_experiment(cfg);
  io::Csv csv({"n", "q", "ensemble", "mean_ratio", "se_ratio", "min_ratio",
               "max_ratio"});
  io::Series s{"max E[tau] / (|nu|_q n^2)", {}, {}};
  for (const auto& r : res.rows) {
    csv.row({std::to_string(r.n), num(cfg.q),
             std::to_string(constant_value(cfg.law) > 0 ? 1 : cfg.ensemble),
             num(r.mean_ratio), num(r.se_ratio), num(r.min_ratio),
             num(r.max_ratio)});
    s.x.push_back(r.n);
    s.y.push_back(r.mean_ratio);
  }
  io::write_file(cfg.out, "exit_bound.csv", csv.str(), w);
  io::write_file(cfg.out, "exit_bound.svg",
                 io::line_plot("Mean exit time bound ratio", "n", "ratio", {s},
                               true),
                 w);
  write_manifest(cfg, nullptr, {}, w);
  return w;
}

std::vector<std::string> cmd_max2d(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const auto res = max2d_experiment(cfg);
  io::Csv csv({"n", "samples", "mean_max", "m_n_empirical", "m_n_formula",
               "median_centered_empirical", "median_centered_formula"});
  io::Csv samples({"n", "sample", "max"});
  for (const auto& r : res.rows) {
    csv.row({std::to_string(r.n), std::to_string(r.maxima.size()),
             num(r.mean_max), num(r.m_n_empirical), num(r.m_n_formula),
             num(r.median_centered_empirical), num(r.median_centered_formula)});
    for (std::size_t i = 0; i < r.maxima.size(); ++i)
      samples.row({std::to_string(r.n), std::to_string(i), num(r.maxima[i])});
  }
  io::write_file(cfg.out, "max2d.csv", csv.str(), w);
  io::write_file(cfg.out, "max2d_samples.csv", samples.str(), w);
  const auto& last = res.rows.back();
  std::vector<double> c;
  for (double m : last.maxima) c.push_back(m - last.m_n_empirical);
  const auto [mn, mx] = std::minmax_element(c.begin(), c.end());
  constexpr int kBins = 30;
  const double lo = *mn, hi = *mx > *mn ? *mx : *mn + 1.0;
  std::vector<double> edges, dens(kBins, 0.0);
  for (int i = 0; i <= kBins; ++i) edges.push_back(lo + (hi - lo) * i / kBins);
  for (double v : c)
    dens[std::min(kBins - 1, static_cast<int>((v - lo) / (hi - lo) * kBins))] += 1;
  for (double& v : dens)
    v /= static_cast<double>(c.size()) * (hi - lo) / kBins;
  io::write_file(cfg.out, "max2d_hist.svg",
                 io::histogram("M_n - m_n (empirical centring), n = " +
                                   std::to_string(last.n),
                               edges, dens),
                 w);
  write_manifest(cfg, nullptr,
                 {{"bar_g_empirical", num(res.bar_g_empirical)},
                  {"bar_g_formula", num(res.bar_g_formula)}},
                 w);
  return w;
}

std::vector<std::string> cmd_figure1(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const int size = cfg.box > 0 ? cfg.box : 50;
  require(size >= 3, ErrorKind::parameter, "figure1 needs box >= 3");
  const std::vector<std::pair<std::string, LawSpec>> panels{
      {"a_const", LawSpec::constant(1.0)},
      {"b_exp", LawSpec::exponential(1.0)},
      {"c_lines", LawSpec::line_correlated(LawSpec::exponential(1.0))}};
  std::vector<std::vector<double>> grids;
  io::Csv stats({"panel", "law", "center_variance", "se", "g_center",
                 "samples"});
  const std::size_t k = std::min<std::size_t>(cfg.replicas, 2000);
  for (const auto& [name, law] : panels) {
    const auto field = ConductanceField::generate(
        law, {size, size}, seeds::environment(cfg), Boundary::free, Site{0, 0});
    auto cg = std::make_shared<const ClusterGraph>(
        ClusterGraph::largest_component(field));
    const auto sys = DirichletSystem::assemble(
        cg, LatticeBox{{1, 1}, {size - 2, size - 2}});
    // Same noise vector for every panel.
    const auto one = sample_dgff(sys, 1, seeds::field(cfg, 0), 1);
    std::vector<double> grid(static_cast<std::size_t>(size) * size, 0.0);
    for (std::size_t i = 0; i < sys.size(); ++i) {
      const Site z = sys.site(static_cast<int>(i));
      grid[static_cast<std::size_t>(z[1]) * size + static_cast<std::size_t>(z[0])] =
          one.samples(0, static_cast<Eigen::Index>(i));
    }
    grids.push_back(std::move(grid));
    const Site c{size / 2, size / 2};
    const int ci = sys.require_index(c);
    const auto ens = sample_dgff(sys, k, seeds::field(cfg, 1), cfg.threads);
    RunningStats rs;
    for (Eigen::Index r = 0; r < ens.samples.rows(); ++r)
      rs.add(ens.samples(r, ci) * ens.samples(r, ci));
    const auto col = green_column(sys, c, solver_options(cfg));
    const Estimate e = rs.estimate();
    stats.row({name, law.describe(), num(e.mean), num(e.se),
               num(col.values[ci]), std::to_string(k)});
  }
  double amp = 0;
  for (const auto& g : grids)
    for (double v : g) amp = std::max(amp, std::abs(v));
  for (std::size_t p = 0; p < panels.size(); ++p)
    io::write_file(cfg.out, "figure1_" + panels[p].first + ".svg",
                   io::heatmap("DGFF sample, law " + panels[p].second.describe(),
                               grids[p], size, size, -amp, amp),
                   w);
  io::Csv csv({"x1", "x2", "const", "exp", "lines"});
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * size + x;
      csv.row({std::to_string(x), std::to_string(y), num(grids[0][i]),
               num(grids[1][i]), num(grids[2][i])});
    }
  io::write_file(cfg.out, "figure1.csv", csv.str(), w);
  io::write_file(cfg.out, "figure1_stats.csv", stats.str(), w);
  write_manifest(cfg, nullptr, {{"colour_range", num(amp)}}, w);
  return w;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "gen",  "theta",    "green",    "sample",     "walk",  "sigma", "lclt",
      "cov-scale", "var-limit", "ondiag2d", "exit-bound", "max2d", "qfclt",
      "figure1"};
  return names;
}

std::vector<std::string> run(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string& e = cfg.experiment;
  if (e == "gen") return cmd_gen(cfg);
  if (e == "theta") return cmd_theta(cfg);
  if (e == "green") return cmd_green(cfg);
  if (e == "sample") return cmd_sample(cfg);
  if (e == "walk") return cmd_walk(cfg);
  if (e == "sigma") return cmd_sigma(cfg, false);
  if (e == "qfclt") return cmd_sigma(cfg, true);
  if (e == "lclt") return cmd_lclt(cfg);
  if (e == "cov-scale") return cmd_cov_scale(cfg);
  if (e == "var-limit") return cmd_var_limit(cfg);
  if (e == "ondiag2d") return cmd_ondiag(cfg);
  if (e == "exit-bound") return cmd_exit_bound(cfg);
  if (e == "max2d") return cmd_max2d(cfg);
  if (e == "figure1") return cmd_figure1(cfg);
  fail(ErrorKind::parameter, "unknown experiment '" + e + "'");
}

}  // namespace rcgff::lab
