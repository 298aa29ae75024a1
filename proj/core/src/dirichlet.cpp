#include "rcgff/dirichlet.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <ostream>
#include <sstream>

#include "binary_io.hpp"
#include "rcgff/errors.hpp"
#include "rcgff/parallel.hpp"
#include "rcgff/rng.hpp"

namespace rcgff {

DirichletSystem DirichletSystem::assemble(
    std::shared_ptr<const ClusterGraph> cg, const LatticeDomain& domain) {
  require(cg != nullptr, ErrorKind::parameter, "null cluster");
  DirichletSystem sys;
  sys.cg_ = std::move(cg);
  sys.domain_ = domain;
  sys.interior_ = interior_vertices(*sys.cg_, domain);
  require(!sys.interior_.empty(), ErrorKind::domain,
          "domain has no interior cluster sites: " + describe(domain));
  const ClusterGraph& g = *sys.cg_;
  sys.slot_.assign(g.size(), -1);
  for (std::size_t i = 0; i < sys.interior_.size(); ++i)
    sys.slot_[sys.interior_[i]] = static_cast<int>(i);

  const auto n = static_cast<Eigen::Index>(sys.interior_.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sys.interior_.size() * (2 * g.dim() + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vertex v = sys.interior_[i];
    triplets.emplace_back(i, i, g.mu(v));
    const auto nb = g.neighbors(v);
    const auto w = g.neighbor_weights(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const int j = sys.slot_[nb[k]];
      if (j >= 0) triplets.emplace_back(i, j, -w[k]);
    }
  }
  sys.a_.resize(n, n);
  sys.a_.setFromTriplets(triplets.begin(), triplets.end());
  sys.a_.makeCompressed();
  sys.inv_diag_ = sys.a_.diagonal().cwiseInverse();
  return sys;
}

std::optional<int> DirichletSystem::index_of_site(
    std::span<const std::int64_t> x) const {
  const auto v = cg_->vertex_of(x);
  if (!v) return std::nullopt;
  const int i = slot_[*v];
  if (i < 0) return std::nullopt;
  return i;
}

int DirichletSystem::require_index(std::span<const std::int64_t> x) const {
  const auto i = index_of_site(x);
  require(i.has_value(), ErrorKind::membership,
          "site is not an interior cluster site");
  return *i;
}

namespace {

Eigen::VectorXd dense_solve(const Eigen::SparseMatrix<double>& a,
                            const Eigen::VectorXd& b) {
  const Eigen::MatrixXd dense(a);
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  require(llt.info() == Eigen::Success, ErrorKind::numerical,
          "dense Cholesky failed: operator not positive definite");
  return llt.solve(b);
}

}  // namespace

Eigen::VectorXd DirichletSystem::solve(const Eigen::VectorXd& b,
                                       const SolverOptions& opts,
                                       SolveInfo* info) const {
  require(b.size() == static_cast<Eigen::Index>(size()), ErrorKind::parameter,
          "right-hand side has the wrong length");
  require(opts.tol > 0, ErrorKind::parameter, "tolerance must be > 0");
  SolveInfo local;
  SolveInfo& out = info ? *info : local;
  out = {};
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) return x;

  const int cap =
      opts.max_iterations > 0
          ? opts.max_iterations
          : std::max(1, static_cast<int>(std::ceil(
                            20.0 * std::sqrt(static_cast<double>(size())))));
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag_.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(b.size());
  double rz = r.dot(z);
  int it = 0;
  double rel = 1.0;
  while (it < cap) {
    ap.noalias() = a_ * p;
    const double alpha = rz / p.dot(ap);
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    ++it;
    rel = r.norm() / bnorm;
    if (rel <= opts.tol) break;
    z = inv_diag_.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  // Recompute the true residual; the recursive one drifts.
  rel = (b - a_ * x).norm() / bnorm;
  out.iterations = it;
  out.residual = rel;
  if (rel <= opts.tol) return x;

  if (size() <= opts.dense_fallback_cap) {
    x = dense_solve(a_, b);
    out.dense_fallback = true;
    out.residual = (b - a_ * x).norm() / bnorm;
    return x;
  }
  std::ostringstream os;
  os << "conjugate gradients did not converge in " << it
     << " iterations (relative residual " << rel << ", tol " << opts.tol
     << ")";
  fail(ErrorKind::solver, os.str());
}

GreenColumn green_column(const DirichletSystem& sys,
                         std::span<const std::int64_t> y,
                         const SolverOptions& opts) {
  GreenColumn col;
  col.source = sys.require_index(y);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.size()));
  e[col.source] = 1.0;
  col.values = sys.solve(e, opts, &col.info);
  return col;
}

Eigen::MatrixXd green_matrix(const DirichletSystem& sys, std::size_t cap) {
  require(sys.size() <= cap, ErrorKind::size,
          "interior has " + std::to_string(sys.size()) +
              " sites, above the dense cap " + std::to_string(cap) +
              "; use green_column");
  const Eigen::MatrixXd dense(sys.matrix());
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  require(llt.info() == Eigen::Success, ErrorKind::numerical,
          "dense Cholesky failed");
  const auto n = dense.rows();
  Eigen::MatrixXd g = llt.solve(Eigen::MatrixXd::Identity(n, n));
  // Symmetrize away round-off.
  return 0.5 * (g + g.transpose());
}

Eigen::VectorXd mean_exit_time(const DirichletSystem& sys,
                               const SolverOptions& opts, SolveInfo* info) {
  return sys.solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sys.size())),
                   opts, info);
}

std::vector<double> apply_generator(const ClusterGraph& cg,
                                    std::span<const double> f) {
  require(f.size() == cg.size(), ErrorKind::parameter,
          "function length must equal the cluster size");
  std::vector<double> out(cg.size(), 0.0);
  for (std::size_t v = 0; v < cg.size(); ++v) {
    const auto nb = cg.neighbors(static_cast<Vertex>(v));
    const auto w = cg.neighbor_weights(static_cast<Vertex>(v));
    double s = 0;
    for (std::size_t k = 0; k < nb.size(); ++k) s += w[k] * (f[nb[k]] - f[v]);
    out[v] = s;
  }
  return out;
}

double dirichlet_energy(const ClusterGraph& cg, std::span<const double> f,
                        std::span<const double> g) {
  require(f.size() == cg.size() && g.size() == cg.size(),
          ErrorKind::parameter, "function length must equal the cluster size");
  double e = 0;
  for (std::size_t v = 0; v < cg.size(); ++v) {
    const auto nb = cg.neighbors(static_cast<Vertex>(v));
    const auto w = cg.neighbor_weights(static_cast<Vertex>(v));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const auto u = static_cast<std::size_t>(nb[k]);
      if (u <= v) continue;
      e += w[k] * (f[u] - f[v]) * (g[u] - g[v]);
    }
  }
  return e;
}

FieldEnsemble sample_dgff(const DirichletSystem& sys, std::size_t k,
                          std::uint64_t seed, int workers) {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                       Eigen::AMDOrdering<int>>
      llt(sys.matrix());
  require(llt.info() == Eigen::Success, ErrorKind::numerical,
          "sparse Cholesky of the precision matrix failed");
  const auto n = static_cast<Eigen::Index>(sys.size());
  FieldEnsemble ens;
  ens.seed = seed;
  ens.samples.resize(static_cast<Eigen::Index>(k), n);
  // With P A P^T = L L^T, phi = P^T L^{-T} z has covariance A^{-1}.
  parallel_for(k, workers, [&](std::size_t s) {
    RandomStream rng(seed, s, stream_tag::field_sample);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Eigen::VectorXd y = llt.matrixU().solve(z);
    ens.samples.row(static_cast<Eigen::Index>(s)) =
        (llt.permutationPinv() * y).transpose();
  });
  return ens;
}

Eigen::VectorXd test_vector(const DirichletSystem& sys, const TestFunction& f,
                            double n, Discretization mode) {
  require(n > 0, ErrorKind::parameter, "scale n must be > 0");
  const int d = sys.cluster().dim();
  const auto m = static_cast<Eigen::Index>(sys.size());
  Eigen::VectorXd v(m);
  std::vector<double> x(d);
  constexpr int kSub = 4;
  int cells = 1;
  for (int i = 0; i < d; ++i) cells *= kSub;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Site z = sys.site(static_cast<int>(i));
    if (mode == Discretization::point) {
      for (int a = 0; a < d; ++a) x[a] = static_cast<double>(z[a]) / n;
      v[i] = f(x);
      continue;
    }
    // Midpoint rule on a kSub^d subgrid of the cell z/n + [-1/2n, 1/2n]^d.
    double acc = 0;
    for (int c = 0; c < cells; ++c) {
      int rem = c;
      for (int a = 0; a < d; ++a) {
        const int j = rem % kSub;
        rem /= kSub;
        x[a] = (static_cast<double>(z[a]) - 0.5 + (j + 0.5) / kSub) / n;
      }
      acc += f(x);
    }
    v[i] = acc / cells;
  }
  return v;
}

double functional_phi(const DirichletSystem& sys,
                      std::span<const double> sample, const TestFunction& f,
                      double n, Discretization mode) {
  require(sample.size() == sys.size(), ErrorKind::parameter,
          "sample length must equal the interior size");
  const Eigen::VectorXd v = test_vector(sys, f, n, mode);
  const double d = sys.cluster().dim();
  double s = 0;
  for (std::size_t i = 0; i < sample.size(); ++i)
    s += v[static_cast<Eigen::Index>(i)] * sample[i];
  return std::pow(n, d / 2.0 - 1.0 - d) * s;
}

double variance_phi_exact(const DirichletSystem& sys, const TestFunction& f,
                          double n, Discretization mode,
                          const SolverOptions& opts) {
  const Eigen::VectorXd v = test_vector(sys, f, n, mode);
  if (v.squaredNorm() == 0.0) return 0.0;
  const Eigen::VectorXd w = sys.solve(v, opts);
  const double d = sys.cluster().dim();
  return std::pow(n, d - 2.0 - 2.0 * d) * v.dot(w);
}

void write_interior_csv(const DirichletSystem& sys,
                        std::span<const double> values, std::ostream& out) {
  require(values.size() == sys.size(), ErrorKind::parameter,
          "value length must equal the interior size");
  const int d = sys.cluster().dim();
  for (int a = 0; a < d; ++a) out << 'x' << (a + 1) << ',';
  out << "value\n";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Site z = sys.site(static_cast<int>(i));
    for (int a = 0; a < d; ++a) os << z[a] << ',';
    os << values[i] << '\n';
  }
  out << os.str();
}

void write_interior_binary(const DirichletSystem& sys,
                           const Eigen::MatrixXd& rows, std::ostream& out) {
  require(rows.cols() == static_cast<Eigen::Index>(sys.size()),
          ErrorKind::parameter, "row length must equal the interior size");
  const int d = sys.cluster().dim();
  out.write("RCGB", 4);
  detail::put_le<std::uint32_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  detail::put_le<std::uint64_t>(out, sys.size());
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(rows.rows()));
  for (std::size_t i = 0; i < sys.size(); ++i)
    for (std::int64_t c : sys.site(static_cast<int>(i)))
      detail::put_le<std::int64_t>(out, c);
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      detail::put_le<double>(out, rows(r, c));
  require(static_cast<bool>(out), ErrorKind::io, "write failed");
}

}  // namespace rcgff
