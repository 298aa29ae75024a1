#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rcgff/cluster.hpp"
#include "rcgff/domain.hpp"

namespace rcgff {

/// How a linear solve finished.
struct SolveInfo {
  int iterations = 0;
  /// Final relative residual |b - A x| / |b|.
  double residual = 0.0;
  bool dense_fallback = false;
};

struct SolverOptions {
  double tol = 1e-10;
  /// Iteration cap; 0 means 20 * sqrt(N).
  int max_iterations = 0;
  /// Largest interior for which a failed CG run may fall back to dense
  /// Cholesky.
  std::size_t dense_fallback_cap = 4096;
};

/// The negative generator restricted to the interior of a lattice domain,
/// with zero exterior values.
///
/// Interior vertices are stored in increasing cluster-vertex order, which
/// is lexicographic site order. Row x of the operator has diagonal mu(x)
/// and -omega({x,y}) for every interior neighbour y; couplings to exterior
/// neighbours only feed the diagonal.
class DirichletSystem {
 public:
  static DirichletSystem assemble(std::shared_ptr<const ClusterGraph> cg,
                                  const LatticeDomain& domain);

  const ClusterGraph& cluster() const { return *cg_; }
  std::shared_ptr<const ClusterGraph> cluster_ptr() const { return cg_; }
  const LatticeDomain& domain() const { return domain_; }

  std::size_t size() const { return interior_.size(); }
  std::span<const Vertex> interior() const { return interior_; }
  /// Interior index of a cluster vertex, or -1.
  int index_of(Vertex v) const { return slot_[v]; }
  std::optional<int> index_of_site(std::span<const std::int64_t> x) const;
  /// Interior index of a site; membership error when it is not interior.
  int require_index(std::span<const std::int64_t> x) const;
  Site site(int i) const { return cg_->coord(interior_[i]); }

  const Eigen::SparseMatrix<double>& matrix() const { return a_; }

  /// Solve A x = b by diagonally preconditioned conjugate gradients.
  /// Falls back to a dense Cholesky factorization when CG stalls and the
  /// interior is small enough; otherwise throws a solver error.
  Eigen::VectorXd solve(const Eigen::VectorXd& b,
                        const SolverOptions& opts = {},
                        SolveInfo* info = nullptr) const;

 private:
  std::shared_ptr<const ClusterGraph> cg_;
  LatticeDomain domain_;
  std::vector<Vertex> interior_;
  std::vector<int> slot_;
  Eigen::SparseMatrix<double> a_;
  Eigen::VectorXd inv_diag_;
};

struct GreenColumn {
  int source = 0;
  /// g(x, source) for every interior index x.
  Eigen::VectorXd values;
  SolveInfo info;
};

GreenColumn green_column(const DirichletSystem& sys,
                         std::span<const std::int64_t> y,
                         const SolverOptions& opts = {});

/// Full inverse by dense Cholesky. Size error above `cap` interior sites.
Eigen::MatrixXd green_matrix(const DirichletSystem& sys,
                             std::size_t cap = 4096);

/// u = A^{-1} 1, the expected exit time of the walk from each interior site.
Eigen::VectorXd mean_exit_time(const DirichletSystem& sys,
                               const SolverOptions& opts = {},
                               SolveInfo* info = nullptr);

/// (L f)(x) = sum_y omega(x,y) (f(y) - f(x)) over the whole cluster.
std::vector<double> apply_generator(const ClusterGraph& cg,
                                    std::span<const double> f);

/// Sum over open edges of omega(e) (grad f)(e) (grad g)(e). f and g are
/// indexed by cluster vertex.
double dirichlet_energy(const ClusterGraph& cg, std::span<const double> f,
                        std::span<const double> g);

/// k samples of the field, sample s occupying row s.
struct FieldEnsemble {
  std::uint64_t seed = 0;
  Eigen::MatrixXd samples;  // k x |interior|
};

/// Exact sampling through a sparse Cholesky factor of the precision
/// matrix. Sample s depends only on (seed, s).
FieldEnsemble sample_dgff(const DirichletSystem& sys, std::size_t k,
                          std::uint64_t seed, int workers = 1);

using TestFunction = std::function<double(std::span<const double>)>;

enum class Discretization { point, cell_average };

/// v_z = f(z/n) (or the average of f over the cell of side 1/n around z/n)
/// for every interior index.
Eigen::VectorXd test_vector(const DirichletSystem& sys, const TestFunction& f,
                            double n,
                            Discretization mode = Discretization::point);

/// n^{d/2-1-d} sum_z f(z/n) phi_z.
double functional_phi(const DirichletSystem& sys,
                      std::span<const double> sample, const TestFunction& f,
                      double n, Discretization mode = Discretization::point);

/// n^{d-2-2d} v^T A^{-1} v, with v the test vector.
double variance_phi_exact(const DirichletSystem& sys, const TestFunction& f,
                          double n,
                          Discretization mode = Discretization::point,
                          const SolverOptions& opts = {});

/// CSV: x1..xd,value over the interior.
void write_interior_csv(const DirichletSystem& sys,
                        std::span<const double> values, std::ostream& out);

/// Binary block: magic "RCGB", u32 version, u32 d, u64 interior size,
/// u64 rows, i64 coordinates (size x d), f64 values (rows x size); little
/// endian throughout.
void write_interior_binary(const DirichletSystem& sys,
                           const Eigen::MatrixXd& rows, std::ostream& out);

}  // namespace rcgff
