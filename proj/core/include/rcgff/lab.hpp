#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rcgff/continuum.hpp"
#include "rcgff/domain.hpp"
#include "rcgff/environment.hpp"

namespace rcgff::lab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Parameters shared by all experiments. Every field can be set from the
/// command line or from a key=value config file (see `set`).
struct ExperimentConfig {
  std::string experiment;
  LawSpec law = LawSpec::constant(1.0);
  int d = 2;
  /// Box side for gen/theta (0 = experiment default).
  int box = 0;
  Boundary boundary = Boundary::free;
  /// "square" is (0,1)^d, "ball" is the unit ball at the origin.
  std::string domain = "square";
  std::vector<int> n_ladder{16, 32, 64};
  double eps = 0.2;
  double delta = 0.3;
  double grid = 0.1;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  /// Diffusive time for walk/sigma/qfclt.
  double t = 1.0;
  /// Exponent of the nu-norm in exit-bound.
  double q = 2.0;
  /// Environments per ladder point in exit-bound.
  int ensemble = 5;
  /// Optional inputs overriding the estimated limit parameters (<= 0: unset).
  double theta = 0.0;
  double sigma2 = 0.0;
  std::string out = "out";
  int threads = 1;

  /// Set one option from its text form. Keys use the long flag names with
  /// '-' or '_' (law, box, d, boundary, domain, n-ladder, eps, delta, grid,
  /// replicas, seed, tol, t, q, ensemble, theta, sigma2, out). Unknown keys
  /// are parameter errors.
  void set(const std::string& key, const std::string& value);
  /// Apply a key=value file; '#' starts a comment.
  void load_file(const std::string& path);
  void validate() const;
  ContinuumDomain continuum_domain() const;
  /// Deterministic key=value listing (threads and output path excluded).
  std::string canonical() const;
};

/// Pairs (x, y) on the sub-grid of spacing `grid` with |x - y|_2 >= eps and
/// both points at distance >= delta from the boundary.
struct KPair {
  std::vector<double> x;
  std::vector<double> y;
};
std::vector<KPair> kgrid(const ContinuumDomain& domain, double eps,
                         double delta, double grid);
/// True when the pair satisfies both constraints (with 1e-12 slack for the
/// decimal grid).
bool in_k(const ContinuumDomain& domain, const KPair& p, double eps,
          double delta);

/// Limit parameters for a law, with their provenance.
struct LimitParameters {
  double theta = 1.0;
  std::string theta_source;
  Eigen::MatrixXd sigma2;
  std::string sigma2_source;
};
LimitParameters limit_parameters(const ExperimentConfig& cfg);

// ----------------------------------------------------------------- results

struct LcltRow {
  int n = 0;
  std::size_t pairs = 0;
  double sup_abs = 0.0;
  /// max over pairs of |error| / (g_D(x,y)/theta)
  double sup_rel = 0.0;
  double mean_abs = 0.0;
};
struct LcltResult {
  LimitParameters limit;
  std::vector<LcltRow> rows;
};
LcltResult lclt_experiment(const ExperimentConfig& cfg);

struct CovScaleRow {
  int n = 0;
  std::size_t pairs = 0;
  std::size_t within_4se = 0;
  double max_abs_z = 0.0;
  /// sup over pairs of |n^{d-2} cov - g_D/theta|
  double sup_scaled_error = 0.0;
  double max_mean_z = 0.0;
};
struct CovScaleResult {
  LimitParameters limit;
  std::vector<CovScaleRow> rows;
};
CovScaleResult covariance_scaling_experiment(const ExperimentConfig& cfg);

struct VarLimitRow {
  int n = 0;
  double variance = 0.0;
  double ratio = 0.0;
};
struct VarLimitResult {
  LimitParameters limit;
  SigmaSqResult sigma_sq;
  std::vector<VarLimitRow> rows;
  /// KS test of Phi_n(f) against N(0, Var) at the largest n (replicas
  /// samples); p = 1 when replicas < 50.
  KsResult ks;
};
VarLimitResult variance_limit_experiment(const ExperimentConfig& cfg);

struct OnDiagRow {
  int n = 0;
  double g = 0.0;
};
struct OnDiagResult {
  std::vector<OnDiagRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  /// Homogeneous oracle (constant laws only, 0 otherwise).
  double oracle = 0.0;
  /// Formula value 1/(pi sqrt(det Sigma^2) E[mu]).
  double bar_g_formula = 0.0;
  double mean_mu = 0.0;
  LimitParameters limit;
};
OnDiagResult ondiag2d_experiment(const ExperimentConfig& cfg);

struct ExitBoundRow {
  int n = 0;
  double mean_ratio = 0.0;
  double se_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};
struct ExitBoundResult {
  std::vector<ExitBoundRow> rows;
};
ExitBoundResult exit_bound_experiment(const ExperimentConfig& cfg);

struct Max2dRow {
  int n = 0;
  double mean_max = 0.0;
  double median_centered_empirical = 0.0;
  double median_centered_formula = 0.0;
  double m_n_empirical = 0.0;
  double m_n_formula = 0.0;
  std::vector<double> maxima;
};
struct Max2dResult {
  double bar_g_empirical = 0.0;
  double bar_g_formula = 0.0;
  std::vector<Max2dRow> rows;
};
Max2dResult max2d_experiment(const ExperimentConfig& cfg);

struct QfcltRow {
  int n = 0;
  Eigen::MatrixXd sigma2;
  Eigen::MatrixXd se;
  double chi2 = 0.0;
  double chi2_dof = 0.0;
  double chi2_p = 1.0;
};
struct QfcltResult {
  std::vector<QfcltRow> rows;
};
QfcltResult qfclt_experiment(const ExperimentConfig& cfg);

/// Dispatch a CLI experiment by name; writes into cfg.out. Returns the list
/// of files written.
std::vector<std::string> run(const ExperimentConfig& cfg);

/// Names accepted by `run`.
const std::vector<std::string>& experiment_names();

}  // namespace rcgff::lab
