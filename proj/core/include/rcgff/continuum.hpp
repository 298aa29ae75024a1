#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rcgff/domain.hpp"
#include "rcgff/stats.hpp"

namespace rcgff {

// Convention: Brownian motion with covariance t * Sigma^2 at time t has
// generator (1/2) div(Sigma^2 grad). Its Green function on D is the kernel
// of the inverse of -(1/2) div(Sigma^2 grad) with zero boundary values, so
// Sigma^2 = 2I gives the Green function of -Laplace.

struct ContinuumGreenSpec {
  ContinuumDomain domain;
  Eigen::MatrixXd sigma2;
  /// Hard cap on the number of series shells before an accuracy error.
  int max_shells = 0;  // 0 = automatic (depends on d)

  static ContinuumGreenSpec isotropic(ContinuumDomain domain, double s2);
};

int dim(const ContinuumGreenSpec& spec);
bool is_diagonal(const Eigen::MatrixXd& sigma2);

/// Gaussian density with covariance t Sigma^2 evaluated at x - y.
double heat_kernel(const Eigen::MatrixXd& sigma2, double t,
                   std::span<const double> x, std::span<const double> y);

struct SeriesValue {
  double value = 0.0;
  int shells = 0;
};

/// Green function of a rectangle with diagonal Sigma^2, as a sine series
/// over all axes but one and a closed form along the remaining axis. The
/// closed-form axis is the one with the largest scaled separation, so the
/// series converges geometrically. Shells are added until three in a row
/// are bounded by tol relative to the running sum.
SeriesValue green_rectangle_series(const ContinuumGreenSpec& spec,
                                   std::span<const double> x,
                                   std::span<const double> y, double tol);

/// Same series summed over a fixed number of shells.
double green_rectangle_truncated(const ContinuumGreenSpec& spec,
                                 std::span<const double> x,
                                 std::span<const double> y, int shells);

double green_rectangle(const ContinuumGreenSpec& spec,
                       std::span<const double> x, std::span<const double> y,
                       double tol = 1e-12);

/// Image-charge closed form for a ball and isotropic Sigma^2 = s2 I:
/// (2/s2) times the Green function of -Laplace.
double green_ball(const ContinuumGreenSpec& spec, std::span<const double> x,
                  std::span<const double> y, double tol = 1e-12);

/// Dispatch on the domain shape.
double green(const ContinuumGreenSpec& spec, std::span<const double> x,
             std::span<const double> y, double tol = 1e-12);

/// Average of the Green function over the cube y + [-h, h]^d (tensor
/// Gauss-Legendre), for comparison with cell-based Monte Carlo.
double green_cell_average(const ContinuumGreenSpec& spec,
                          std::span<const double> x,
                          std::span<const double> y, double h,
                          double tol = 1e-12);

struct McGreenOptions {
  std::size_t replicas = 100000;
  double step = 1e-4;
  /// Half-width of the cubic cell around y.
  double cell_half_width = 0.02;
  int max_halvings = 4;
  int workers = 1;
};

struct McGreenResult {
  Estimate estimate;
  double step = 0.0;
  int halvings = 0;
  /// True when two successive step sizes agreed within their combined SE.
  bool step_converged = false;
};

/// Euler-Maruyama estimate of the cell average of g_D(x, .) over y's cell.
/// Paths are killed on leaving D, with a Brownian-bridge crossing test per
/// step. The step is halved until successive estimates agree within their
/// combined standard error.
McGreenResult mc_green(const ContinuumGreenSpec& spec,
                       std::span<const double> x, std::span<const double> y,
                       std::uint64_t seed, const McGreenOptions& opts = {});

/// Single-step-size estimate (no halving).
Estimate mc_green_fixed(const ContinuumGreenSpec& spec,
                        std::span<const double> x, std::span<const double> y,
                        std::uint64_t seed, std::size_t replicas, double step,
                        double cell_half_width, int workers = 1);

/// Euler-Maruyama mean exit time (with the same bridge correction).
Estimate mc_exit_time(const ContinuumGreenSpec& spec,
                      std::span<const double> x, std::uint64_t seed,
                      std::size_t replicas, double step, int workers = 1);

/// (R^2 - |x - c|^2) / (s2 d) for a ball and Sigma^2 = s2 I.
double exit_time_moment(const ContinuumGreenSpec& spec,
                        std::span<const double> x);

using ContinuumFunction = std::function<double(std::span<const double>)>;

struct SigmaSqResult {
  double value = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
  double relative_change = 0.0;
};

/// theta * int_D int_D f(x) f(y) g_D(x, y) dx dy, evaluated at two
/// resolutions which must agree to `tol` (relative) or an accuracy error
/// is thrown. Rectangles use the Dirichlet eigenbasis (sum of squared
/// coefficients over eigenvalues); balls in d = 2 use polar coordinates
/// centred at x for the inner integral.
SigmaSqResult sigma_sq_f(const ContinuumGreenSpec& spec,
                         const ContinuumFunction& f, double theta,
                         double tol = 1e-4);

/// 1 / (pi sqrt(det Sigma^2) E[mu]), d = 2.
double bar_g(const Eigen::MatrixXd& sigma2, double mean_mu);

/// sqrt(bar_g) (sqrt(2d) log n - 3/(2 sqrt(2d)) log log n), for n > 1.
double centering_m_n(double bar_g, double n, int d);

/// Log-growth coefficient of the on-diagonal Green function of a ball for
/// constant conductance c in d = 2, from the simple random walk potential
/// kernel (2/pi) log n times the mean holding time 1/(4c).
double homogeneous_log_coefficient(double c);

/// Product bump prod_i exp(-1/(1 - r_i^2)), r_i = (x_i - 0.5)/0.3, zero
/// outside (0.2, 0.8)^d.
double product_bump(std::span<const double> x);

}  // namespace rcgff
