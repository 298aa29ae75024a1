#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcgff {

/// Monte Carlo estimate: sample mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Welford accumulator. Deterministic when fed in a fixed order.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance (0 for fewer than two samples).
  double variance() const;
  Estimate estimate() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

Estimate estimate_of(std::span<const double> xs);

double normal_cdf(double x);

/// Upper tail P[X >= x] for X ~ chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against the standard normal.
/// The p-value uses the asymptotic Kolmogorov distribution with the
/// Stephens small-sample correction.
KsResult ks_test_standard_normal(std::vector<double> xs);

/// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_sf(double lambda);

/// Least-squares slope and intercept of y against x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace rcgff
