#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace snq {

struct EstimateWithCI {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
};

// Central moments up to order four; mergeable so chunked replications reduce
// deterministically regardless of thread count.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations
  double m3 = 0.0;
  double m4 = 0.0;

  void add(double x);
  void merge(const Moments& o);

  double variance() const { return n > 1 ? m2 / (n - 1.0) : 0.0; }
  double variance_population() const { return n > 0 ? m2 / n : 0.0; }
  double central3() const { return n > 0 ? m3 / n : 0.0; }
  double central4() const { return n > 0 ? m4 / n : 0.0; }
  double se_mean() const;
  // Standard error of the sample variance via the fourth central moment.
  double se_variance() const;
};

Moments moments_of(std::span<const double> xs);

double sample_covariance(std::span<const double> xs, std::span<const double> ys);
// SE of the empirical covariance: sd of the centered products / sqrt(n).
double covariance_se(std::span<const double> xs, std::span<const double> ys);
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Rejection threshold c(alpha) * sqrt((n+m)/(n m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

// Dvoretzky-Kiefer-Wolfowitz band half-width at confidence 1 - alpha.
double dkw_epsilon(std::size_t n, double alpha);

// Chi-square goodness of fit of integer counts against Poisson(mean),
// pooling tail bins so every expected count is >= min_expected.
// Returns true when the test does NOT reject at level alpha.
bool poisson_gof_accepts(std::span<const std::uint64_t> counts, double mean, double alpha,
                         double min_expected = 5.0);

double chi_squared_quantile(double df, double p);
double normal_quantile(double p);

}  // namespace snq
