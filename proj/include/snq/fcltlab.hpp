#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "snq/quadrature.hpp"
#include "snq/shotnoise.hpp"
#include "snq/stats.hpp"

namespace snq {

// Heavy-traffic experiment: scale the shot rate nu -> n nu and study the
// centered, sqrt(n)-normalized job count of the exponential-service queue.
struct ScalingExperiment {
  ShotNoiseSpec base_spec;       // scalar, lambda0 = 0
  double mu = 1.0;               // exponential service rate
  std::vector<int> n_values;     // sorted increasing
  double horizon = 1.0;
  std::uint64_t reps = 1000;
  std::vector<double> time_grid;
  std::uint64_t event_budget = 500'000'000;

  void validate() const;
};

struct LimitProcessParams {
  double sigma_lambda = 0.0;  // sqrt(nu E B^2 / (2 r)): stationary sd of the intensity limit
  double r = 1.0;
  double mu = 1.0;
  std::function<double(double)> rho;             // fluid path
  std::function<double(double)> mean_intensity;  // E L(u)
};

LimitProcessParams limit_params(const ShotNoiseSpec& spec, double mu);

// Solution of rho' = E L(t) - mu rho by integrating factor; for rho0 = 0 this
// is the exponential-service transient mean.
std::function<double(double)> fluid_path(const ShotNoiseSpec& spec, double mu, double rho0);

// Row per replication, column per grid point: sqrt(n) (N_n(t)/n - rho(t)).
std::vector<std::vector<double>> simulate_scaled(const ScalingExperiment& exp, int n,
                                                 std::uint64_t master_seed, int threads = 1);

// Euler-Maruyama co-simulation of (L_hat, N_hat) driven by independent
// Brownian motions; rows are replications over the grid.
std::vector<std::vector<double>> simulate_limit(const LimitProcessParams& params,
                                                const std::vector<double>& grid, std::uint64_t reps,
                                                double delta, std::uint64_t master_seed,
                                                int threads = 1);

// Variance of the integrated intensity fluctuation int_0^t L_hat, by
// quadrature of its covariance kernel.
double integrated_ou_variance(const LimitProcessParams& params, double t,
                              const QuadratureConfig& quad = {});

struct ArrivalFcltRow {
  double t = 0.0;
  double empirical_mean = 0.0;
  double mean_se = 0.0;
  double empirical_var = 0.0;
  double limit_var = 0.0;
};

// Centered, scaled arrival count against its limit variance
// int_0^t E L(u) du + Var K_hat(t).
std::vector<ArrivalFcltRow> arrival_fclt_check(const ScalingExperiment& exp, int n,
                                               std::uint64_t master_seed, int threads = 1);

struct ConvergenceRow {
  int n = 0;
  double t_star = 0.0;
  double ks = 0.0;
  double mean_gap = 0.0;
  double var_gap = 0.0;  // relative
};

// Marginal comparison of the scaled system against the simulated limit at the
// selected grid times: two-sample KS distance plus mean/variance gaps.
std::vector<ConvergenceRow> convergence_report(const ScalingExperiment& exp,
                                               const std::vector<double>& t_stars,
                                               std::uint64_t limit_reps, double delta,
                                               std::uint64_t master_seed, int threads = 1);

}  // namespace snq
