#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "snq/distributions.hpp"
#include "snq/netsim.hpp"
#include "snq/quadrature.hpp"
#include "snq/shotnoise.hpp"

namespace snq {

struct TransformResult {
  double value = 1.0;
  double error_estimate = 0.0;
};

// Where a job admitted at time u sits at the fixed observation time t.
// p_node(j, u) and p_exit(u) are premultiplied by the tandem's path
// probability; the residual mass 1 - path_prob is the probability the job
// was routed to a different tandem of the same source.
class OccupancyProbabilities {
 public:
  OccupancyProbabilities(const TandemSpec& tandem, double t, double path_prob = 1.0);

  double p_node(std::size_t j, double u) const;  // j in 1..stages
  double p_exit(double u) const;
  std::size_t stages() const { return stages_; }
  double path_prob() const { return path_prob_; }
  double observation_time() const { return t_; }

 private:
  double prefix_cdf(std::size_t j, double x) const;  // CDF of J_1+..+J_j, F_0 = 1{x>=0}
  std::vector<std::shared_ptr<const ConvolvedCdf>> prefix_;
  std::size_t stages_;
  double t_;
  double path_prob_;
};

// f_i(u, z) = (1 - q) + q p_exit(u) + sum_j z_j q p_node(j, u); equals the
// per-arrival PGF factor of one tandem. Equals 1 at z = 1.
double f_tandem(const OccupancyProbabilities& occ, double u, std::span<const double> z);

// Per-arrival factor when one arrival enters every tandem simultaneously and
// service vectors are independent across tandems: the placement sum over all
// joint node assignments factorizes into the product of per-tandem factors.
double f_m2(std::span<const OccupancyProbabilities> tandems, double u,
            const std::vector<std::vector<double>>& z);

// E exp(int_0^t f(u) L(u) du - s L(t)) for a single-component spec and
// piecewise-continuous f: the generic transform behind everything below.
TransformResult generic_transform(const ShotNoiseSpec& spec, const std::function<double(double)>& f,
                                  double t, double s, const QuadratureConfig& quad = {});

// E z^{N(t)} e^{-s L(t)} for the single infinite-server queue (scalar query).
TransformResult joint_transform(const ShotNoiseSpec& spec, const ServiceLaw& service,
                                const TransformQuery& query, const QuadratureConfig& quad = {});

double mean_N(const ShotNoiseSpec& spec, const ServiceLaw& service, double t,
              const QuadratureConfig& quad = {});
double var_N(const ShotNoiseSpec& spec, const ServiceLaw& service, double t,
             const QuadratureConfig& quad = {});

// Closed forms of the exponential-service queue; requires lambda0 = 0.
// The mu = r branch also serves near-equal arguments (relative gap < 1e-6).
std::pair<double, double> exact_mean_var_exponential(const ShotNoiseSpec& spec, double mu, double t);

// A tandem with its path probability; tandems sharing a source split its
// arrivals by these weights (per-source weights must sum to at most 1).
struct WeightedTandem {
  TandemSpec tandem;
  double weight = 1.0;
};

// Joint transform E prod_{ij} z_ij^{N_ij(t)} e^{-<s, L(t)>} for parallel
// tandems driven by a simultaneous-shot multivariate intensity (M1). z is
// indexed tandem-major in declaration order.
TransformResult network_transform_m1(const ShotNoiseSpec& spec,
                                     const std::vector<WeightedTandem>& tandems,
                                     const TransformQuery& query,
                                     const QuadratureConfig& quad = {});

// Same under M2: one scalar intensity generating simultaneous arrivals in
// every tandem (weights must all be 1).
TransformResult network_transform_m2(const ShotNoiseSpec& spec,
                                     const std::vector<WeightedTandem>& tandems,
                                     const TransformQuery& query,
                                     const QuadratureConfig& quad = {});

// Cov(N_1(t), N_2(t)) for a two-node tandem fed by a scalar intensity.
double cov_tandem(const ShotNoiseSpec& spec, const ServiceLaw& service1, const ServiceLaw& service2,
                  double t, const QuadratureConfig& quad = {});

// Cov across two parallel single-node tandems under M1 (2-component spec).
double cov_m1(const ShotNoiseSpec& spec, const ServiceLaw& service1, const ServiceLaw& service2,
              double t, const QuadratureConfig& quad = {});

// Cov across two parallel single-node tandems under M2 (scalar spec).
double cov_m2(const ShotNoiseSpec& spec, const ServiceLaw& service1, const ServiceLaw& service2,
              double t, const QuadratureConfig& quad = {});

// Moment extraction from a PGF by one-sided differences at z = 1 (steps h and
// h/2, Richardson extrapolated; h = 1e-4). order 1 gives E N, order 2 gives
// the factorial moment E N(N-1). z > 1 stays outside the validated domain.
double pgf_moments(const std::function<double(double)>& pgf_of_z, int order, double h = 1e-4);

// Two-node loop with exponential(mu) services at both nodes: placement
// probabilities of a job of age `age`, as geometric-weighted Poisson series
// truncated once the remaining tail eta^{m+1}/(1-eta) drops below 1e-10.
double loop_prob_node1(double eta, double mu, double age);
double loop_prob_node2(double eta, double mu, double age);
double loop_prob_exited(double eta, double mu, double age);
// Hyperbolic closed forms of the same series.
double loop_prob_node1_hyperbolic(double eta, double mu, double age);
double loop_prob_node2_hyperbolic(double eta, double mu, double age);
double loop_f(double eta, double mu, double age, double z1, double z2);
// E N_node(t) = int_0^t E L(u) P(node at age t-u) du for the loop system.
double loop_mean_count(const ShotNoiseSpec& spec, double eta, double mu, double t, int node,
                       const QuadratureConfig& quad = {});

}  // namespace snq
