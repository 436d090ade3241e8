#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "snq/quadrature.hpp"
#include "snq/rng.hpp"

namespace snq {

// Nonnegative shot-size law B with closed-form Laplace-Stieltjes transform.
struct ShotLaw {
  enum class Kind { Exponential, Deterministic, Gamma };

  static ShotLaw exponential(double mean);
  static ShotLaw deterministic(double value);
  static ShotLaw gamma(double shape, double scale);

  double mean() const;
  double second_moment() const;

  // E e^{-sB}; s < 0 is rejected (transform arguments stay nonnegative for
  // z in (0,1], s >= 0, and the law's analytic continuation is not validated).
  double lst(double s) const;

  double quantile(double u) const;  // u in [0, 1)
  double sample(RngStream& rng) const;

  Kind kind = Kind::Exponential;
  double p1 = 1.0;  // mean / value / shape
  double p2 = 0.0;  // unused / unused / scale
};

// Vector of shot sizes drawn simultaneously at each shot epoch.
// Independent coupling multiplies marginal transforms; comonotone coupling
// drives every component with one shared uniform.
struct ShotLawVector {
  enum class Coupling { Independent, Comonotone };

  std::vector<ShotLaw> components;
  Coupling coupling = Coupling::Independent;

  std::size_t dim() const { return components.size(); }

  // E exp(-sum_i s_i B_i); s_i >= 0, dim(s) must match.
  double joint_lst(std::span<const double> s, const QuadratureConfig& quad = {}) const;

  // E[B_i B_j] under the coupling (quadrature over the shared uniform when comonotone).
  double cross_moment(std::size_t i, std::size_t j, const QuadratureConfig& quad = {}) const;

  std::vector<double> sample(RngStream& rng) const;
};

struct ServiceLaw {
  enum class Kind { Exponential, Deterministic, Uniform, Gamma };

  static ServiceLaw exponential(double rate);
  static ServiceLaw deterministic(double value);
  static ServiceLaw uniform(double upper);  // U(0, upper)
  static ServiceLaw gamma(double shape, double rate);

  double mean() const;
  double cdf(double t) const;
  double survival(double t) const;  // P(J > t); 1 for t < 0
  double sample(RngStream& rng) const;

  // Density is bounded on [0, inf) -- false only for gamma with shape < 1,
  // which restricts its placement in grid convolutions.
  bool bounded_density() const;

  Kind kind = Kind::Exponential;
  double p1 = 1.0;
  double p2 = 0.0;
};

// CDF of J_1 + ... + J_k. Closed forms: pure deterministic shift,
// exponential/gamma mixtures sharing one rate (Gamma sum), distinct-rate
// exponentials (hypoexponential). Anything else falls back to convolution on
// a uniform grid over [0, horizon] with step horizon/2^grid_pow2, composite
// Simpson per point and cubic interpolation between points.
class ConvolvedCdf {
 public:
  // force_grid bypasses the closed forms; used to validate the grid path.
  ConvolvedCdf(std::vector<ServiceLaw> laws, double horizon, int grid_pow2 = 14,
               bool force_grid = false);

  double operator()(double t) const;  // P(sum <= t); throws std::out_of_range past horizon
  bool exact() const { return exact_; }
  double horizon() const { return horizon_; }
  double grid_step() const { return step_; }

 private:
  double eval_exact(double t) const;
  void build_grid(const std::vector<ServiceLaw>& laws);

  enum class ExactForm { None, Atom, Zero, GammaSum, Hypoexponential };
  ExactForm form_ = ExactForm::None;
  bool exact_ = false;
  double horizon_ = 0.0;
  double step_ = 0.0;
  double shift_ = 0.0;  // total of deterministic components
  double gamma_shape_ = 0.0, gamma_rate_ = 0.0;
  std::vector<double> hypo_rates_;
  std::vector<double> hypo_coeffs_;
  std::vector<double> grid_;  // CDF of the non-deterministic part on the grid
};

// One-shot convenience: P(J_1 + ... + J_k <= t) with horizon t.
double conv_cdf(const std::vector<ServiceLaw>& laws, double t);

// Regularized lower incomplete gamma P(a, x) used by the gamma CDFs.
double gamma_cdf(double shape, double rate, double t);

}  // namespace snq
