#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snq/distributions.hpp"
#include "snq/rng.hpp"

namespace snq {

// Multivariate shot-noise intensity: all components jump at the same Poisson
// epochs (rate nu) and decay exponentially at per-component rates.
struct ShotNoiseSpec {
  double nu = 1.0;
  std::vector<double> decay;       // r_i > 0
  std::vector<double> lambda0;     // initial level, >= 0 (empty means all zero)
  ShotLawVector shots;

  std::size_t dim() const { return decay.size(); }
  double lambda0_at(std::size_t i) const { return lambda0.empty() ? 0.0 : lambda0[i]; }
  void validate() const;  // throws std::invalid_argument naming the offending field

  static ShotNoiseSpec scalar(double nu, double r, ShotLaw shot, double lambda0 = 0.0);
};

class ShotNoisePath {
 public:
  ShotNoisePath(ShotNoiseSpec spec, std::vector<double> epochs,
                std::vector<std::vector<double>> sizes, double horizon);

  const ShotNoiseSpec& spec() const { return spec_; }
  double horizon() const { return horizon_; }
  const std::vector<double>& epochs() const { return epochs_; }
  double shot_size(std::size_t shot, std::size_t component) const {
    return sizes_[shot][component];
  }

  // Exact level by decayed prefix state + O(log) epoch lookup.
  double level_at(double t, std::size_t component = 0) const;
  std::vector<double> level_vector_at(double t) const;

  // Direct evaluation of the defining sum; reference path for tests.
  double level_direct(double t, std::size_t component = 0) const;

  // Header row carries the spec parameters; data rows are (epoch, size_1..size_d).
  void write_csv(std::ostream& os) const;

 private:
  ShotNoiseSpec spec_;
  std::vector<double> epochs_;
  std::vector<std::vector<double>> sizes_;   // per shot, length d
  std::vector<std::vector<double>> state_;   // per component: decayed sum right after epoch k
  double horizon_;
};

ShotNoisePath simulate_path(const ShotNoiseSpec& spec, double horizon, RngStream& rng);

std::vector<double> mean_at(const ShotNoiseSpec& spec, double t);
std::vector<double> variance_at(const ShotNoiseSpec& spec, double t);
std::vector<double> stationary_mean(const ShotNoiseSpec& spec);
std::vector<double> stationary_variance(const ShotNoiseSpec& spec);

// Cov(L(t), L(t+delta)) for a single-component spec.
double autocovariance(const ShotNoiseSpec& spec, double t, double delta);

// Cov(L_1(t), L_2(t+delta)) for a simultaneous-shot 2-component spec with
// lambda0 = 0: e^{-r2 delta} nu E[B1 B2] / (r1+r2) (1 - e^{-(r1+r2)t}).
double cross_covariance(const ShotNoiseSpec& spec, double t, double delta);

}  // namespace snq
