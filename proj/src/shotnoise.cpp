#include "snq/shotnoise.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "snq/csv.hpp"

namespace snq {

void ShotNoiseSpec::validate() const {
  if (!(nu > 0)) throw std::invalid_argument("shotnoise.nu: must be > 0");
  if (decay.empty()) throw std::invalid_argument("shotnoise.decay: must have at least one component");
  for (double r : decay)
    if (!(r > 0)) throw std::invalid_argument("shotnoise.decay: all rates must be > 0");
  if (!lambda0.empty() && lambda0.size() != decay.size())
    throw std::invalid_argument("shotnoise.lambda0: dimension mismatch with decay");
  for (double l : lambda0)
    if (l < 0) throw std::invalid_argument("shotnoise.lambda0: must be >= 0");
  if (shots.dim() != decay.size())
    throw std::invalid_argument("shotnoise.shots: dimension mismatch with decay");
}

ShotNoiseSpec ShotNoiseSpec::scalar(double nu, double r, ShotLaw shot, double lambda0) {
  ShotNoiseSpec s;
  s.nu = nu;
  s.decay = {r};
  s.lambda0 = {lambda0};
  s.shots.components = {shot};
  s.validate();
  return s;
}

ShotNoisePath::ShotNoisePath(ShotNoiseSpec spec, std::vector<double> epochs,
                             std::vector<std::vector<double>> sizes, double horizon)
    : spec_(std::move(spec)), epochs_(std::move(epochs)), sizes_(std::move(sizes)),
      horizon_(horizon) {
  if (epochs_.size() != sizes_.size())
    throw std::invalid_argument("ShotNoisePath: epochs/sizes length mismatch");
  if (!std::is_sorted(epochs_.begin(), epochs_.end()))
    throw std::invalid_argument("ShotNoisePath: epochs must be sorted");
  const std::size_t d = spec_.dim();
  state_.assign(d, std::vector<double>(epochs_.size()));
  for (std::size_t c = 0; c < d; ++c) {
    const double r = spec_.decay[c];
    double s = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < epochs_.size(); ++k) {
      s = s * std::exp(-r * (epochs_[k] - prev)) + sizes_[k][c];
      state_[c][k] = s;
      prev = epochs_[k];
    }
  }
}

double ShotNoisePath::level_at(double t, std::size_t component) const {
  if (t < 0 || t > horizon_)
    throw std::out_of_range("ShotNoisePath::level_at: t outside [0, horizon]");
  const double r = spec_.decay[component];
  double level = spec_.lambda0_at(component) * std::exp(-r * t);
  auto it = std::upper_bound(epochs_.begin(), epochs_.end(), t);
  if (it != epochs_.begin()) {
    const std::size_t k = static_cast<std::size_t>(it - epochs_.begin()) - 1;
    level += state_[component][k] * std::exp(-r * (t - epochs_[k]));
  }
  return level;
}

std::vector<double> ShotNoisePath::level_vector_at(double t) const {
  std::vector<double> out(spec_.dim());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = level_at(t, c);
  return out;
}

double ShotNoisePath::level_direct(double t, std::size_t component) const {
  if (t < 0 || t > horizon_)
    throw std::out_of_range("ShotNoisePath::level_direct: t outside [0, horizon]");
  const double r = spec_.decay[component];
  double level = spec_.lambda0_at(component) * std::exp(-r * t);
  for (std::size_t k = 0; k < epochs_.size() && epochs_[k] <= t; ++k)
    level += sizes_[k][component] * std::exp(-r * (t - epochs_[k]));
  return level;
}

void ShotNoisePath::write_csv(std::ostream& os) const {
  os << "# nu=" << fmt_double(spec_.nu) << " horizon=" << fmt_double(horizon_);
  for (std::size_t c = 0; c < spec_.dim(); ++c)
    os << " r" << c + 1 << "=" << fmt_double(spec_.decay[c]) << " lambda0_" << c + 1 << "="
       << fmt_double(spec_.lambda0_at(c));
  os << "\n";
  os << "epoch";
  for (std::size_t c = 0; c < spec_.dim(); ++c) os << ",size_" << c + 1;
  os << "\n";
  for (std::size_t k = 0; k < epochs_.size(); ++k) {
    os << fmt_double(epochs_[k]);
    for (std::size_t c = 0; c < spec_.dim(); ++c) os << "," << fmt_double(sizes_[k][c]);
    os << "\n";
  }
}

ShotNoisePath simulate_path(const ShotNoiseSpec& spec, double horizon, RngStream& rng) {
  if (!(horizon > 0)) throw std::invalid_argument("simulate_path: horizon must be > 0");
  std::vector<double> epochs;
  std::vector<std::vector<double>> sizes;
  double t = rng.exponential(spec.nu);
  while (t <= horizon) {
    epochs.push_back(t);
    sizes.push_back(spec.shots.sample(rng));
    t += rng.exponential(spec.nu);
  }
  return ShotNoisePath(spec, std::move(epochs), std::move(sizes), horizon);
}

std::vector<double> mean_at(const ShotNoiseSpec& spec, double t) {
  std::vector<double> out(spec.dim());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double r = spec.decay[c];
    const double eb = spec.shots.components[c].mean();
    out[c] = spec.lambda0_at(c) * std::exp(-r * t) - spec.nu * eb / r * std::expm1(-r * t);
  }
  return out;
}

std::vector<double> variance_at(const ShotNoiseSpec& spec, double t) {
  std::vector<double> out(spec.dim());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double r = spec.decay[c];
    const double eb2 = spec.shots.components[c].second_moment();
    out[c] = -spec.nu * eb2 / (2.0 * r) * std::expm1(-2.0 * r * t);
  }
  return out;
}

std::vector<double> stationary_mean(const ShotNoiseSpec& spec) {
  std::vector<double> out(spec.dim());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = spec.nu * spec.shots.components[c].mean() / spec.decay[c];
  return out;
}

std::vector<double> stationary_variance(const ShotNoiseSpec& spec) {
  std::vector<double> out(spec.dim());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = spec.nu * spec.shots.components[c].second_moment() / (2.0 * spec.decay[c]);
  return out;
}

double autocovariance(const ShotNoiseSpec& spec, double t, double delta) {
  if (spec.dim() != 1)
    throw std::invalid_argument("autocovariance: spec must be single-component; "
                                "use cross_covariance for coupled components");
  if (delta < 0) throw std::invalid_argument("autocovariance: delta must be >= 0");
  return std::exp(-spec.decay[0] * delta) * variance_at(spec, t)[0];
}

double cross_covariance(const ShotNoiseSpec& spec, double t, double delta) {
  if (spec.dim() != 2)
    throw std::invalid_argument("cross_covariance: spec must have exactly two components");
  if (delta < 0) throw std::invalid_argument("cross_covariance: delta must be >= 0");
  for (std::size_t c = 0; c < 2; ++c)
    if (spec.lambda0_at(c) != 0.0)
      throw std::invalid_argument("cross_covariance: requires lambda0 = 0");
  const double r1 = spec.decay[0], r2 = spec.decay[1];
  const double ebb = spec.shots.cross_moment(0, 1);
  return std::exp(-r2 * delta) * spec.nu * ebb / (r1 + r2) * -std::expm1(-(r1 + r2) * t);
}

}  // namespace snq
