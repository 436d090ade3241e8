#include "snq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace snq {

// ---------------------------------------------------------------- ShotLaw

ShotLaw ShotLaw::exponential(double mean) {
  if (mean <= 0) throw std::invalid_argument("ShotLaw::exponential: mean must be > 0");
  return {Kind::Exponential, mean, 0.0};
}

ShotLaw ShotLaw::deterministic(double value) {
  if (value <= 0) throw std::invalid_argument("ShotLaw::deterministic: value must be > 0");
  return {Kind::Deterministic, value, 0.0};
}

ShotLaw ShotLaw::gamma(double shape, double scale) {
  if (shape <= 0 || scale <= 0) throw std::invalid_argument("ShotLaw::gamma: parameters must be > 0");
  return {Kind::Gamma, shape, scale};
}

double ShotLaw::mean() const {
  switch (kind) {
    case Kind::Exponential:
    case Kind::Deterministic: return p1;
    case Kind::Gamma: return p1 * p2;
  }
  return 0.0;
}

double ShotLaw::second_moment() const {
  switch (kind) {
    case Kind::Exponential: return 2.0 * p1 * p1;
    case Kind::Deterministic: return p1 * p1;
    case Kind::Gamma: return p1 * (p1 + 1.0) * p2 * p2;
  }
  return 0.0;
}

double ShotLaw::lst(double s) const {
  if (s < 0) throw std::domain_error("ShotLaw::lst: argument must be >= 0");
  switch (kind) {
    case Kind::Exponential: return 1.0 / (1.0 + p1 * s);
    case Kind::Deterministic: return std::exp(-p1 * s);
    case Kind::Gamma: return std::pow(1.0 + p2 * s, -p1);
  }
  return 1.0;
}

double ShotLaw::quantile(double u) const {
  if (u < 0.0 || u >= 1.0) throw std::domain_error("ShotLaw::quantile: u must be in [0, 1)");
  switch (kind) {
    case Kind::Exponential: return -p1 * std::log1p(-u);
    case Kind::Deterministic: return p1;
    case Kind::Gamma: return boost::math::gamma_p_inv(p1, u) * p2;
  }
  return 0.0;
}

double ShotLaw::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::Exponential: return -p1 * std::log1p(-rng.uniform01());
    case Kind::Deterministic: return p1;
    case Kind::Gamma: return rng.gamma(p1, 1.0 / p2);
  }
  return 0.0;
}

// ---------------------------------------------------------- ShotLawVector

double ShotLawVector::joint_lst(std::span<const double> s, const QuadratureConfig& quad) const {
  if (s.size() != components.size())
    throw std::invalid_argument("ShotLawVector::joint_lst: dimension mismatch");
  for (double v : s)
    if (v < 0) throw std::domain_error("ShotLawVector::joint_lst: arguments must be >= 0");
  if (coupling == Coupling::Independent) {
    double prod = 1.0;
    for (std::size_t i = 0; i < s.size(); ++i) prod *= components[i].lst(s[i]);
    return prod;
  }
  // Comonotone: B_i = Q_i(U) for one shared uniform U.
  auto integrand = [&](double u) {
    double e = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) e += s[i] * components[i].quantile(u);
    return std::exp(-e);
  };
  return integrate(integrand, 0.0, 1.0, quad).value;
}

double ShotLawVector::cross_moment(std::size_t i, std::size_t j, const QuadratureConfig& quad) const {
  if (i >= dim() || j >= dim()) throw std::out_of_range("ShotLawVector::cross_moment");
  if (i == j) return components[i].second_moment();
  if (coupling == Coupling::Independent) return components[i].mean() * components[j].mean();
  auto integrand = [&](double u) { return components[i].quantile(u) * components[j].quantile(u); };
  return integrate(integrand, 0.0, 1.0, quad).value;
}

std::vector<double> ShotLawVector::sample(RngStream& rng) const {
  std::vector<double> out(components.size());
  if (coupling == Coupling::Independent) {
    for (std::size_t i = 0; i < components.size(); ++i) out[i] = components[i].sample(rng);
  } else {
    double u = rng.uniform01();
    for (std::size_t i = 0; i < components.size(); ++i) out[i] = components[i].quantile(u);
  }
  return out;
}

// -------------------------------------------------------------- ServiceLaw

ServiceLaw ServiceLaw::exponential(double rate) {
  if (rate <= 0) throw std::invalid_argument("ServiceLaw::exponential: rate must be > 0");
  return {Kind::Exponential, rate, 0.0};
}

ServiceLaw ServiceLaw::deterministic(double value) {
  if (value <= 0) throw std::invalid_argument("ServiceLaw::deterministic: value must be > 0");
  return {Kind::Deterministic, value, 0.0};
}

ServiceLaw ServiceLaw::uniform(double upper) {
  if (upper <= 0) throw std::invalid_argument("ServiceLaw::uniform: upper must be > 0");
  return {Kind::Uniform, upper, 0.0};
}

ServiceLaw ServiceLaw::gamma(double shape, double rate) {
  if (shape <= 0 || rate <= 0) throw std::invalid_argument("ServiceLaw::gamma: parameters must be > 0");
  return {Kind::Gamma, shape, rate};
}

double ServiceLaw::mean() const {
  switch (kind) {
    case Kind::Exponential: return 1.0 / p1;
    case Kind::Deterministic: return p1;
    case Kind::Uniform: return 0.5 * p1;
    case Kind::Gamma: return p1 / p2;
  }
  return 0.0;
}

double ServiceLaw::cdf(double t) const {
  if (t < 0) return 0.0;
  switch (kind) {
    case Kind::Exponential: return -std::expm1(-p1 * t);
    case Kind::Deterministic: return t >= p1 ? 1.0 : 0.0;
    case Kind::Uniform: return std::min(t / p1, 1.0);
    case Kind::Gamma: return gamma_cdf(p1, p2, t);
  }
  return 0.0;
}

double ServiceLaw::survival(double t) const {
  if (t < 0) return 1.0;
  switch (kind) {
    case Kind::Exponential: return std::exp(-p1 * t);
    case Kind::Deterministic: return t >= p1 ? 0.0 : 1.0;
    case Kind::Uniform: return std::max(1.0 - t / p1, 0.0);
    case Kind::Gamma: return boost::math::gamma_q(p1, p2 * t);
  }
  return 0.0;
}

double ServiceLaw::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::Exponential: return rng.exponential(p1);
    case Kind::Deterministic: return p1;
    case Kind::Uniform: return p1 * rng.uniform01();
    case Kind::Gamma: return rng.gamma(p1, p2);
  }
  return 0.0;
}

bool ServiceLaw::bounded_density() const {
  return !(kind == Kind::Gamma && p1 < 1.0);
}

double gamma_cdf(double shape, double rate, double t) {
  if (t <= 0) return 0.0;
  return boost::math::gamma_p(shape, rate * t);
}

// ------------------------------------------------------------ ConvolvedCdf

namespace {

double density(const ServiceLaw& law, double x) {
  if (x < 0) return 0.0;
  switch (law.kind) {
    case ServiceLaw::Kind::Exponential: return law.p1 * std::exp(-law.p1 * x);
    case ServiceLaw::Kind::Uniform: return x <= law.p1 ? 1.0 / law.p1 : 0.0;
    case ServiceLaw::Kind::Gamma: {
      // log form avoids overflow in the power term
      double lg = law.p1 * std::log(law.p2) + (law.p1 - 1.0) * std::log(x) - law.p2 * x -
                  std::lgamma(law.p1);
      return std::exp(lg);
    }
    case ServiceLaw::Kind::Deterministic: break;
  }
  throw std::logic_error("density: law has no density");
}

// Composite Simpson weights on j+1 equidistant points (trapezoid for j=1,
// 3/8 rule for j=3, Simpson with a 3/8 tail when j is odd). O(h^4) for j >= 2.
void quad_weights(std::size_t j, double h, std::vector<double>& w) {
  w.assign(j + 1, 0.0);
  if (j == 0) return;
  if (j == 1) {
    w[0] = w[1] = 0.5 * h;
    return;
  }
  std::size_t simpson_end = j;
  if (j % 2 == 1) {
    if (j == 3) {
      const double c = 3.0 * h / 8.0;
      w[0] = c;
      w[1] = w[2] = 3.0 * c;
      w[3] = c;
      return;
    }
    simpson_end = j - 3;  // leave a 3/8 rule tail
  }
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (simpson_end != j) {
    const double c = 3.0 * h / 8.0;
    w[simpson_end] += c;
    w[simpson_end + 1] += 3.0 * c;
    w[simpson_end + 2] += 3.0 * c;
    w[simpson_end + 3] += c;
  }
}

}  // namespace

ConvolvedCdf::ConvolvedCdf(std::vector<ServiceLaw> laws, double horizon, int grid_pow2,
                           bool force_grid)
    : horizon_(horizon) {
  if (laws.empty()) throw std::invalid_argument("ConvolvedCdf: law list must be nonempty");
  if (horizon < 0) throw std::invalid_argument("ConvolvedCdf: horizon must be >= 0");

  std::vector<ServiceLaw> continuous;
  for (const auto& law : laws) {
    if (law.kind == ServiceLaw::Kind::Deterministic)
      shift_ += law.p1;
    else
      continuous.push_back(law);
  }

  if (continuous.empty()) {
    form_ = ExactForm::Atom;
    exact_ = true;
    return;
  }

  // Gamma-sum closed form: every continuous law exponential/gamma on one rate.
  bool gamma_sum = !force_grid;
  double rate = (continuous[0].kind == ServiceLaw::Kind::Uniform) ? -1.0 : continuous[0].p1;
  if (continuous[0].kind == ServiceLaw::Kind::Gamma) rate = continuous[0].p2;
  double shape = 0.0;
  for (const auto& law : continuous) {
    double law_rate, law_shape;
    if (law.kind == ServiceLaw::Kind::Exponential) {
      law_rate = law.p1;
      law_shape = 1.0;
    } else if (law.kind == ServiceLaw::Kind::Gamma) {
      law_rate = law.p2;
      law_shape = law.p1;
    } else {
      gamma_sum = false;
      break;
    }
    if (std::abs(law_rate - rate) > 1e-12 * std::max(law_rate, rate)) {
      gamma_sum = false;
      break;
    }
    shape += law_shape;
  }
  if (gamma_sum) {
    form_ = ExactForm::GammaSum;
    exact_ = true;
    gamma_shape_ = shape;
    gamma_rate_ = rate;
    return;
  }

  // Hypoexponential: all exponential with well-separated rates.
  bool all_exp = !force_grid && std::all_of(continuous.begin(), continuous.end(), [](const ServiceLaw& l) {
    return l.kind == ServiceLaw::Kind::Exponential;
  });
  if (all_exp) {
    bool separated = true;
    for (std::size_t i = 0; i < continuous.size() && separated; ++i)
      for (std::size_t j = i + 1; j < continuous.size(); ++j)
        if (std::abs(continuous[i].p1 - continuous[j].p1) <
            1e-6 * std::max(continuous[i].p1, continuous[j].p1)) {
          separated = false;
          break;
        }
    if (separated) {
      form_ = ExactForm::Hypoexponential;
      exact_ = true;
      for (const auto& l : continuous) hypo_rates_.push_back(l.p1);
      for (std::size_t i = 0; i < hypo_rates_.size(); ++i) {
        double c = 1.0;
        for (std::size_t j = 0; j < hypo_rates_.size(); ++j)
          if (j != i) c *= hypo_rates_[j] / (hypo_rates_[j] - hypo_rates_[i]);
        hypo_coeffs_.push_back(c);
      }
      return;
    }
  }

  if (horizon_ - shift_ <= 0) {
    // every admissible query lies at or below the deterministic shift, where
    // the strictly positive continuous part has mass zero
    form_ = ExactForm::Zero;
    exact_ = true;
    return;
  }
  step_ = (horizon_ - shift_) / static_cast<double>(1 << grid_pow2);
  build_grid(continuous);
}

void ConvolvedCdf::build_grid(const std::vector<ServiceLaw>& laws) {
  // Seed the grid with the CDF of the worst-behaved law (unbounded densities
  // may only appear here), then fold the rest in by their densities.
  std::vector<ServiceLaw> order = laws;
  auto seed_it = std::find_if(order.begin(), order.end(),
                              [](const ServiceLaw& l) { return !l.bounded_density(); });
  if (seed_it != order.end()) std::iter_swap(order.begin(), seed_it);
  if (std::any_of(order.begin() + 1, order.end(),
                  [](const ServiceLaw& l) { return !l.bounded_density(); }))
    throw std::invalid_argument(
        "ConvolvedCdf: at most one gamma law with shape < 1 is supported in grid convolutions");

  const double span = horizon_ - shift_;
  const std::size_t n = static_cast<std::size_t>(std::llround(span / step_));
  grid_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid_[i] = order[0].cdf(static_cast<double>(i) * step_);

  std::vector<double> next(n + 1), dens(n + 1), weights;
  for (std::size_t k = 1; k < order.size(); ++k) {
    for (std::size_t i = 0; i <= n; ++i) dens[i] = density(order[k], static_cast<double>(i) * step_);
    next[0] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      quad_weights(j, step_, weights);
      double acc = 0.0;
      for (std::size_t i = 0; i <= j; ++i) acc += weights[i] * grid_[j - i] * dens[i];
      next[j] = std::min(acc, 1.0);
    }
    grid_.swap(next);
  }
}

double ConvolvedCdf::eval_exact(double t) const {
  switch (form_) {
    case ExactForm::Atom: return t >= 0.0 ? 1.0 : 0.0;
    case ExactForm::Zero: return 0.0;
    case ExactForm::GammaSum: return gamma_cdf(gamma_shape_, gamma_rate_, t);
    case ExactForm::Hypoexponential: {
      if (t <= 0) return 0.0;
      double s = 0.0;
      for (std::size_t i = 0; i < hypo_rates_.size(); ++i)
        s += hypo_coeffs_[i] * std::exp(-hypo_rates_[i] * t);
      return std::clamp(1.0 - s, 0.0, 1.0);
    }
    case ExactForm::None: break;
  }
  throw std::logic_error("ConvolvedCdf::eval_exact");
}

double ConvolvedCdf::operator()(double t) const {
  t -= shift_;
  if (exact_) return eval_exact(t);
  if (t <= 0) return 0.0;
  const double span = static_cast<double>(grid_.size() - 1) * step_;
  if (t > span * (1.0 + 1e-12))
    throw std::out_of_range("ConvolvedCdf: evaluation point exceeds configured horizon");
  t = std::min(t, span);
  const double x = t / step_;
  std::size_t i = std::min(static_cast<std::size_t>(x), grid_.size() - 2);
  const double u = x - static_cast<double>(i);
  // cubic Hermite with finite-difference slopes; O(h^4) away from the ends
  const std::size_t n = grid_.size() - 1;
  auto slope = [&](std::size_t k) {
    if (k == 0) return (grid_[1] - grid_[0]) / step_;
    if (k == n) return (grid_[n] - grid_[n - 1]) / step_;
    return (grid_[k + 1] - grid_[k - 1]) / (2.0 * step_);
  };
  const double y0 = grid_[i], y1 = grid_[i + 1];
  const double m0 = slope(i) * step_, m1 = slope(i + 1) * step_;
  const double u2 = u * u, u3 = u2 * u;
  double v = (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 +
             (u3 - u2) * m1;
  return std::clamp(v, 0.0, 1.0);
}

double conv_cdf(const std::vector<ServiceLaw>& laws, double t) {
  ConvolvedCdf cdf(laws, std::max(t, 0.0));
  return t < 0 ? 0.0 : cdf(t);
}

}  // namespace snq
