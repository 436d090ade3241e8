#include "snq/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snq {

// ------------------------------------------------- OccupancyProbabilities

OccupancyProbabilities::OccupancyProbabilities(const TandemSpec& tandem, double t, double path_prob)
    : stages_(tandem.services.size()), t_(t), path_prob_(path_prob) {
  if (tandem.services.empty())
    throw std::invalid_argument("OccupancyProbabilities: tandem needs at least one stage");
  if (!(t > 0)) throw std::invalid_argument("OccupancyProbabilities: t must be > 0");
  if (!(path_prob > 0.0 && path_prob <= 1.0))
    throw std::invalid_argument("OccupancyProbabilities: path probability must lie in (0, 1]");
  prefix_.reserve(stages_);
  std::vector<ServiceLaw> laws;
  for (const auto& law : tandem.services) {
    laws.push_back(law);
    prefix_.push_back(std::make_shared<const ConvolvedCdf>(laws, t));
  }
}

double OccupancyProbabilities::prefix_cdf(std::size_t j, double x) const {
  if (j == 0) return x >= 0.0 ? 1.0 : 0.0;
  if (x < 0.0) return 0.0;
  return (*prefix_[j - 1])(x);
}

double OccupancyProbabilities::p_node(std::size_t j, double u) const {
  if (j < 1 || j > stages_) throw std::out_of_range("OccupancyProbabilities::p_node");
  const double a = t_ - u;
  return path_prob_ * std::max(prefix_cdf(j - 1, a) - prefix_cdf(j, a), 0.0);
}

double OccupancyProbabilities::p_exit(double u) const {
  return path_prob_ * prefix_cdf(stages_, t_ - u);
}

double f_tandem(const OccupancyProbabilities& occ, double u, std::span<const double> z) {
  if (z.size() != occ.stages()) throw std::invalid_argument("f_tandem: z dimension mismatch");
  double f = (1.0 - occ.path_prob()) + occ.p_exit(u);
  for (std::size_t j = 1; j <= occ.stages(); ++j) f += z[j - 1] * occ.p_node(j, u);
  return f;
}

double f_m2(std::span<const OccupancyProbabilities> tandems, double u,
            const std::vector<std::vector<double>>& z) {
  if (z.size() != tandems.size()) throw std::invalid_argument("f_m2: z dimension mismatch");
  double prod = 1.0;
  for (std::size_t i = 0; i < tandems.size(); ++i)
    prod *= f_tandem(tandems[i], u, z[i]);
  return prod;
}

// ------------------------------------------------------ transform engine

namespace {

// exp( sum_i lambda0_i (Tail_i(0) - s_i e^{-r_i t})
//      + nu int_0^t (beta(g(v)) - 1) dv ),
// g_i(v) = s_i e^{-r_i (t-v)} - e^{r_i v} Tail_i(v),
// Tail_i(v) = int_v^t w_i(u) e^{-r_i u} du.
TransformResult shot_noise_transform(const ShotNoiseSpec& spec,
                                     const std::vector<std::function<double(double)>>& w, double t,
                                     std::span<const double> s, const QuadratureConfig& quad) {
  spec.validate();
  const std::size_t d = spec.dim();
  if (w.size() != d) throw std::invalid_argument("transform: one integrand per component required");
  if (s.size() != d) throw std::invalid_argument("transform: s dimension mismatch");
  for (double si : s)
    if (si < 0) throw std::domain_error("transform: s must be >= 0");
  if (t == 0.0) {
    double e = 0.0;
    for (std::size_t i = 0; i < d; ++i) e -= spec.lambda0_at(i) * s[i];
    return {std::exp(e), 0.0};
  }
  if (!(t > 0)) throw std::invalid_argument("transform: t must be > 0");

  QuadratureConfig inner = quad;
  inner.abs_tol = quad.abs_tol / 100.0;
  inner.rel_tol = quad.rel_tol / 100.0;
  inner.max_subdivisions = quad.max_subdivisions * 4;

  std::vector<CumulativeIntegral> tails;
  tails.reserve(d);
  double inner_err = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double r = spec.decay[i];
    if (r * t > 600.0)
      throw std::invalid_argument("transform: r*t too large for the cached-tail evaluation");
    tails.emplace_back([&w, i, r](double u) { return w[i](u) * std::exp(-r * u); }, 0.0, t, inner);
    inner_err += spec.shots.components[i].mean() * std::exp(r * t) * tails[i].error_estimate();
  }

  std::vector<double> g(d);
  auto outer = [&](double v) {
    for (std::size_t i = 0; i < d; ++i) {
      const double r = spec.decay[i];
      g[i] = s[i] * std::exp(-r * (t - v)) - std::exp(r * v) * tails[i].tail(v);
      if (g[i] < 0.0 && g[i] > -1e-9) g[i] = 0.0;  // quadrature jitter at the boundary
    }
    return spec.shots.joint_lst(g, inner) - 1.0;
  };
  const auto res = integrate(outer, 0.0, t, quad);

  double exponent = spec.nu * res.value;
  for (std::size_t i = 0; i < d; ++i)
    exponent += spec.lambda0_at(i) * (tails[i].total() - s[i] * std::exp(-spec.decay[i] * t));
  const double value = std::exp(exponent);
  const double err = value * spec.nu * (res.error_estimate + t * inner_err);
  return {value, err};
}

}  // namespace

TransformResult generic_transform(const ShotNoiseSpec& spec, const std::function<double(double)>& f,
                                  double t, double s, const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("generic_transform: single-component spec required");
  return shot_noise_transform(spec, {f}, t, std::vector<double>{s}, quad);
}

TransformResult joint_transform(const ShotNoiseSpec& spec, const ServiceLaw& service,
                                const TransformQuery& query, const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("joint_transform: single-component spec required");
  query.validate();
  if (query.z.size() != 1 || query.s.size() != 1)
    throw std::invalid_argument("joint_transform: scalar z and s required");
  const double z = query.z[0], t = query.t;
  std::function<double(double)> f = [z, t, &service](double u) {
    return (z - 1.0) * service.survival(t - u);
  };
  return shot_noise_transform(spec, {f}, t, query.s, quad);
}

double mean_N(const ShotNoiseSpec& spec, const ServiceLaw& service, double t,
              const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("mean_N: single-component spec required");
  if (t == 0.0) return 0.0;
  auto integrand = [&](double u) { return mean_at(spec, u)[0] * service.survival(t - u); };
  return integrate(integrand, 0.0, t, quad).value;
}

double var_N(const ShotNoiseSpec& spec, const ServiceLaw& service, double t,
             const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("var_N: single-component spec required");
  if (t == 0.0) return 0.0;
  const double r = spec.decay[0];
  QuadratureConfig inner = quad;
  inner.abs_tol = quad.abs_tol / 100.0;
  inner.rel_tol = quad.rel_tol / 100.0;
  CumulativeIntegral tail([&service, r, t](double u) { return service.survival(t - u) * std::exp(-r * u); },
                          0.0, t, inner);
  auto outer = [&](double v) {
    return variance_at(spec, v)[0] * service.survival(t - v) * std::exp(r * v) * tail.tail(v);
  };
  return 2.0 * integrate(outer, 0.0, t, quad).value + mean_N(spec, service, t, quad);
}

std::pair<double, double> exact_mean_var_exponential(const ShotNoiseSpec& spec, double mu, double t) {
  if (spec.dim() != 1)
    throw std::invalid_argument("exact_mean_var_exponential: single-component spec required");
  if (spec.lambda0_at(0) != 0.0)
    throw std::invalid_argument("exact_mean_var_exponential: requires lambda0 = 0");
  if (!(mu > 0)) throw std::invalid_argument("exact_mean_var_exponential: mu must be > 0");
  const double r = spec.decay[0];
  const double nu = spec.nu;
  const double eb = spec.shots.components[0].mean();
  const double eb2 = spec.shots.components[0].second_moment();
  const double mean_stationary = nu * eb / r;

  // the (mu - r)^{-2} form loses precision near equality; switch to the
  // confluent branch inside a relative band
  const bool equal = std::abs(mu - r) < 1e-6 * std::max(mu, r);
  double h, var_term;
  if (equal) {
    const double rt = r * t;
    h = 1.0 - std::exp(-rt) - rt * std::exp(-rt);
    var_term = nu * eb2 / (4.0 * r * r * r) *
               (1.0 - std::exp(-2.0 * rt) - 2.0 * rt * (1.0 + rt) * std::exp(-2.0 * rt));
  } else {
    h = (mu * -std::expm1(-r * t) - r * -std::expm1(-mu * t)) / (mu - r);
    const double num = r * r * -std::expm1(-2.0 * mu * t) + mu * mu * -std::expm1(-2.0 * r * t) +
                       mu * r * (4.0 * std::exp(-t * (mu + r)) - std::exp(-2.0 * mu * t) -
                                 std::exp(-2.0 * r * t) - 2.0);
    var_term = nu * eb2 / (2.0 * r) * num / (mu * (mu - r) * (mu - r) * (mu + r));
  }
  const double mean = mean_stationary / mu * h;
  return {mean, var_term + mean};
}

// ------------------------------------------------------ network transforms

namespace {

struct TandemEval {
  OccupancyProbabilities occ;
  std::vector<double> z;
};

std::vector<TandemEval> prepare_tandems(const std::vector<WeightedTandem>& tandems,
                                        const TransformQuery& query) {
  std::size_t need = 0;
  for (const auto& wt : tandems) need += wt.tandem.services.size();
  if (query.z.size() != need)
    throw std::invalid_argument("network transform: z must carry one entry per node (tandem-major)");
  std::vector<TandemEval> out;
  out.reserve(tandems.size());
  std::size_t off = 0;
  for (const auto& wt : tandems) {
    const std::size_t s = wt.tandem.services.size();
    out.push_back({OccupancyProbabilities(wt.tandem, query.t, 1.0),
                   std::vector<double>(query.z.begin() + off, query.z.begin() + off + s)});
    off += s;
  }
  return out;
}

}  // namespace

TransformResult network_transform_m1(const ShotNoiseSpec& spec,
                                     const std::vector<WeightedTandem>& tandems,
                                     const TransformQuery& query, const QuadratureConfig& quad) {
  spec.validate();
  query.validate();
  if (query.s.size() != spec.dim())
    throw std::invalid_argument("network transform: s dimension mismatch with spec");
  auto evals = prepare_tandems(tandems, query);

  std::vector<double> weight_sum(spec.dim(), 0.0);
  for (const auto& wt : tandems) {
    if (wt.tandem.source_component >= spec.dim())
      throw std::invalid_argument("network transform: tandem component out of range");
    if (!(wt.weight > 0.0 && wt.weight <= 1.0))
      throw std::invalid_argument("network transform: weights must lie in (0, 1]");
    weight_sum[wt.tandem.source_component] += wt.weight;
  }
  for (double ws : weight_sum)
    if (ws > 1.0 + 1e-9)
      throw std::invalid_argument("network transform: per-source weights exceed 1");

  std::vector<std::function<double(double)>> w(spec.dim());
  for (std::size_t c = 0; c < spec.dim(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < tandems.size(); ++k)
      if (tandems[k].tandem.source_component == c) members.push_back(k);
    std::vector<double> weights;
    for (std::size_t k : members) weights.push_back(tandems[k].weight);
    w[c] = [members, weights, &evals](double u) {
      double acc = 0.0;
      for (std::size_t m = 0; m < members.size(); ++m)
        acc += weights[m] * (f_tandem(evals[members[m]].occ, u, evals[members[m]].z) - 1.0);
      return acc;
    };
  }
  return shot_noise_transform(spec, w, query.t, query.s, quad);
}

TransformResult network_transform_m2(const ShotNoiseSpec& spec,
                                     const std::vector<WeightedTandem>& tandems,
                                     const TransformQuery& query, const QuadratureConfig& quad) {
  spec.validate();
  if (spec.dim() != 1)
    throw std::invalid_argument("network_transform_m2: scalar intensity required");
  query.validate();
  if (query.s.size() != 1) throw std::invalid_argument("network_transform_m2: scalar s required");
  for (const auto& wt : tandems)
    if (wt.weight != 1.0)
      throw std::invalid_argument("network_transform_m2: simultaneous arrivals admit no weights");
  auto evals = prepare_tandems(tandems, query);
  std::function<double(double)> w = [&evals](double u) {
    double prod = 1.0;
    for (const auto& ev : evals) prod *= f_tandem(ev.occ, u, ev.z);
    return prod - 1.0;
  };
  return shot_noise_transform(spec, {w}, query.t, query.s, quad);
}

// ------------------------------------------------------------ covariances

namespace {

// sum over both (u, v) orderings of the triangle v <= u:
// int_0^t k(v) [ gA(v) e^{rB v} int_v^t gB(u) e^{-rB u} du
//              + gB(v) e^{rA v} int_v^t gA(u) e^{-rA u} du ] dv
// where rA decays the lag when A is evaluated later, and k carries the
// equal-time covariance.
double symmetrized_cov(const std::function<double(double)>& gA, double rA,
                       const std::function<double(double)>& gB, double rB,
                       const std::function<double(double)>& k, double t,
                       const QuadratureConfig& quad) {
  QuadratureConfig inner = quad;
  inner.abs_tol = quad.abs_tol / 100.0;
  inner.rel_tol = quad.rel_tol / 100.0;
  CumulativeIntegral tailA([&gA, rA](double u) { return gA(u) * std::exp(-rA * u); }, 0.0, t, inner);
  CumulativeIntegral tailB([&gB, rB](double u) { return gB(u) * std::exp(-rB * u); }, 0.0, t, inner);
  auto outer = [&](double v) {
    return k(v) * (gB(v) * std::exp(rA * v) * tailA.tail(v) +
                   gA(v) * std::exp(rB * v) * tailB.tail(v));
  };
  return integrate(outer, 0.0, t, quad).value;
}

}  // namespace

double cov_tandem(const ShotNoiseSpec& spec, const ServiceLaw& service1, const ServiceLaw& service2,
                  double t, const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("cov_tandem: single-component spec required");
  if (t == 0.0) return 0.0;
  const double r = spec.decay[0];
  ConvolvedCdf both({service1, service2}, t);
  auto g1 = [&](double u) { return service1.survival(t - u); };
  auto g2 = [&](double u) {
    const double a = t - u;
    return a < 0 ? 0.0 : std::max(service1.cdf(a) - both(a), 0.0);
  };
  auto k = [&](double v) { return variance_at(spec, v)[0]; };
  return symmetrized_cov(g1, r, g2, r, k, t, quad);
}

double cov_m1(const ShotNoiseSpec& spec, const ServiceLaw& service1, const ServiceLaw& service2,
              double t, const QuadratureConfig& quad) {
  if (spec.dim() != 2) throw std::invalid_argument("cov_m1: two-component spec required");
  if (t == 0.0) return 0.0;
  const double r1 = spec.decay[0], r2 = spec.decay[1];
  const double c0 = spec.nu * spec.shots.cross_moment(0, 1) / (r1 + r2);
  auto g1 = [&](double u) { return service1.survival(t - u); };
  auto g2 = [&](double u) { return service2.survival(t - u); };
  auto k = [&](double v) { return c0 * -std::expm1(-(r1 + r2) * v); };
  return symmetrized_cov(g1, r1, g2, r2, k, t, quad);
}

double cov_m2(const ShotNoiseSpec& spec, const ServiceLaw& service1, const ServiceLaw& service2,
              double t, const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("cov_m2: single-component spec required");
  if (t == 0.0) return 0.0;
  const double r = spec.decay[0];
  auto g1 = [&](double u) { return service1.survival(t - u); };
  auto g2 = [&](double u) { return service2.survival(t - u); };
  auto k = [&](double v) { return variance_at(spec, v)[0]; };
  const double common_rate = symmetrized_cov(g1, r, g2, r, k, t, quad);
  // simultaneous-arrival correction with independent service draws
  auto joint_surv = [&](double u) {
    return mean_at(spec, u)[0] * service1.survival(t - u) * service2.survival(t - u);
  };
  return common_rate + integrate(joint_surv, 0.0, t, quad).value;
}

// --------------------------------------------------------------- moments

double pgf_moments(const std::function<double(double)>& pgf_of_z, int order, double h) {
  if (order != 1 && order != 2) throw std::invalid_argument("pgf_moments: order must be 1 or 2");
  if (!(h > 0) || h >= 0.5) throw std::invalid_argument("pgf_moments: bad step");
  const double f0 = pgf_of_z(1.0);
  auto quotient = [&](double step) {
    if (order == 1) return (f0 - pgf_of_z(1.0 - step)) / step;
    return (f0 - 2.0 * pgf_of_z(1.0 - step) + pgf_of_z(1.0 - 2.0 * step)) / (step * step);
  };
  const double d_h = quotient(h);
  const double d_h2 = quotient(0.5 * h);
  const double value = 2.0 * d_h2 - d_h;  // leading error term is O(h) one-sided
  if (!std::isfinite(value)) throw std::domain_error("pgf_moments: non-finite difference quotient");
  return value;
}

// ---------------------------------------------------------- loop formulas

namespace {

// smallest truncation with geometric tail eta^{m+1}/(1-eta) below 1e-10
std::size_t loop_terms(double eta) {
  if (eta <= 0.0) return 1;
  const double bound = 1e-10 * (1.0 - eta);
  std::size_t m = 0;
  double tail = eta;  // eta^{m+1}
  while (tail >= bound && m < 100000) {
    tail *= eta;
    ++m;
  }
  return m + 1;
}

}  // namespace

double loop_prob_node1(double eta, double mu, double age) {
  if (age < 0) return 0.0;
  const double x = mu * age;
  const std::size_t terms = loop_terms(eta);
  double term = std::exp(-x);  // m = 0: e^{-x} x^0 / 0!
  double sum = term;
  double w = 1.0;
  for (std::size_t m = 1; m < terms; ++m) {
    const double k = 2.0 * static_cast<double>(m);
    term *= x * x / ((k - 1.0) * k);
    w *= eta;
    sum += w * term;
  }
  return sum;
}

double loop_prob_node2(double eta, double mu, double age) {
  if (age < 0) return 0.0;
  const double x = mu * age;
  const std::size_t terms = loop_terms(eta);
  double term = std::exp(-x) * x;  // m = 0: e^{-x} x / 1!
  double sum = term;
  double w = 1.0;
  for (std::size_t m = 1; m < terms; ++m) {
    const double k = 2.0 * static_cast<double>(m) + 1.0;
    term *= x * x / ((k - 1.0) * k);
    w *= eta;
    sum += w * term;
  }
  return sum;
}

double loop_prob_exited(double eta, double mu, double age) {
  if (age <= 0) return 0.0;
  const double x = mu * age;
  const std::size_t terms = loop_terms(eta);
  // F_Gamma(2m+2, mu)(age) = P(Y(x) >= 2m+2) = 1 - e^{-x} sum_{i<2m+2} x^i/i!
  double sum = 0.0;
  double w = 1.0 - eta;  // (1-eta) eta^m
  double pmf = std::exp(-x);  // e^{-x} x^i / i!
  double cum = pmf;           // sum_{i <= 0}
  pmf *= x;
  cum += pmf;  // i = 1
  std::size_t i = 1;
  for (std::size_t m = 0; m < terms; ++m) {
    // cum currently holds sum_{i <= 2m+1}
    sum += w * std::max(1.0 - cum, 0.0);
    w *= eta;
    for (std::size_t step = 0; step < 2; ++step) {
      ++i;
      pmf *= x / static_cast<double>(i);
      cum += pmf;
    }
  }
  return sum;
}

double loop_prob_node1_hyperbolic(double eta, double mu, double age) {
  if (age < 0) return 0.0;
  const double x = mu * age;
  return std::exp(-x) * std::cosh(std::sqrt(eta) * x);
}

double loop_prob_node2_hyperbolic(double eta, double mu, double age) {
  if (age < 0) return 0.0;
  const double x = mu * age;
  if (eta == 0.0) return std::exp(-x) * x;
  const double se = std::sqrt(eta);
  return std::exp(-x) / se * std::sinh(se * x);
}

double loop_f(double eta, double mu, double age, double z1, double z2) {
  return loop_prob_exited(eta, mu, age) + z1 * loop_prob_node1(eta, mu, age) +
         z2 * loop_prob_node2(eta, mu, age);
}

double loop_mean_count(const ShotNoiseSpec& spec, double eta, double mu, double t, int node,
                       const QuadratureConfig& quad) {
  if (spec.dim() != 1) throw std::invalid_argument("loop_mean_count: single-component spec required");
  if (node != 1 && node != 2) throw std::invalid_argument("loop_mean_count: node must be 1 or 2");
  auto integrand = [&](double u) {
    const double p = node == 1 ? loop_prob_node1(eta, mu, t - u) : loop_prob_node2(eta, mu, t - u);
    return mean_at(spec, u)[0] * p;
  };
  return integrate(integrand, 0.0, t, quad).value;
}

}  // namespace snq
