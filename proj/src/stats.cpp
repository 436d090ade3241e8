#include "snq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace snq {

void Moments::add(double x) {
  // Pebay's single-pass update.
  const double n1 = n;
  n += 1.0;
  const double delta = x - mean;
  const double dn = delta / n;
  const double dn2 = dn * dn;
  const double term1 = delta * dn * n1;
  mean += dn;
  m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
  m3 += term1 * dn * (n - 2.0) - 3.0 * dn * m2;
  m2 += term1;
}

void Moments::merge(const Moments& o) {
  if (o.n == 0.0) return;
  if (n == 0.0) {
    *this = o;
    return;
  }
  const double na = n, nb = o.n, nt = na + nb;
  const double delta = o.mean - mean;
  const double d2 = delta * delta;
  const double m2t = m2 + o.m2 + d2 * na * nb / nt;
  const double m3t = m3 + o.m3 + d2 * delta * na * nb * (na - nb) / (nt * nt) +
                     3.0 * delta * (na * o.m2 - nb * m2) / nt;
  const double m4t = m4 + o.m4 +
                     d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                     6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (nt * nt) +
                     4.0 * delta * (na * o.m3 - nb * m3) / nt;
  mean += delta * nb / nt;
  m2 = m2t;
  m3 = m3t;
  m4 = m4t;
  n = nt;
}

double Moments::se_mean() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }

double Moments::se_variance() const {
  if (n < 2) return 0.0;
  const double s2 = variance_population();
  const double v = (central4() - s2 * s2) / n;
  return v > 0 ? std::sqrt(v) : 0.0;
}

Moments moments_of(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.add(x);
  return m;
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("sample_covariance: need two equal-length samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double acc = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) acc += (xs[i] - mx) * (ys[i] - my);
  return acc / (static_cast<double>(xs.size()) - 1.0);
}

double covariance_se(std::span<const double> xs, std::span<const double> ys) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  Moments prod;
  for (std::size_t i = 0; i < xs.size(); ++i) prod.add((xs[i] - mx) * (ys[i] - my));
  return prod.se_mean();
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  const double c = sample_covariance(xs, ys);
  const double vx = moments_of(xs).variance();
  const double vy = moments_of(ys).variance();
  if (vx <= 0 || vy <= 0) return 0.0;
  return c / std::sqrt(vx * vy);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double dkw_epsilon(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

bool poisson_gof_accepts(std::span<const std::uint64_t> counts, double mean, double alpha,
                         double min_expected) {
  if (counts.empty()) throw std::invalid_argument("poisson_gof_accepts: empty sample");
  const double n = static_cast<double>(counts.size());
  std::uint64_t max_count = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(max_count + 2, 0.0);
  for (auto c : counts) observed[c] += 1.0;

  std::vector<double> expected(max_count + 2, 0.0);
  double pmf = std::exp(-mean);
  double cum = 0.0;
  for (std::uint64_t k = 0; k <= max_count; ++k) {
    expected[k] = n * pmf;
    cum += pmf;
    pmf *= mean / static_cast<double>(k + 1);
  }
  expected[max_count + 1] = n * std::max(1.0 - cum, 0.0);  // upper tail bin

  // pool adjacent bins until every expected count reaches the floor
  std::vector<double> obs_b, exp_b;
  double o = 0.0, e = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= min_expected) {
      obs_b.push_back(o);
      exp_b.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 && !exp_b.empty()) {
    obs_b.back() += o;
    exp_b.back() += e;
  }
  if (obs_b.size() < 2) return true;  // nothing to test against

  double stat = 0.0;
  for (std::size_t k = 0; k < obs_b.size(); ++k) {
    const double diff = obs_b[k] - exp_b[k];
    stat += diff * diff / exp_b[k];
  }
  const double df = static_cast<double>(obs_b.size()) - 1.0;
  return stat <= chi_squared_quantile(df, 1.0 - alpha);
}

double chi_squared_quantile(double df, double p) {
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal(), p);
}

}  // namespace snq
