#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "snq/distributions.hpp"
#include "snq/quadrature.hpp"
#include "snq/rng.hpp"

using namespace snq;

namespace {

// Independent oracle: CDF of a sum by direct numeric integration of
// P(X + Y <= t) = int F_Y(t - x) f_X(x) dx with adaptive quadrature.
double conv_two_exponentials_oracle(double rate1, double rate2, double t) {
  auto integrand = [&](double x) {
    const double fy = 1.0 - std::exp(-rate2 * (t - x));
    return rate1 * std::exp(-rate1 * x) * fy;
  };
  return integrate(integrand, 0.0, t, {1e-13, 1e-13, 4096}).value;
}

double empirical_cdf(const std::vector<double>& sorted, double x) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

}  // namespace

TEST_CASE("shot law transforms: closed forms") {
  CHECK(ShotLaw::exponential(1.0).lst(0.0) == 1.0);
  CHECK(ShotLaw::exponential(1.0).lst(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ShotLaw::deterministic(2.0).lst(0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(ShotLaw::gamma(2.0, 0.5).lst(2.0) == doctest::Approx(std::pow(2.0, -2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(ShotLaw::exponential(1.0).lst(-0.1), std::domain_error);
}

TEST_CASE("shot law lst slope at zero recovers the mean") {
  const double h = 1e-5;
  for (const auto& law : {ShotLaw::exponential(1.7), ShotLaw::deterministic(0.8),
                          ShotLaw::gamma(2.5, 0.6)}) {
    const double slope = -(law.lst(h) - law.lst(0.0)) / h;  // one-sided; lst(-h) is out of domain
    const double slope2 = -(law.lst(h / 2) - law.lst(0.0)) / (h / 2);
    const double richardson = 2.0 * slope2 - slope;
    CHECK(richardson == doctest::Approx(law.mean()).epsilon(1e-6));
  }
}

TEST_CASE("lst is nonincreasing and bounded by (0,1]") {
  for (const auto& law : {ShotLaw::exponential(0.5), ShotLaw::gamma(0.7, 2.0)}) {
    double prev = law.lst(0.0);
    CHECK(prev == 1.0);
    for (double s = 0.25; s < 6.0; s += 0.25) {
      const double v = law.lst(s);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("joint lst: independent product and comonotone quadrature") {
  ShotLawVector indep;
  indep.components = {ShotLaw::exponential(1.0), ShotLaw::exponential(1.0)};
  const std::vector<double> zero = {0.0, 0.0}, ones = {1.0, 1.0};
  CHECK(indep.joint_lst(zero) == 1.0);
  CHECK(indep.joint_lst(ones) == doctest::Approx(0.25).epsilon(1e-14));

  ShotLawVector como;
  como.components = {ShotLaw::deterministic(1.0), ShotLaw::deterministic(1.0)};
  como.coupling = ShotLawVector::Coupling::Comonotone;
  const std::vector<double> s12 = {1.0, 2.0};
  CHECK(como.joint_lst(s12) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
  CHECK(como.joint_lst(zero) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> bad = {1.0};
  CHECK_THROWS_AS(indep.joint_lst(bad), std::invalid_argument);
}

TEST_CASE("comonotone marginals match the component laws in moments") {
  ShotLawVector como;
  como.components = {ShotLaw::exponential(2.0), ShotLaw::gamma(2.0, 0.5)};
  como.coupling = ShotLawVector::Coupling::Comonotone;
  RngStream rng(11, 0, StreamRole::Shots);
  double m0 = 0, m1 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto v = como.sample(rng);
    m0 += v[0];
    m1 += v[1];
  }
  CHECK(m0 / n == doctest::Approx(2.0).epsilon(0.02));
  CHECK(m1 / n == doctest::Approx(1.0).epsilon(0.02));
  // perfectly coupled: E B1 B2 >= E B1 E B2, via the quadrature cross moment
  CHECK(como.cross_moment(0, 1) > 2.0 * 1.0);
}

TEST_CASE("service laws: survival closed forms and the cdf complement") {
  CHECK(ServiceLaw::exponential(2.0).survival(0.0) == 1.0);
  CHECK(ServiceLaw::exponential(2.0).survival(1.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(ServiceLaw::deterministic(3.0).survival(3.5) == 0.0);
  CHECK(ServiceLaw::deterministic(3.0).survival(2.999) == 1.0);
  CHECK(ServiceLaw::uniform(2.0).survival(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(ServiceLaw::exponential(2.0).survival(-1.0) == 1.0);

  for (const auto& law : {ServiceLaw::exponential(1.3), ServiceLaw::uniform(2.0),
                          ServiceLaw::gamma(2.5, 1.1), ServiceLaw::deterministic(0.7)}) {
    for (double t = 0.0; t < 4.0; t += 0.173)
      CHECK(law.cdf(t) + law.survival(t) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("conv_cdf closed forms") {
  // all-deterministic: atom at the sum
  CHECK(conv_cdf({ServiceLaw::deterministic(1.0), ServiceLaw::deterministic(2.0)}, 2.5) == 0.0);
  CHECK(conv_cdf({ServiceLaw::deterministic(1.0), ServiceLaw::deterministic(2.0)}, 3.0) == 1.0);
  // single law reduces to its own cdf
  for (double t : {0.3, 1.0, 2.7})
    CHECK(conv_cdf({ServiceLaw::exponential(1.5)}, t) ==
          doctest::Approx(ServiceLaw::exponential(1.5).cdf(t)).epsilon(1e-12));
  // Erlang(2,1) at t=2: oracle by numeric integration, frozen closed value
  const double oracle = conv_two_exponentials_oracle(1.0, 1.0 + 1e-9, 2.0);
  CHECK(oracle == doctest::Approx(0.5939941502901619).epsilon(1e-6));
  CHECK(conv_cdf({ServiceLaw::exponential(1.0), ServiceLaw::exponential(1.0)}, 2.0) ==
        doctest::Approx(0.5939941502901619).epsilon(1e-12));
  // hypoexponential vs the same oracle
  CHECK(conv_cdf({ServiceLaw::exponential(1.0), ServiceLaw::exponential(3.0)}, 1.4) ==
        doctest::Approx(conv_two_exponentials_oracle(1.0, 3.0, 1.4)).epsilon(1e-9));
  // gamma laws sharing a rate merge exactly
  CHECK(conv_cdf({ServiceLaw::gamma(1.5, 2.0), ServiceLaw::exponential(2.0)}, 1.1) ==
        doctest::Approx(gamma_cdf(2.5, 2.0, 1.1)).epsilon(1e-12));
  // exhaustion: everything converges to 1
  CHECK(conv_cdf({ServiceLaw::exponential(1.0), ServiceLaw::exponential(1.0)}, 60.0) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("grid convolution agrees with the Erlang closed form to 1e-8") {
  const std::vector<ServiceLaw> laws = {ServiceLaw::exponential(1.0), ServiceLaw::exponential(1.0),
                                        ServiceLaw::exponential(1.0)};
  ConvolvedCdf grid(laws, 10.0, 14, /*force_grid=*/true);
  CHECK_FALSE(grid.exact());
  double worst = 0.0;
  for (double t = 0.05; t <= 10.0; t += 0.137)
    worst = std::max(worst, std::abs(grid(t) - gamma_cdf(3.0, 1.0, t)));
  CHECK(worst <= 1e-8);
}

TEST_CASE("grid convolution handles mixed laws against a quadrature oracle") {
  // exponential + uniform: P(E + U <= t) by direct integration
  auto oracle = [](double t) {
    auto integrand = [&](double x) {
      const ServiceLaw uni = ServiceLaw::uniform(2.0);
      return 1.3 * std::exp(-1.3 * x) * uni.cdf(t - x);
    };
    return integrate(integrand, 0.0, t, {1e-12, 1e-12, 4096}).value;
  };
  ConvolvedCdf mixed({ServiceLaw::exponential(1.3), ServiceLaw::uniform(2.0)}, 8.0);
  CHECK_FALSE(mixed.exact());
  for (double t : {0.5, 1.0, 2.0, 3.5, 6.0})
    CHECK(mixed(t) == doctest::Approx(oracle(t)).epsilon(1e-7));
  CHECK_THROWS_AS(mixed(9.0), std::out_of_range);
}

TEST_CASE("deterministic shift combines with continuous parts") {
  ConvolvedCdf c({ServiceLaw::deterministic(1.0), ServiceLaw::exponential(2.0)}, 5.0);
  CHECK(c.exact());
  CHECK(c(0.9) == 0.0);
  CHECK(c(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(c(2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("sampler matches its cdf inside the DKW band") {
  RngStream rng(5, 0, StreamRole::Services);
  const std::size_t n = 100000;
  const double eps = std::sqrt(std::log(2.0 / 0.001) / (2.0 * n));
  for (const auto& law : {ServiceLaw::exponential(1.3), ServiceLaw::uniform(2.0),
                          ServiceLaw::gamma(2.5, 1.1)}) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = law.sample(rng);
    std::sort(xs.begin(), xs.end());
    double worst = 0.0;
    for (double t = 0.0; t < 6.0; t += 0.05)
      worst = std::max(worst, std::abs(empirical_cdf(xs, t) - law.cdf(t)));
    CHECK(worst < eps);
  }
}

TEST_CASE("sample means over many draws sit within 4 standard errors") {
  RngStream rng(6, 0, StreamRole::Services);
  const int n = 1000000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += ServiceLaw::exponential(2.0).sample(rng);
  CHECK(std::abs(acc / n - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
  acc = 0.0;
  for (int i = 0; i < n; ++i) acc += ServiceLaw::uniform(3.0).sample(rng);
  const double sd_u = 3.0 / std::sqrt(12.0);
  CHECK(std::abs(acc / n - 1.5) < 4.0 * sd_u / std::sqrt(static_cast<double>(n)));
  CHECK(ServiceLaw::deterministic(2.0).sample(rng) == 2.0);
  CHECK(ShotLaw::deterministic(2.0).sample(rng) == 2.0);
}

TEST_CASE("two unbounded-density gamma laws are rejected in grid convolutions") {
  CHECK_THROWS_AS(ConvolvedCdf({ServiceLaw::gamma(0.5, 1.0), ServiceLaw::gamma(0.4, 2.0)}, 5.0),
                  std::invalid_argument);
  // one is fine: it seeds the grid as a CDF
  ConvolvedCdf ok({ServiceLaw::gamma(0.5, 1.0), ServiceLaw::uniform(1.0)}, 5.0);
  CHECK(ok(4.0) > 0.9);
}
