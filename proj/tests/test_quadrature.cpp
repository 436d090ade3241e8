#include <doctest.h>

#include <cmath>

#include "snq/quadrature.hpp"

using namespace snq;

TEST_CASE("polynomials and smooth integrands") {
  auto sq = [](double x) { return x * x; };
  CHECK(integrate(sq, 0.0, 1.0).value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  auto sine = [](double x) { return std::sin(x); };
  CHECK(integrate(sine, 0.0, M_PI).value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate(sine, 2.0, 2.0).value == 0.0);
}

TEST_CASE("adaptive refinement handles kinks and sharp peaks") {
  auto kink = [](double x) { return std::abs(x - 0.3141); };
  const double exact = 0.5 * (0.3141 * 0.3141 + (1 - 0.3141) * (1 - 0.3141));
  CHECK(integrate(kink, 0.0, 1.0).value == doctest::Approx(exact).epsilon(1e-10));

  auto peak = [](double x) { return 1.0 / (1e-4 + (x - 0.5) * (x - 0.5)); };
  const double exact_peak = 2.0 / 1e-2 * std::atan(0.5 / 1e-2);
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-10;
  CHECK(integrate(peak, 0.0, 1.0, cfg).value == doctest::Approx(exact_peak).epsilon(1e-9));
}

TEST_CASE("non-convergence reports the worst subinterval") {
  auto peak = [](double x) { return 1.0 / (1e-12 + x * x); };
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-14;
  cfg.rel_tol = 1e-14;
  cfg.max_subdivisions = 4;
  CHECK_THROWS_AS(integrate(peak, 0.0, 1.0, cfg), QuadratureError);
  try {
    integrate(peak, 0.0, 1.0, cfg);
  } catch (const QuadratureError& e) {
    CHECK(e.worst_a >= 0.0);
    CHECK(e.worst_b <= 1.0);
    CHECK(e.worst_error > 0.0);
  }
}

TEST_CASE("cumulative integral tails agree with direct integration") {
  auto f = [](double x) { return std::exp(-0.7 * x) * std::cos(3.0 * x); };
  CumulativeIntegral cum(f, 0.0, 6.0, {1e-12, 1e-12, 4096});
  for (double v : {0.0, 0.001, 0.5, 1.0, 2.345, 5.9, 6.0}) {
    const double direct = integrate(f, v, 6.0, {1e-13, 1e-13, 4096}).value;
    CHECK(cum.tail(v) == doctest::Approx(direct).epsilon(1e-9));
  }
  CHECK(cum.total() == doctest::Approx(integrate(f, 0.0, 6.0).value).epsilon(1e-10));
}

TEST_CASE("error estimate is honest for smooth functions") {
  auto f = [](double x) { return std::exp(x); };
  const auto res = integrate(f, 0.0, 2.0, {1e-11, 1e-11, 2048});
  CHECK(std::abs(res.value - (std::exp(2.0) - 1.0)) <= std::max(res.error_estimate, 1e-12));
}
