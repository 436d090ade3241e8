#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace snq {

struct QuadratureConfig {
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  int max_subdivisions = 1 << 10;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double a, double b, double err)
      : std::runtime_error("quadrature did not converge; worst subinterval [" + std::to_string(a) +
                           ", " + std::to_string(b) + "] with error estimate " + std::to_string(err)),
        worst_a(a),
        worst_b(b),
        worst_error(err) {}
  double worst_a, worst_b, worst_error;
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss (positive abscissae).
inline constexpr double kGk15X[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGk15Wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGk15Wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
QuadratureResult gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k15 = kGk15Wk[7] * fc;
  double g7 = kGk15Wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kGk15X[i];
    const double fsum = f(c - dx) + f(c + dx);
    k15 += kGk15Wk[i] * fsum;
    if (i % 2 == 1) g7 += kGk15Wg[i / 2] * fsum;
  }
  k15 *= h;
  g7 *= h;
  return {k15, std::abs(k15 - g7)};
}

struct Segment {
  double a, b, value, error;
};

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration of f over [a, b].
// Throws QuadratureError carrying the worst subinterval when the requested
// tolerance is not reached within cfg.max_subdivisions bisections.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
  if (a == b) return {0.0, 0.0};
  std::vector<detail::Segment> segs;
  auto r0 = detail::gk15(f, a, b);
  segs.push_back({a, b, r0.value, r0.error_estimate});
  for (int iter = 0; iter < cfg.max_subdivisions; ++iter) {
    double sum = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      sum += segs[i].value;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(sum))) return {sum, err};
    detail::Segment s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) return {sum, err};  // interval at machine resolution
    auto left = detail::gk15(f, s.a, mid);
    auto right = detail::gk15(f, mid, s.b);
    segs[worst] = {s.a, mid, left.value, left.error_estimate};
    segs.push_back({mid, s.b, right.value, right.error_estimate});
  }
  std::size_t worst = 0;
  for (std::size_t i = 0; i < segs.size(); ++i)
    if (segs[i].error > segs[worst].error) worst = i;
  throw QuadratureError(segs[worst].a, segs[worst].b, segs[worst].error);
}

// Adaptive panel decomposition of w over [a, b] supporting O(1) suffix
// queries tail(v) = integral of w over [v, b]. Iterated transforms evaluate
// this tail at every outer quadrature node, so the panels are resolved once
// and partial panels are finished with a single non-adaptive rule.
class CumulativeIntegral {
 public:
  template <class F>
  CumulativeIntegral(F&& w, double a, double b, const QuadratureConfig& cfg = {})
      : a_(a), b_(b), w_(std::forward<F>(w)) {
    build(cfg);
  }

  double tail(double v) const {
    if (v <= a_) return suffix_[0];
    if (v >= b_) return 0.0;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), v);
    std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    double partial = detail::gk15(w_, v, knots_[i + 1]).value;
    return partial + suffix_[i + 1];
  }

  double total() const { return suffix_[0]; }
  double error_estimate() const { return error_; }

 private:
  void build(const QuadratureConfig& cfg) {
    if (b_ <= a_) {
      knots_ = {a_, b_};
      suffix_ = {0.0, 0.0};
      return;
    }
    std::vector<detail::Segment> segs;
    auto r0 = detail::gk15(w_, a_, b_);
    segs.push_back({a_, b_, r0.value, r0.error_estimate});
    for (int iter = 0; iter < cfg.max_subdivisions; ++iter) {
      double sum = 0.0, err = 0.0;
      std::size_t worst = 0;
      for (std::size_t i = 0; i < segs.size(); ++i) {
        sum += segs[i].value;
        err += segs[i].error;
        if (segs[i].error > segs[worst].error) worst = i;
      }
      if (err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(sum))) break;
      detail::Segment s = segs[worst];
      const double mid = 0.5 * (s.a + s.b);
      if (mid <= s.a || mid >= s.b) break;
      auto left = detail::gk15(w_, s.a, mid);
      auto right = detail::gk15(w_, mid, s.b);
      segs[worst] = {s.a, mid, left.value, left.error_estimate};
      segs.push_back({mid, s.b, right.value, right.error_estimate});
    }
    std::sort(segs.begin(), segs.end(),
              [](const detail::Segment& x, const detail::Segment& y) { return x.a < y.a; });
    knots_.reserve(segs.size() + 1);
    suffix_.assign(segs.size() + 1, 0.0);
    error_ = 0.0;
    for (const auto& s : segs) {
      knots_.push_back(s.a);
      error_ += s.error;
    }
    knots_.push_back(b_);
    for (std::size_t i = segs.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + segs[i].value;
  }

  double a_, b_;
  std::function<double(double)> w_;
  std::vector<double> knots_;
  std::vector<double> suffix_;
  double error_ = 0.0;
};

}  // namespace snq
