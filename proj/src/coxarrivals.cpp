#include "snq/coxarrivals.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "snq/csv.hpp"
#include "snq/parallel.hpp"

namespace snq {

void ArrivalStream::write_csv(std::ostream& os) const {
  os << "epoch\n";
  for (double e : epochs) os << fmt_double(e) << "\n";
}

namespace {

// Inter-shot interval boundaries: 0, shot epochs, horizon.
std::vector<double> interval_points(const ShotNoisePath& path) {
  std::vector<double> pts;
  pts.reserve(path.epochs().size() + 2);
  pts.push_back(0.0);
  for (double e : path.epochs())
    if (e > 0.0 && e < path.horizon()) pts.push_back(e);
  pts.push_back(path.horizon());
  return pts;
}

}  // namespace

ArrivalStream sample_thinning(const ShotNoisePath& path, std::size_t component, RngStream& rng) {
  ArrivalStream out;
  out.component = component;
  const double r = path.spec().decay[component];
  const auto pts = interval_points(path);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k], b = pts[k + 1];
    const double bound = path.level_at(a, component);
    if (bound <= 0.0) continue;
    double u = a + rng.exponential(bound);
    while (u < b) {
      if (rng.uniform01() < std::exp(-r * (u - a))) out.epochs.push_back(u);
      u += rng.exponential(bound);
    }
  }
  return out;
}

ArrivalStream sample_inversion(const ShotNoisePath& path, std::size_t component, RngStream& rng) {
  ArrivalStream out;
  out.component = component;
  const double r = path.spec().decay[component];
  const auto pts = interval_points(path);
  double budget = rng.exponential(1.0);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double s = pts[k];
    const double b = pts[k + 1];
    double level = path.level_at(s, component);
    if (level <= 0.0) continue;
    for (;;) {
      const double capacity = level * -std::expm1(-r * (b - s)) / r;
      if (budget >= capacity) {
        budget -= capacity;
        break;
      }
      const double tau = -std::log1p(-r * budget / level) / r;
      s += tau;
      level *= std::exp(-r * tau);
      out.epochs.push_back(s);
      budget = rng.exponential(1.0);
    }
  }
  return out;
}

EstimateWithCI dispersion_index(const ShotNoiseSpec& spec, double horizon, std::uint64_t reps,
                                std::uint64_t master_seed, int threads) {
  spec.validate();
  if (reps < 1000) throw std::invalid_argument("dispersion_index: reps must be >= 1000");
  const std::uint64_t n_chunks = (reps + 511) / 512;
  std::vector<Moments> partial(n_chunks);
  parallel_for_chunks(reps, threads, [&](std::uint64_t c, std::uint64_t lo, std::uint64_t hi) {
    Moments m;
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream shots = seed_split(master_seed, rep, StreamRole::Shots);
      RngStream thin = seed_split(master_seed, rep, StreamRole::Thinning);
      const auto path = simulate_path(spec, horizon, shots);
      const auto arr = sample_thinning(path, 0, thin);
      m.add(static_cast<double>(arr.epochs.size()));
    }
    partial[c] = m;
  });
  Moments m;
  for (const auto& p : partial) m.merge(p);

  const double mu = m.mean;
  const double s2 = m.variance();
  const double index = s2 / mu;
  const double mu3 = m.central3(), mu4 = m.central4();
  const double var_d =
      (mu4 - s2 * s2 + index * index * s2 - 2.0 * index * mu3) / (m.n * mu * mu);
  return {index, var_d > 0 ? std::sqrt(var_d) : 0.0, reps, master_seed};
}

double dispersion_index_analytic(const ShotNoiseSpec& spec, double horizon) {
  const double r = spec.decay[0];
  const double eb = spec.shots.components[0].mean();
  const double eb2 = spec.shots.components[0].second_moment();
  const double T = horizon;
  // E int_0^T L = lambda0 (1-e^{-rT})/r + nu EB (T - (1-e^{-rT})/r) / r
  const double decay_mass = -std::expm1(-r * T) / r;
  const double mean_count = spec.lambda0_at(0) * decay_mass + spec.nu * eb / r * (T - decay_mass);
  // Var int_0^T L = 2 int_0^T int_v^T e^{-r(u-v)} VarL(v) du dv, closed form
  // int_0^T (1 - e^{-2rv})(1 - e^{-r(T-v)}) dv = T - (1-e^{-2rT})/(2r)
  //   - (1-e^{-rT})/r + e^{-rT}(1-e^{-rT})/r
  const double e1 = -std::expm1(-r * T), e2 = -std::expm1(-2.0 * r * T);
  const double inner = T - e2 / (2.0 * r) - e1 / r + std::exp(-r * T) * e1 / r;
  const double var_int = spec.nu * eb2 / (r * r) * inner;
  return 1.0 + var_int / mean_count;
}

}  // namespace snq
