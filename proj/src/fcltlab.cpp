#include "snq/fcltlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snq/coxarrivals.hpp"
#include "snq/parallel.hpp"

namespace snq {

void ScalingExperiment::validate() const {
  base_spec.validate();
  if (base_spec.dim() != 1) throw std::invalid_argument("fclt.base_spec: must be scalar");
  if (base_spec.lambda0_at(0) != 0.0) throw std::invalid_argument("fclt.base_spec: lambda0 must be 0");
  if (!(mu > 0)) throw std::invalid_argument("fclt.mu: must be > 0");
  if (n_values.empty() || !std::is_sorted(n_values.begin(), n_values.end()))
    throw std::invalid_argument("fclt.n_values: must be nonempty and sorted increasing");
  for (int n : n_values)
    if (n < 1) throw std::invalid_argument("fclt.n_values: entries must be >= 1");
  if (!(horizon > 0)) throw std::invalid_argument("fclt.horizon: must be > 0");
  if (reps < 2) throw std::invalid_argument("fclt.reps: must be >= 2");
  if (time_grid.empty() || !std::is_sorted(time_grid.begin(), time_grid.end()))
    throw std::invalid_argument("fclt.time_grid: must be nonempty and sorted");
  if (time_grid.back() > horizon)
    throw std::invalid_argument("fclt.time_grid: grid exceeds horizon");
}

LimitProcessParams limit_params(const ShotNoiseSpec& spec, double mu) {
  spec.validate();
  if (spec.dim() != 1) throw std::invalid_argument("limit_params: scalar spec required");
  LimitProcessParams p;
  p.r = spec.decay[0];
  p.mu = mu;
  p.sigma_lambda =
      std::sqrt(spec.nu * spec.shots.components[0].second_moment() / (2.0 * spec.decay[0]));
  p.rho = fluid_path(spec, mu, 0.0);
  ShotNoiseSpec copy = spec;
  p.mean_intensity = [copy](double u) { return mean_at(copy, u)[0]; };
  return p;
}

std::function<double(double)> fluid_path(const ShotNoiseSpec& spec, double mu, double rho0) {
  spec.validate();
  if (spec.dim() != 1) throw std::invalid_argument("fluid_path: scalar spec required");
  if (!(mu > 0)) throw std::invalid_argument("fluid_path: mu must be > 0");
  const double r = spec.decay[0];
  const double a = spec.nu * spec.shots.components[0].mean() / r;  // stationary E L
  const bool equal = std::abs(mu - r) < 1e-6 * std::max(mu, r);
  return [=](double t) {
    double h;
    if (equal) {
      h = 1.0 - std::exp(-r * t) - r * t * std::exp(-r * t);
    } else {
      h = (mu * -std::expm1(-r * t) - r * -std::expm1(-mu * t)) / (mu - r);
    }
    return rho0 * std::exp(-mu * t) + a / mu * h;
  };
}

namespace {

ShotNoiseSpec scaled_spec(const ShotNoiseSpec& base, int n) {
  ShotNoiseSpec s = base;
  s.nu *= static_cast<double>(n);
  return s;
}

void guard_event_budget(const ScalingExperiment& exp, int n) {
  const double eb = exp.base_spec.shots.components[0].mean();
  const double r = exp.base_spec.decay[0];
  const double nu_n = exp.base_spec.nu * static_cast<double>(n);
  const double expected_events =
      (nu_n + nu_n * eb / r) * exp.horizon * static_cast<double>(exp.reps);
  if (expected_events > static_cast<double>(exp.event_budget))
    throw std::length_error("simulate_scaled: expected event count exceeds the configured budget");
}

// N(t) on the grid from (arrival, departure) pairs via a difference array.
void count_on_grid(const std::vector<double>& arrivals, const std::vector<double>& departures,
                   const std::vector<double>& grid, std::vector<int>& counts) {
  counts.assign(grid.size() + 1, 0);
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const auto lo = std::lower_bound(grid.begin(), grid.end(), arrivals[k]) - grid.begin();
    const auto hi = std::lower_bound(grid.begin(), grid.end(), departures[k]) - grid.begin();
    if (lo < hi) {
      ++counts[static_cast<std::size_t>(lo)];
      --counts[static_cast<std::size_t>(hi)];
    }
  }
  for (std::size_t i = 1; i < grid.size(); ++i) counts[i] += counts[i - 1];
}

}  // namespace

std::vector<std::vector<double>> simulate_scaled(const ScalingExperiment& exp, int n,
                                                 std::uint64_t master_seed, int threads) {
  exp.validate();
  guard_event_budget(exp, n);
  const ShotNoiseSpec spec_n = scaled_spec(exp.base_spec, n);
  const auto rho = fluid_path(exp.base_spec, exp.mu, 0.0);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<double> rho_grid(exp.time_grid.size());
  for (std::size_t g = 0; g < exp.time_grid.size(); ++g) rho_grid[g] = rho(exp.time_grid[g]);

  std::vector<std::vector<double>> rows(exp.reps);
  parallel_for_chunks(exp.reps, threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> departures;
    std::vector<int> counts;
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream shots = seed_split(master_seed, rep, StreamRole::Shots);
      RngStream thin = seed_split(master_seed, rep, StreamRole::Thinning);
      RngStream services = seed_split(master_seed, rep, StreamRole::Services);
      const auto path = simulate_path(spec_n, exp.horizon, shots);
      const auto arr = sample_thinning(path, 0, thin);
      departures.resize(arr.epochs.size());
      for (std::size_t k = 0; k < arr.epochs.size(); ++k)
        departures[k] = arr.epochs[k] + services.exponential(exp.mu);
      count_on_grid(arr.epochs, departures, exp.time_grid, counts);
      auto& row = rows[rep];
      row.resize(exp.time_grid.size());
      for (std::size_t g = 0; g < exp.time_grid.size(); ++g)
        row[g] = sqrt_n * (static_cast<double>(counts[g]) / static_cast<double>(n) - rho_grid[g]);
    }
  });
  return rows;
}

std::vector<std::vector<double>> simulate_limit(const LimitProcessParams& params,
                                                const std::vector<double>& grid, std::uint64_t reps,
                                                double delta, std::uint64_t master_seed,
                                                int threads) {
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("simulate_limit: grid must be nonempty and sorted");
  if (!(delta > 0)) throw std::invalid_argument("simulate_limit: delta must be > 0");
  const double horizon = grid.back();
  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(horizon / delta - 1e-12));
  // The displayed equation drives L_hat with sigma_lambda directly, but the
  // stated stationary variance sigma_lambda^2 (and the exact prelimit
  // variance of the centered intensity) require diffusion sqrt(2 r) sigma.
  const double lam_diffusion = std::sqrt(2.0 * params.r) * params.sigma_lambda;
  std::vector<std::size_t> grid_step(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    grid_step[g] = static_cast<std::size_t>(std::llround(grid[g] / delta));

  std::vector<std::vector<double>> rows(reps);
  parallel_for_chunks(reps, threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream rng = seed_split(master_seed, rep, StreamRole::LimitSde);
      double lam_hat = 0.0, n_hat = 0.0;
      auto& row = rows[rep];
      row.assign(grid.size(), 0.0);
      std::size_t g = 0;
      while (g < grid.size() && grid_step[g] == 0) row[g++] = 0.0;
      const double sq_delta = std::sqrt(delta);
      for (std::size_t step = 1; step <= n_steps && g < grid.size(); ++step) {
        const double u = static_cast<double>(step - 1) * delta;
        const double dw1 = sq_delta * rng.normal();
        const double dw2 = sq_delta * rng.normal();
        const double diffusion =
            std::sqrt(std::max(params.mean_intensity(u) + params.mu * params.rho(u), 0.0));
        n_hat += lam_hat * delta - params.mu * n_hat * delta + diffusion * dw2;
        lam_hat += -params.r * lam_hat * delta + lam_diffusion * dw1;
        while (g < grid.size() && grid_step[g] == step) row[g++] = n_hat;
      }
      while (g < grid.size()) row[g++] = n_hat;
    }
  });
  return rows;
}

double integrated_ou_variance(const LimitProcessParams& params, double t,
                              const QuadratureConfig& quad) {
  if (t <= 0) return 0.0;
  const double r = params.r;
  const double var_stat = params.sigma_lambda * params.sigma_lambda;
  // 2 int_0^t int_v^t Cov(L_hat(u), L_hat(v)) du dv with
  // Cov = var_stat (1 - e^{-2 r v}) e^{-r (u - v)} for v <= u.
  auto outer = [&](double v) {
    return var_stat * -std::expm1(-2.0 * r * v) * -std::expm1(-r * (t - v)) / r;
  };
  return 2.0 * integrate(outer, 0.0, t, quad).value;
}

std::vector<ArrivalFcltRow> arrival_fclt_check(const ScalingExperiment& exp, int n,
                                               std::uint64_t master_seed, int threads) {
  exp.validate();
  guard_event_budget(exp, n);
  const ShotNoiseSpec spec_n = scaled_spec(exp.base_spec, n);
  const auto params = limit_params(exp.base_spec, exp.mu);
  const double r = exp.base_spec.decay[0];
  const double a = exp.base_spec.nu * exp.base_spec.shots.components[0].mean() / r;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  const std::uint64_t n_chunks = (exp.reps + 511) / 512;
  std::vector<std::vector<Moments>> partial(n_chunks,
                                            std::vector<Moments>(exp.time_grid.size()));
  parallel_for_chunks(exp.reps, threads, [&](std::uint64_t c, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream shots = seed_split(master_seed, rep, StreamRole::Shots);
      RngStream thin = seed_split(master_seed, rep, StreamRole::Thinning);
      const auto path = simulate_path(spec_n, exp.horizon, shots);
      const auto arr = sample_thinning(path, 0, thin);
      for (std::size_t g = 0; g < exp.time_grid.size(); ++g) {
        const double t = exp.time_grid[g];
        const auto count = std::upper_bound(arr.epochs.begin(), arr.epochs.end(), t) -
                           arr.epochs.begin();
        const double mean_integral = a * (t - -std::expm1(-r * t) / r);
        partial[c][g].add(sqrt_n * (static_cast<double>(count) / static_cast<double>(n) -
                                    mean_integral));
      }
    }
  });

  std::vector<ArrivalFcltRow> rows(exp.time_grid.size());
  for (std::size_t g = 0; g < exp.time_grid.size(); ++g) {
    Moments m;
    for (std::uint64_t c = 0; c < n_chunks; ++c) m.merge(partial[c][g]);
    const double t = exp.time_grid[g];
    const double mean_integral = a * (t - -std::expm1(-r * t) / r);
    rows[g].t = t;
    rows[g].empirical_mean = m.mean;
    rows[g].mean_se = m.se_mean();
    rows[g].empirical_var = m.variance();
    rows[g].limit_var = mean_integral + integrated_ou_variance(params, t);
  }
  return rows;
}

std::vector<ConvergenceRow> convergence_report(const ScalingExperiment& exp,
                                               const std::vector<double>& t_stars,
                                               std::uint64_t limit_reps, double delta,
                                               std::uint64_t master_seed, int threads) {
  exp.validate();
  if (exp.n_values.size() < 2)
    throw std::invalid_argument("convergence_report: at least two n values required");
  for (double t : t_stars)
    if (std::find(exp.time_grid.begin(), exp.time_grid.end(), t) == exp.time_grid.end())
      throw std::invalid_argument("convergence_report: t_star must lie on the time grid");

  const auto params = limit_params(exp.base_spec, exp.mu);
  const auto limit_rows = simulate_limit(params, exp.time_grid, limit_reps, delta,
                                         master_seed ^ 0x9E3779B97F4A7C15ull, threads);

  std::vector<ConvergenceRow> out;
  for (int n : exp.n_values) {
    const auto rows = simulate_scaled(exp, n, master_seed + static_cast<std::uint64_t>(n), threads);
    for (double t : t_stars) {
      const std::size_t g = static_cast<std::size_t>(
          std::find(exp.time_grid.begin(), exp.time_grid.end(), t) - exp.time_grid.begin());
      std::vector<double> scaled(rows.size()), limit(limit_rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) scaled[i] = rows[i][g];
      for (std::size_t i = 0; i < limit_rows.size(); ++i) limit[i] = limit_rows[i][g];
      const auto ms = moments_of(scaled);
      const auto ml = moments_of(limit);
      ConvergenceRow row;
      row.n = n;
      row.t_star = t;
      row.ks = ks_statistic(scaled, limit);
      row.mean_gap = ms.mean - ml.mean;
      row.var_gap = std::abs(ms.variance() - ml.variance()) / ml.variance();
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace snq
