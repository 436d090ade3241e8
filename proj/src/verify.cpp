#include "snq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "snq/analytics.hpp"
#include "snq/coxarrivals.hpp"
#include "snq/csv.hpp"
#include "snq/fcltlab.hpp"
#include "snq/netsim.hpp"
#include "snq/parallel.hpp"
#include "snq/runner.hpp"

namespace snq {

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::vector<std::string> VerifyReport::covered_ops() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    for (const auto& op : c.ops)
      if (std::find(out.begin(), out.end(), op) == out.end()) out.push_back(op);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> VerifyReport::missing_ops() const {
  const auto covered = covered_ops();
  std::vector<std::string> missing;
  for (const auto& op : analytics_op_names())
    if (std::find(covered.begin(), covered.end(), op) == covered.end()) missing.push_back(op);
  return missing;
}

void VerifyReport::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["all_pass"] = all_pass();
  j["covered_ops"] = covered_ops();
  j["missing_ops"] = missing_ops();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json row;
    row["name"] = c.name;
    row["criterion"] = c.criterion;
    row["analytic"] = c.analytic;
    row["estimate"] = c.estimate;
    row["se"] = c.se;
    row["z"] = c.z;
    row["pass"] = c.pass;
    row["detail"] = c.detail;
    row["ops"] = c.ops;
    j["checks"].push_back(row);
  }
  os << j.dump(2) << "\n";
}

const std::vector<std::string>& analytics_op_names() {
  static const std::vector<std::string> names = {
      "generic_transform", "joint_transform", "mean_N", "var_N", "exact_mean_var_exponential",
      "occupancy_probs", "f_tandem", "f_m2", "network_transform_m1", "network_transform_m2",
      "cov_tandem", "cov_m1", "cov_m2", "pgf_moments", "loop_formulas"};
  return names;
}

namespace {

std::uint64_t scaled_reps(double scale, std::uint64_t pinned) {
  const double v = static_cast<double>(pinned) * scale;
  return std::max<std::uint64_t>(500, static_cast<std::uint64_t>(v));
}

std::uint64_t check_master(std::uint64_t seed, int k) {
  return seed + static_cast<std::uint64_t>(k) * 0x9E3779B97F4A7C15ull;
}

ShotNoiseSpec scalar_spec(const ExperimentConfig& cfg) {
  return ShotNoiseSpec::scalar(cfg.shotnoise.nu, cfg.shotnoise.decay[0],
                               cfg.shotnoise.shots.components[0], cfg.shotnoise.lambda0_at(0));
}

double service_rate(const ExperimentConfig& cfg, double fallback) {
  if (cfg.network && cfg.network->kind == NetworkKind::Single &&
      cfg.network->single_service.kind == ServiceLaw::Kind::Exponential)
    return cfg.network->single_service.p1;
  return fallback;
}

CheckResult z_check(std::string name, int criterion, double analytic, double estimate, double se,
                    double sigmas, std::vector<std::string> ops, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.criterion = criterion;
  c.analytic = analytic;
  c.estimate = estimate;
  c.se = se;
  c.z = se > 0 ? (estimate - analytic) / se : 0.0;
  c.pass = std::abs(c.z) <= sigmas;
  c.detail = detail.empty() ? ("|z| <= " + fmt_double(sigmas)) : std::move(detail);
  c.ops = std::move(ops);
  return c;
}

CheckResult tol_check(std::string name, int criterion, double achieved, double tolerance,
                      std::vector<std::string> ops, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.criterion = criterion;
  c.analytic = tolerance;
  c.estimate = achieved;
  c.pass = achieved <= tolerance;
  c.detail = detail.empty() ? "achieved <= tolerance" : std::move(detail);
  c.ops = std::move(ops);
  return c;
}

CheckResult flag_check(std::string name, int criterion, bool pass, double value,
                       std::vector<std::string> ops, std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.criterion = criterion;
  c.estimate = value;
  c.pass = pass;
  c.detail = std::move(detail);
  c.ops = std::move(ops);
  return c;
}

// ---------------------------------------------------------- criterion 1+2

void check_shotnoise_moments(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const std::uint64_t reps = scaled_reps(scale, 100000);
  const std::uint64_t master = check_master(cfg.seed, 1);
  const std::vector<double> ts = {0.5, 1.0, 2.0, 5.0};
  const double delta = 0.5;
  const double horizon = ts.back() + delta;

  std::vector<std::vector<double>> lev(ts.size(), std::vector<double>(reps));
  std::vector<std::vector<double>> lag(ts.size(), std::vector<double>(reps));
  parallel_for_chunks(reps, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream shots = seed_split(master, r, StreamRole::Shots);
      const auto path = simulate_path(spec, horizon, shots);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        lev[i][r] = path.level_at(ts[i]);
        lag[i][r] = path.level_at(ts[i] + delta);
      }
    }
  });
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto m = moments_of(lev[i]);
    rep.checks.push_back(z_check("shotnoise mean t=" + fmt_double(ts[i]), 1,
                                 mean_at(spec, ts[i])[0], m.mean, m.se_mean(), 4.0, {}));
    rep.checks.push_back(z_check("shotnoise variance t=" + fmt_double(ts[i]), 1,
                                 variance_at(spec, ts[i])[0], m.variance(), m.se_variance(), 4.0,
                                 {}));
    rep.checks.push_back(z_check("shotnoise lag-covariance t=" + fmt_double(ts[i]), 1,
                                 autocovariance(spec, ts[i], delta),
                                 sample_covariance(lev[i], lag[i]), covariance_se(lev[i], lag[i]),
                                 4.0, {}));
  }
}

void check_cross_covariance(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  ShotNoiseSpec spec;
  spec.nu = cfg.shotnoise.nu;
  spec.decay = {1.0, 2.0};
  spec.lambda0 = {0.0, 0.0};
  spec.shots.components = {ShotLaw::deterministic(1.0), ShotLaw::deterministic(1.0)};
  spec.shots.coupling = ShotLawVector::Coupling::Comonotone;
  const std::uint64_t reps = scaled_reps(scale, 100000);
  const std::uint64_t master = check_master(cfg.seed, 2);
  const std::vector<std::pair<double, double>> points = {{1, 0}, {1, 0.5}, {3, 0}, {3, 0.5}};
  const double horizon = 3.5;

  std::vector<std::vector<double>> a(points.size(), std::vector<double>(reps));
  std::vector<std::vector<double>> b(points.size(), std::vector<double>(reps));
  parallel_for_chunks(reps, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream shots = seed_split(master, r, StreamRole::Shots);
      const auto path = simulate_path(spec, horizon, shots);
      for (std::size_t i = 0; i < points.size(); ++i) {
        a[i][r] = path.level_at(points[i].first, 0);
        b[i][r] = path.level_at(points[i].first + points[i].second, 1);
      }
    }
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [t, d] = points[i];
    rep.checks.push_back(z_check(
        "cross-covariance t=" + fmt_double(t) + " delta=" + fmt_double(d), 2,
        cross_covariance(spec, t, d), sample_covariance(a[i], b[i]), covariance_se(a[i], b[i]),
        4.0, {}));
  }
}

// ------------------------------------------------------------ criterion 3

void check_single_queue_transform(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const ServiceLaw service = cfg.network && cfg.network->kind == NetworkKind::Single
                                 ? cfg.network->single_service
                                 : ServiceLaw::exponential(2.0);
  const double t = 2.0;
  const std::vector<std::pair<double, double>> zs = {{0.5, 0.0}, {0.7, 0.3}, {0.3, 0.1},
                                                     {0.9, 1.0}, {1.0, 0.5}, {0.6, 0.2}};
  const std::uint64_t reps = scaled_reps(scale, 1000000);
  const std::uint64_t master = check_master(cfg.seed, 3);

  std::vector<std::vector<double>> vals(zs.size(), std::vector<double>(reps));
  parallel_for_chunks(reps, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream shots = seed_split(master, r, StreamRole::Shots);
      RngStream thin = seed_split(master, r, StreamRole::Thinning);
      RngStream services = seed_split(master, r, StreamRole::Services);
      const auto path = simulate_path(spec, t, shots);
      const auto arr = sample_thinning(path, 0, thin);
      int n = 0;
      for (double u : arr.epochs)
        if (u + service.sample(services) > t) ++n;
      const double level = path.level_at(t);
      for (std::size_t q = 0; q < zs.size(); ++q)
        vals[q][r] = std::exp(n * std::log(zs[q].first) - zs[q].second * level);
    }
  });

  double worst_err = 0.0;
  for (std::size_t q = 0; q < zs.size(); ++q) {
    TransformQuery query{t, {zs[q].first}, {zs[q].second}};
    const auto res = joint_transform(spec, service, query, {1e-10, 1e-9});
    worst_err = std::max(worst_err, res.error_estimate);
    const auto m = moments_of(vals[q]);
    rep.checks.push_back(z_check(
        "joint transform z=" + fmt_double(zs[q].first) + " s=" + fmt_double(zs[q].second), 3,
        res.value, m.mean, m.se_mean(), 3.0, {"joint_transform", "occupancy_probs"}));
  }
  rep.checks.push_back(tol_check("transform quadrature self-reported error", 3, worst_err, 1e-6,
                                 {"joint_transform"}));

  // generic transform: f == 0 gives the marginal LST of L(t)
  auto zero = [](double) { return 0.0; };
  const double lst_s = 0.7;
  const double by_generic = generic_transform(spec, zero, t, lst_s).value;
  const double by_joint = joint_transform(spec, service, {t, {1.0}, {lst_s}}).value;
  rep.checks.push_back(tol_check("generic transform vs joint transform at z=1", 3,
                                 std::abs(by_generic - by_joint), 1e-8, {"generic_transform"}));
  if (spec.shots.components[0].kind == ShotLaw::Kind::Exponential && spec.lambda0_at(0) == 0.0) {
    // stationary LST of shot noise with exponential jumps is Gamma(nu/r, b)
    const double b = spec.shots.components[0].p1;
    const double closed = std::pow(1.0 + b * lst_s, -spec.nu / spec.decay[0]);
    const double far = generic_transform(spec, zero, 40.0, lst_s).value;
    rep.checks.push_back(tol_check("stationary intensity LST vs closed form", 3,
                                   std::abs(far - closed), 1e-6, {"generic_transform"}));
  }
}

// ------------------------------------------------------------ criterion 4

void check_exponential_closed_forms(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const double r = spec.decay[0];
  const double mu_neq = service_rate(cfg, 2.0) == r ? 2.0 * r : service_rate(cfg, 2.0);
  const double t = 1.0;
  const QuadratureConfig tight{1e-12, 1e-11, 1 << 12};

  for (double mu : {mu_neq, r}) {
    const auto [em, vm] = exact_mean_var_exponential(spec, mu, t);
    const ServiceLaw law = ServiceLaw::exponential(mu);
    const double qm = mean_N(spec, law, t, tight);
    const double qv = var_N(spec, law, t, tight);
    const std::string tag = mu == r ? " (mu=r)" : " (mu!=r)";
    rep.checks.push_back(tol_check("exact vs quadrature mean" + tag, 4,
                                   std::abs(em - qm) / std::abs(em), 1e-6,
                                   {"mean_N", "exact_mean_var_exponential"}));
    rep.checks.push_back(tol_check("exact vs quadrature variance" + tag, 4,
                                   std::abs(vm - qv) / std::abs(vm), 1e-6,
                                   {"var_N", "exact_mean_var_exponential"}));
  }

  // factorial-moment extraction from the transform
  {
    const ServiceLaw law = ServiceLaw::exponential(mu_neq);
    auto pgf = [&](double z) {
      return joint_transform(spec, law, {t, {z}, {0.0}}, tight).value;
    };
    const double m1 = pgf_moments(pgf, 1);
    const double m2 = pgf_moments(pgf, 2);
    const auto [em, vm] = exact_mean_var_exponential(spec, mu_neq, t);
    rep.checks.push_back(tol_check("pgf moment order 1 vs mean", 4, std::abs(m1 - em) / em, 1e-4,
                                   {"pgf_moments"}));
    const double var_from_pgf = m2 + m1 - m1 * m1;
    rep.checks.push_back(tol_check("pgf moments recombine to variance", 4,
                                   std::abs(var_from_pgf - vm) / vm, 1e-3, {"pgf_moments"}));
  }

  // Monte Carlo agreement for both branches
  const std::uint64_t reps = scaled_reps(scale, 100000);
  int branch = 0;
  for (double mu : {mu_neq, r}) {
    const std::uint64_t master = check_master(cfg.seed, 4) + static_cast<std::uint64_t>(++branch);
    std::vector<double> counts(reps);
    parallel_for_chunks(reps, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t rr = lo; rr < hi; ++rr) {
        RngStream shots = seed_split(master, rr, StreamRole::Shots);
        RngStream thin = seed_split(master, rr, StreamRole::Thinning);
        RngStream services = seed_split(master, rr, StreamRole::Services);
        const auto path = simulate_path(spec, t, shots);
        const auto arr = sample_thinning(path, 0, thin);
        int n = 0;
        for (double u : arr.epochs)
          if (u + services.exponential(mu) > t) ++n;
        counts[rr] = n;
      }
    });
    const auto m = moments_of(counts);
    const auto [em, vm] = exact_mean_var_exponential(spec, mu, t);
    const std::string tag = mu == r ? " (mu=r)" : " (mu!=r)";
    rep.checks.push_back(z_check("queue mean vs MC" + tag, 4, em, m.mean, m.se_mean(), 4.0,
                                 {"exact_mean_var_exponential"}));
    rep.checks.push_back(z_check("queue variance vs MC" + tag, 4, vm, m.variance(),
                                 m.se_variance(), 4.0, {"exact_mean_var_exponential"}));
  }
}

// ------------------------------------------------------------ criterion 5

void check_overdispersion(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const double horizon = 5.0;
  const std::uint64_t reps = scaled_reps(scale, 10000);
  const std::uint64_t master = check_master(cfg.seed, 5);
  const auto est = dispersion_index(spec, horizon, std::max<std::uint64_t>(reps, 1000), master,
                                    cfg.threads);
  rep.checks.push_back(flag_check("dispersion index exceeds unity", 5,
                                  est.value - 1.0 > 3.0 * est.se, est.value, {},
                                  "estimate - 1 > 3 SE (SE=" + fmt_double(est.se) + ")"));
  const double analytic = dispersion_index_analytic(spec, horizon);
  rep.checks.push_back(z_check("dispersion index vs total-variance oracle", 5, analytic, est.value,
                               est.se, 4.0, {}));

  const ServiceLaw law =
      cfg.network && cfg.network->kind == NetworkKind::Single ? cfg.network->single_service
                                                              : ServiceLaw::exponential(2.0);
  for (double t : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    const double m = mean_N(spec, law, t);
    const double v = var_N(spec, law, t);
    rep.checks.push_back(flag_check("Var N > E N at t=" + fmt_double(t), 5, v > m, v - m,
                                    {"mean_N", "var_N"}, "variance exceeds mean (overdispersion)"));
  }
}

// ------------------------------------------------------------ criterion 6

void check_network_transforms(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const std::uint64_t reps = scaled_reps(scale, 200000);
  const ServiceLaw svc1 = ServiceLaw::exponential(2.0);
  const ServiceLaw svc2 = ServiceLaw::exponential(3.0);

  // --- M1 with two coupled components
  {
    ShotNoiseSpec spec;
    spec.nu = cfg.shotnoise.nu;
    spec.decay = {1.0, 2.0};
    spec.lambda0 = {0.0, 0.0};
    spec.shots.components = {ShotLaw::exponential(1.0), ShotLaw::exponential(1.0)};
    spec.shots.coupling = ShotLawVector::Coupling::Independent;

    NetworkSpec net;
    net.nodes = {{1, svc1}, {2, svc2}};
    net.sources = {{1, 0}, {2, 1}};
    net.dependence = Dependence::M1;

    std::vector<WeightedTandem> tandems = {{{{svc1}, 0}, 1.0}, {{{svc2}, 1}, 1.0}};
    TransformQuery q{2.0, {0.6, 0.7}, {0.1, 0.2}};
    const auto analytic = network_transform_m1(spec, tandems, q);
    const auto mc = estimate_joint_pgf(net, spec, q, reps, check_master(cfg.seed, 6), cfg.threads);
    rep.checks.push_back(z_check("network transform M1 (d=2) vs MC", 6, analytic.value, mc.value,
                                 mc.se, 3.0, {"network_transform_m1", "f_tandem"}));
    TransformQuery unit{2.0, {1.0, 1.0}, {0.0, 0.0}};
    rep.checks.push_back(tol_check("network transform M1 at z=1, s=0", 6,
                                   std::abs(network_transform_m1(spec, tandems, unit).value - 1.0),
                                   1e-12, {"network_transform_m1"}));
  }

  // --- M2 with two single-node tandems
  {
    const auto spec = scalar_spec(cfg);
    NetworkSpec net;
    net.nodes = {{1, svc1}, {2, svc2}};
    net.sources = {{1, 0}, {2, 0}};
    net.dependence = Dependence::M2;

    std::vector<WeightedTandem> tandems = {{{{svc1}, 0}, 1.0}, {{{svc2}, 0}, 1.0}};
    TransformQuery q{2.0, {0.6, 0.7}, {0.3}};
    const auto analytic = network_transform_m2(spec, tandems, q);
    const auto mc =
        estimate_joint_pgf(net, spec, q, reps, check_master(cfg.seed, 6) + 1, cfg.threads);
    rep.checks.push_back(z_check("network transform M2 vs MC", 6, analytic.value, mc.value, mc.se,
                                 3.0, {"network_transform_m2", "f_m2", "f_tandem"}));
    TransformQuery unit{2.0, {1.0, 1.0}, {0.0}};
    rep.checks.push_back(tol_check("network transform M2 at z=1, s=0", 6,
                                   std::abs(network_transform_m2(spec, tandems, unit).value - 1.0),
                                   1e-12, {"network_transform_m2", "f_m2"}));
  }

  // --- two-node tandem
  {
    const auto spec = scalar_spec(cfg);
    NetworkSpec net;
    net.nodes = {{1, svc1}, {2, svc2}};
    net.edges = {{1, 2, 1.0}};
    net.sources = {{1, 0}};

    std::vector<WeightedTandem> tandems = {{{{svc1, svc2}, 0}, 1.0}};
    TransformQuery q{2.0, {0.7, 0.3}, {0.2}};
    const auto analytic = network_transform_m1(spec, tandems, q);
    const auto mc =
        estimate_joint_pgf(net, spec, q, reps, check_master(cfg.seed, 6) + 2, cfg.threads);
    rep.checks.push_back(z_check("tandem transform vs MC", 6, analytic.value, mc.value, mc.se, 3.0,
                                 {"network_transform_m1", "occupancy_probs", "f_tandem"}));

    // structural reduction to the single-queue transform
    std::vector<WeightedTandem> single = {{{{svc1}, 0}, 1.0}};
    TransformQuery qs{2.0, {0.55}, {0.4}};
    const double a = network_transform_m1(spec, single, qs).value;
    const double b = joint_transform(spec, svc1, qs).value;
    rep.checks.push_back(tol_check("d=1 network transform reduces to joint transform", 6,
                                   std::abs(a - b), 1e-8,
                                   {"network_transform_m1", "joint_transform"}));
  }
}

// ------------------------------------------------------------ criterion 7

struct PairBatch {
  std::vector<std::vector<double>> n1, n2;  // per time point, per replication
};

// counts in two single-stage queues driven per `mode`: 0 = tandem (one stream,
// node 2 downstream of node 1), 1 = M1 (per-component streams), 2 = M2
// (shared stream, independent services)
PairBatch pair_counts(const ShotNoiseSpec& spec, const ServiceLaw& svc1, const ServiceLaw& svc2,
                      const std::vector<double>& ts, int mode, std::uint64_t reps,
                      std::uint64_t master, int threads) {
  PairBatch out;
  out.n1.assign(ts.size(), std::vector<double>(reps));
  out.n2.assign(ts.size(), std::vector<double>(reps));
  const double horizon = ts.back();
  parallel_for_chunks(reps, threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream shots = seed_split(master, r, StreamRole::Shots);
      RngStream services = seed_split(master, r, StreamRole::Services);
      const auto path = simulate_path(spec, horizon, shots);
      std::vector<std::pair<double, double>> stay1, stay2;  // (entry, exit)
      if (mode == 0) {
        RngStream thin = seed_split(master, r, StreamRole::Thinning);
        const auto arr = sample_thinning(path, 0, thin);
        for (double u : arr.epochs) {
          const double j1 = svc1.sample(services);
          const double j2 = svc2.sample(services);
          stay1.push_back({u, u + j1});
          stay2.push_back({u + j1, u + j1 + j2});
        }
      } else if (mode == 1) {
        RngStream thin1 = seed_split(master, r, role_id(StreamRole::Thinning, 0));
        RngStream thin2 = seed_split(master, r, role_id(StreamRole::Thinning, 1));
        for (double u : sample_thinning(path, 0, thin1).epochs)
          stay1.push_back({u, u + svc1.sample(services)});
        for (double u : sample_thinning(path, 1, thin2).epochs)
          stay2.push_back({u, u + svc2.sample(services)});
      } else {
        RngStream thin = seed_split(master, r, StreamRole::Thinning);
        const auto arr = sample_thinning(path, 0, thin);
        for (double u : arr.epochs) {
          stay1.push_back({u, u + svc1.sample(services)});
          stay2.push_back({u, u + svc2.sample(services)});
        }
      }
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        int c1 = 0, c2 = 0;
        for (const auto& [in, outt] : stay1)
          if (in <= t && t < outt) ++c1;
        for (const auto& [in, outt] : stay2)
          if (in <= t && t < outt) ++c2;
        out.n1[i][r] = c1;
        out.n2[i][r] = c2;
      }
    }
  });
  return out;
}

void check_covariances(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const std::uint64_t reps = scaled_reps(scale, 100000);
  const ServiceLaw svc1 = ServiceLaw::exponential(2.0);
  const ServiceLaw svc2 = ServiceLaw::exponential(3.0);
  const std::vector<double> ts = {1.0, 2.0, 3.0};

  // tandem
  {
    const auto spec = scalar_spec(cfg);
    const auto batch =
        pair_counts(spec, svc1, svc2, ts, 0, reps, check_master(cfg.seed, 7), cfg.threads);
    for (std::size_t i = 0; i < ts.size(); ++i)
      rep.checks.push_back(z_check("cov tandem t=" + fmt_double(ts[i]), 7,
                                   cov_tandem(spec, svc1, svc2, ts[i]),
                                   sample_covariance(batch.n1[i], batch.n2[i]),
                                   covariance_se(batch.n1[i], batch.n2[i]), 4.0, {"cov_tandem"}));
  }

  // M1 with distinct decay rates and comonotone shots
  {
    ShotNoiseSpec spec;
    spec.nu = cfg.shotnoise.nu;
    spec.decay = {1.0, 2.0};
    spec.lambda0 = {0.0, 0.0};
    spec.shots.components = {ShotLaw::exponential(1.0), ShotLaw::exponential(1.0)};
    spec.shots.coupling = ShotLawVector::Coupling::Comonotone;
    const auto batch =
        pair_counts(spec, svc1, svc2, ts, 1, reps, check_master(cfg.seed, 7) + 1, cfg.threads);
    for (std::size_t i = 0; i < ts.size(); ++i)
      rep.checks.push_back(z_check("cov M1 t=" + fmt_double(ts[i]), 7,
                                   cov_m1(spec, svc1, svc2, ts[i]),
                                   sample_covariance(batch.n1[i], batch.n2[i]),
                                   covariance_se(batch.n1[i], batch.n2[i]), 4.0, {"cov_m1"}));
  }

  // M2
  {
    const auto spec = scalar_spec(cfg);
    const auto batch =
        pair_counts(spec, svc1, svc2, ts, 2, reps, check_master(cfg.seed, 7) + 2, cfg.threads);
    for (std::size_t i = 0; i < ts.size(); ++i)
      rep.checks.push_back(z_check("cov M2 t=" + fmt_double(ts[i]), 7,
                                   cov_m2(spec, svc1, svc2, ts[i]),
                                   sample_covariance(batch.n1[i], batch.n2[i]),
                                   covariance_se(batch.n1[i], batch.n2[i]), 4.0, {"cov_m2"}));
  }

  // correlation ordering with matched marginal intensities
  {
    const auto scalar = scalar_spec(cfg);
    ShotNoiseSpec matched;  // two identical, perfectly coupled components
    matched.nu = scalar.nu;
    matched.decay = {scalar.decay[0], scalar.decay[0]};
    matched.lambda0 = {0.0, 0.0};
    matched.shots.components = {scalar.shots.components[0], scalar.shots.components[0]};
    matched.shots.coupling = ShotLawVector::Coupling::Comonotone;

    const auto b1 =
        pair_counts(matched, svc1, svc2, ts, 1, reps, check_master(cfg.seed, 7) + 3, cfg.threads);
    const auto b2 =
        pair_counts(scalar, svc1, svc2, ts, 2, reps, check_master(cfg.seed, 7) + 4, cfg.threads);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double c1 = pearson_correlation(b1.n1[i], b1.n2[i]);
      const double c2 = pearson_correlation(b2.n1[i], b2.n2[i]);
      const double se = std::sqrt((1 - c1 * c1) * (1 - c1 * c1) + (1 - c2 * c2) * (1 - c2 * c2)) /
                        std::sqrt(static_cast<double>(reps));
      rep.checks.push_back(flag_check(
          "corr(M1) <= corr(M2) at t=" + fmt_double(ts[i]), 7, c1 <= c2 + 4.0 * se, c2 - c1,
          {"cov_m1", "cov_m2"},
          "corr(M1)=" + fmt_double(c1) + " corr(M2)=" + fmt_double(c2) + " (4 SE overlap rule)"));
    }

    // the analytic gap equals the simultaneous-survival integral
    const double t = 2.0;
    const double gap = cov_m2(scalar, svc1, svc2, t) - cov_m1(matched, svc1, svc2, t);
    const double direct = integrate(
                              [&](double u) {
                                return mean_at(scalar, u)[0] * svc1.survival(t - u) *
                                       svc2.survival(t - u);
                              },
                              0.0, t, QuadratureConfig{})
                              .value;
    rep.checks.push_back(tol_check("cov(M2) - cov(M1) equals joint-survival integral", 7,
                                   std::abs(gap - direct), 1e-8, {"cov_m1", "cov_m2"}));
  }
}

// ------------------------------------------------------------ criterion 8

void check_loop(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const double eta = 0.5, mu = 1.0, t = 3.0;
  const ServiceLaw svc = ServiceLaw::exponential(mu);
  const std::uint64_t reps = scaled_reps(scale, 100000);
  const std::uint64_t master = check_master(cfg.seed, 8);

  std::vector<double> n1(reps), n2(reps);
  parallel_for_chunks(reps, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      const auto rec = simulate_loop(eta, svc, svc, spec, t, master, r);
      n1[r] = rec.final_counts[0];
      n2[r] = rec.final_counts[1];
    }
  });
  const auto m1 = moments_of(n1);
  const auto m2 = moments_of(n2);
  rep.checks.push_back(z_check("loop mean count node 1", 8, loop_mean_count(spec, eta, mu, t, 1),
                               m1.mean, m1.se_mean(), 4.0, {"loop_formulas"}));
  rep.checks.push_back(z_check("loop mean count node 2", 8, loop_mean_count(spec, eta, mu, t, 2),
                               m2.mean, m2.se_mean(), 4.0, {"loop_formulas"}));

  // series vs hyperbolic closed forms
  for (double e : {0.1, 0.5, 0.9}) {
    double worst = 0.0;
    for (double a = 0.0; a <= 10.0; a += 0.25) {
      worst = std::max(worst, std::abs(loop_prob_node1(e, mu, a) -
                                       loop_prob_node1_hyperbolic(e, mu, a)));
      worst = std::max(worst, std::abs(loop_prob_node2(e, mu, a) -
                                       loop_prob_node2_hyperbolic(e, mu, a)));
    }
    rep.checks.push_back(tol_check("loop series vs hyperbolic identity eta=" + fmt_double(e), 8,
                                   worst, 1e-10, {"loop_formulas"}));
  }

  // mean total sojourn of one job: (E J1 + E J2) / (1 - eta)
  {
    const std::uint64_t jobs = scaled_reps(scale, 100000);
    Moments ms;
    RngStream rng = seed_split(master + 1, 0, StreamRole::Services);
    for (std::uint64_t j = 0; j < jobs; ++j) {
      double sojourn = svc.sample(rng) + svc.sample(rng);
      while (rng.uniform01() < eta) sojourn += svc.sample(rng) + svc.sample(rng);
      ms.add(sojourn);
    }
    rep.checks.push_back(z_check("loop mean sojourn", 8, (1.0 / mu + 1.0 / mu) / (1.0 - eta),
                                 ms.mean, ms.se_mean(), 4.0, {"loop_formulas"}));
  }
}

// ------------------------------------------------------------ criterion 9

void check_fclt(const ExperimentConfig& cfg, double scale, VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const double mu = service_rate(cfg, 2.0);
  const std::uint64_t master = check_master(cfg.seed, 9);

  // fluid path against the closed-form transient mean
  {
    const auto rho = fluid_path(spec, mu, 0.0);
    double worst = 0.0;
    for (double t = 0.0; t <= 5.0; t += 0.1) {
      const auto [em, vm] = exact_mean_var_exponential(spec, mu, t);
      worst = std::max(worst, std::abs(rho(t) - em));
    }
    rep.checks.push_back(tol_check("fluid path equals transient mean", 9, worst, 1e-10,
                                   {"exact_mean_var_exponential"}));
  }

  ScalingExperiment exp;
  exp.base_spec = spec;
  exp.mu = mu;
  exp.n_values = {10, 1000};
  exp.horizon = 2.0;
  exp.time_grid = {0.5, 1.0, 1.5, 2.0};
  exp.reps = scaled_reps(scale, 4000);

  const auto params = limit_params(spec, mu);
  const auto limit_rows =
      simulate_limit(params, exp.time_grid, scaled_reps(scale, 20000), 1.0 / 256.0, master + 17,
                     cfg.threads);
  std::vector<double> limit_t2(limit_rows.size());
  for (std::size_t i = 0; i < limit_rows.size(); ++i) limit_t2[i] = limit_rows[i].back();
  const auto lim_m = moments_of(limit_t2);

  double ks10 = 0.0, ks1000 = 0.0, vargap = 0.0, mean_z = 0.0;
  for (int n : exp.n_values) {
    const auto rows = simulate_scaled(exp, n, master + static_cast<std::uint64_t>(n), cfg.threads);
    std::vector<double> at_t2(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) at_t2[i] = rows[i].back();
    const double ks = ks_statistic(at_t2, limit_t2);
    if (n == 10) ks10 = ks;
    if (n == 1000) {
      ks1000 = ks;
      const auto m = moments_of(at_t2);
      vargap = std::abs(m.variance() - lim_m.variance()) / lim_m.variance();
      mean_z = m.mean / m.se_mean();
    }
  }
  rep.checks.push_back(flag_check("KS distance decreases from n=10 to n=1000", 9, ks1000 < ks10,
                                  ks1000, {},
                                  "KS(10)=" + fmt_double(ks10) + " KS(1000)=" + fmt_double(ks1000)));
  rep.checks.push_back(tol_check("variance gap vs limit process at n=1000", 9, vargap, 0.10, {}));
  rep.checks.push_back(flag_check("scaled process is centered at n=1000", 9,
                                  std::abs(mean_z) <= 4.0, mean_z, {}, "|mean|/SE <= 4"));

  // arrival FCLT variance (the limit combines the Poisson fluctuation of the
  // Cox stream with the integrated intensity fluctuation)
  {
    ScalingExperiment aexp = exp;
    aexp.horizon = 5.0;
    aexp.time_grid = {1.0, 2.0, 5.0};
    aexp.reps = scaled_reps(scale, 2500);
    const auto rows = arrival_fclt_check(aexp, 1000, master + 29, cfg.threads);
    for (const auto& row : rows) {
      rep.checks.push_back(tol_check("arrival FCLT variance t=" + fmt_double(row.t), 9,
                                     std::abs(row.empirical_var - row.limit_var) / row.limit_var,
                                     0.15, {}));
      rep.checks.push_back(flag_check("arrival FCLT centering t=" + fmt_double(row.t), 9,
                                      std::abs(row.empirical_mean) <= 4.0 * row.mean_se,
                                      row.empirical_mean, {}, "|mean| <= 4 SE"));
    }
  }
}

// ----------------------------------------------------------- criterion 10

void check_determinism_and_equivalence(const ExperimentConfig& cfg, double scale,
                                       VerifyReport& rep) {
  const auto spec = scalar_spec(cfg);
  const std::uint64_t reps = scaled_reps(scale, 10000);
  const std::uint64_t master = check_master(cfg.seed, 10);
  const double horizon = 5.0;

  std::vector<double> thin_counts(reps), inv_counts(reps);
  parallel_for_chunks(reps, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t r = lo; r < hi; ++r) {
      RngStream shots = seed_split(master, r, StreamRole::Shots);
      RngStream thin = seed_split(master, r, StreamRole::Thinning);
      RngStream inv = seed_split(master, r, StreamRole::Inversion);
      const auto path = simulate_path(spec, horizon, shots);
      thin_counts[r] = static_cast<double>(sample_thinning(path, 0, thin).epochs.size());
      // a fresh path keeps the two samplers' counts independent
      RngStream shots2 = seed_split(master + 1, r, StreamRole::Shots);
      const auto path2 = simulate_path(spec, horizon, shots2);
      inv_counts[r] = static_cast<double>(sample_inversion(path2, 0, inv).epochs.size());
    }
  });
  const double d = ks_statistic(thin_counts, inv_counts);
  const double crit = ks_critical_value(reps, reps, 0.01);
  rep.checks.push_back(flag_check("thinning vs inversion arrival counts (KS)", 10, d < crit, d, {},
                                  "KS=" + fmt_double(d) + " < critical(0.01)=" + fmt_double(crit)));

  // identical (config, seed) reruns must be byte-identical
  namespace fs = std::filesystem;
  ExperimentConfig tiny;
  tiny.mode = RunMode::Simulate;
  tiny.seed = cfg.seed;
  tiny.reps = 2;
  tiny.horizon = 3.0;
  tiny.threads = cfg.threads;
  tiny.shotnoise = cfg.shotnoise;
  NetworkConfig net;
  net.kind = NetworkKind::Single;
  net.single_service = ServiceLaw::exponential(2.0);
  tiny.network = net;

  const auto base = fs::temp_directory_path() / ("snq-determinism-" + std::to_string(cfg.seed));
  bool identical = true;
  std::string why = "two runs produced byte-identical artifacts";
  try {
    for (int run = 0; run < 2; ++run) {
      tiny.output_dir = (base / std::to_string(run)).string();
      fs::remove_all(tiny.output_dir);
      fs::create_directories(tiny.output_dir);
      write_simulate_artifacts(tiny);
    }
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(base / "0"))
      if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), base / "0"));
    std::sort(rel.begin(), rel.end());
    if (rel.empty()) {
      identical = false;
      why = "no artifacts written";
    }
    for (const auto& p : rel) {
      std::ifstream a(base / "0" / p, std::ios::binary), b(base / "1" / p, std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      if (sa.str() != sb.str()) {
        identical = false;
        why = "file " + p.string() + " differs between runs";
        break;
      }
    }
    fs::remove_all(base);
  } catch (const std::exception& e) {
    identical = false;
    why = e.what();
  }
  rep.checks.push_back(flag_check("identical (config, seed) reruns are byte-identical", 10,
                                  identical, identical ? 1.0 : 0.0, {}, why));
}

}  // namespace

VerifyReport run_verify(const ExperimentConfig& cfg, double rep_scale) {
  VerifyReport rep;
  check_shotnoise_moments(cfg, rep_scale, rep);
  check_cross_covariance(cfg, rep_scale, rep);
  check_single_queue_transform(cfg, rep_scale, rep);
  check_exponential_closed_forms(cfg, rep_scale, rep);
  check_overdispersion(cfg, rep_scale, rep);
  check_network_transforms(cfg, rep_scale, rep);
  check_covariances(cfg, rep_scale, rep);
  check_loop(cfg, rep_scale, rep);
  check_fclt(cfg, rep_scale, rep);
  check_determinism_and_equivalence(cfg, rep_scale, rep);

  CheckResult coverage;
  coverage.name = "verify coverage of analytics operations";
  coverage.criterion = 0;
  const auto missing = rep.missing_ops();
  coverage.pass = missing.empty();
  coverage.estimate = static_cast<double>(rep.covered_ops().size());
  coverage.analytic = static_cast<double>(analytics_op_names().size());
  std::string detail = "every analytics operation exercised at least once";
  if (!missing.empty()) {
    detail = "missing:";
    for (const auto& op : missing) detail += " " + op;
  }
  coverage.detail = detail;
  rep.checks.push_back(coverage);
  return rep;
}

}  // namespace snq
