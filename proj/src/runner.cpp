#include "snq/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "snq/analytics.hpp"
#include "snq/coxarrivals.hpp"
#include "snq/csv.hpp"
#include "snq/fcltlab.hpp"
#include "snq/netsim.hpp"
#include "snq/verify.hpp"

namespace snq {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream os(fs::path(dir) / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file " + name + " under " + dir);
  return os;
}

// z for a decomposed tandem node is the z of the original network node.
std::vector<WeightedTandem> weighted_tandems(const std::vector<PathDecomposition>& paths) {
  std::vector<WeightedTandem> out;
  for (const auto& p : paths) out.push_back({p.tandem, p.probability});
  return out;
}

TransformQuery expand_query_for_paths(const NetworkSpec& net,
                                      const std::vector<PathDecomposition>& paths,
                                      const TransformQuery& q) {
  TransformQuery expanded;
  expanded.t = q.t;
  expanded.s = q.s;
  for (const auto& p : paths)
    for (int id : p.node_ids) expanded.z.push_back(q.z[net.node_index(id)]);
  return expanded;
}

}  // namespace

void write_simulate_artifacts(const ExperimentConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const NetworkSpec net = cfg.network->as_network_spec();
  for (std::uint64_t rep = 0; rep < cfg.reps; ++rep) {
    const std::string prefix = "rep" + std::to_string(rep) + "_";
    {
      RngStream shots = seed_split(cfg.seed, rep, StreamRole::Shots);
      const auto path = simulate_path(cfg.shotnoise, cfg.horizon, shots);
      auto os = open_out(cfg.output_dir, prefix + "path.csv");
      path.write_csv(os);
      if (!net.loop_eta) {
        std::uint32_t k = 0;
        for (const auto& [id, comp] : net.sources) {
          RngStream thin =
              seed_split(cfg.seed, rep,
                         net.dependence == Dependence::M2
                             ? role_id(StreamRole::Thinning)
                             : role_id(StreamRole::Thinning, k));
          const auto arr = sample_thinning(path, net.dependence == Dependence::M2 ? 0 : comp, thin);
          auto aos = open_out(cfg.output_dir,
                              prefix + "arrivals_node" + std::to_string(id) + ".csv");
          arr.write_csv(aos);
          ++k;
        }
      } else {
        RngStream thin = seed_split(cfg.seed, rep, StreamRole::Thinning);
        const auto arr = sample_thinning(path, 0, thin);
        auto aos = open_out(cfg.output_dir, prefix + "arrivals_node1.csv");
        arr.write_csv(aos);
      }
    }
    const auto rec = simulate(net, cfg.shotnoise, cfg.horizon, cfg.seed, rep);
    auto oos = open_out(cfg.output_dir, prefix + "occupancy.csv");
    rec.write_csv(oos);
    auto sos = open_out(cfg.output_dir, prefix + "summary.json");
    rec.write_summary_json(sos);
  }
}

void write_analyze_artifacts(const ExperimentConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const NetworkConfig& net = *cfg.network;
  auto os = open_out(cfg.output_dir, "queries.csv");

  const std::size_t nz = cfg.queries.front().z.size();
  const std::size_t ns = cfg.queries.front().s.size();
  os << "t";
  for (std::size_t i = 1; i <= nz; ++i) os << ",z" << i;
  for (std::size_t i = 1; i <= ns; ++i) os << ",s" << i;
  os << ",value,abs_err_estimate\n";

  for (const auto& q : cfg.queries) {
    if (q.z.size() != nz || q.s.size() != ns)
      throw ConfigError("queries", "all queries must share the same dimensions");
    TransformResult res;
    switch (net.kind) {
      case NetworkKind::Single:
        res = joint_transform(cfg.shotnoise, net.single_service, q);
        break;
      case NetworkKind::Tandem:
        res = network_transform_m1(cfg.shotnoise, {{net.tandem, 1.0}}, q);
        break;
      case NetworkKind::Dag: {
        const auto paths = decompose(net.dag);
        const auto tandems = weighted_tandems(paths);
        const auto expanded = expand_query_for_paths(net.dag, paths, q);
        res = net.dag.dependence == Dependence::M2
                  ? network_transform_m2(cfg.shotnoise, tandems, expanded)
                  : network_transform_m1(cfg.shotnoise, tandems, expanded);
        break;
      }
      case NetworkKind::Loop: {
        const auto& s1 = net.loop_services[0];
        const auto& s2 = net.loop_services[1];
        if (s1.kind != ServiceLaw::Kind::Exponential || s2.kind != ServiceLaw::Kind::Exponential ||
            s1.p1 != s2.p1)
          throw ConfigError("network.services",
                            "loop transform evaluation requires exponential services with one rate");
        if (q.z.size() != 2 || q.s.size() != 1)
          throw ConfigError("queries", "loop queries take two z entries and one s entry");
        const double mu = s1.p1, eta = net.loop_eta, t = q.t;
        const double z1 = q.z[0], z2 = q.z[1];
        auto f = [=](double u) { return loop_f(eta, mu, t - u, z1, z2) - 1.0; };
        res = generic_transform(cfg.shotnoise, f, t, q.s[0]);
        break;
      }
    }
    os << fmt_double(q.t);
    for (double z : q.z) os << "," << fmt_double(z);
    for (double s : q.s) os << "," << fmt_double(s);
    os << "," << fmt_double(res.value) << "," << fmt_double(res.error_estimate) << "\n";
  }
}

void write_fclt_artifacts(const ExperimentConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const FcltConfig& f = *cfg.fclt;
  ScalingExperiment exp;
  exp.base_spec = ShotNoiseSpec::scalar(cfg.shotnoise.nu, cfg.shotnoise.decay[0],
                                        cfg.shotnoise.shots.components[0]);
  exp.mu = f.mu;
  exp.n_values = f.n_values;
  exp.time_grid = f.time_grid;
  exp.horizon = f.time_grid.back();
  exp.reps = f.reps;

  {
    const auto rows = convergence_report(exp, f.t_stars, f.limit_reps, f.delta, cfg.seed,
                                         cfg.threads);
    auto os = open_out(cfg.output_dir, "convergence.csv");
    os << "n,t_star,ks,mean_gap,var_gap\n";
    for (const auto& r : rows)
      os << r.n << "," << fmt_double(r.t_star) << "," << fmt_double(r.ks) << ","
         << fmt_double(r.mean_gap) << "," << fmt_double(r.var_gap) << "\n";
  }
  {
    const auto rows = arrival_fclt_check(exp, exp.n_values.back(), cfg.seed + 1, cfg.threads);
    auto os = open_out(cfg.output_dir, "arrival_fclt.csv");
    os << "t,empirical_mean,mean_se,empirical_var,limit_var\n";
    for (const auto& r : rows)
      os << fmt_double(r.t) << "," << fmt_double(r.empirical_mean) << "," << fmt_double(r.mean_se)
         << "," << fmt_double(r.empirical_var) << "," << fmt_double(r.limit_var) << "\n";
  }
  {
    const auto rho = fluid_path(exp.base_spec, exp.mu, 0.0);
    auto os = open_out(cfg.output_dir, "fluid.csv");
    os << "t,rho\n";
    for (double t : exp.time_grid) os << fmt_double(t) << "," << fmt_double(rho(t)) << "\n";
  }
  {
    nlohmann::json manifest;
    manifest["seed"] = cfg.seed;
    manifest["delta"] = f.delta;
    manifest["reps"] = f.reps;
    manifest["limit_reps"] = f.limit_reps;
    manifest["n_values"] = f.n_values;
    manifest["time_grid"] = f.time_grid;
    manifest["t_stars"] = f.t_stars;
    manifest["mu"] = f.mu;
    auto os = open_out(cfg.output_dir, "manifest.json");
    os << manifest.dump(2) << "\n";
  }
}

int run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case RunMode::Simulate:
      write_simulate_artifacts(cfg);
      return 0;
    case RunMode::Analyze:
      write_analyze_artifacts(cfg);
      return 0;
    case RunMode::Fclt:
      write_fclt_artifacts(cfg);
      return 0;
    case RunMode::Verify: {
      const auto report = run_verify(cfg);
      ensure_dir(cfg.output_dir);
      auto os = open_out(cfg.output_dir, "verify_report.json");
      report.write_json(os);
      for (const auto& c : report.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  analytic="
                  << fmt_double(c.analytic) << " estimate=" << fmt_double(c.estimate)
                  << (c.se > 0 ? " z=" + fmt_double(c.z) : "") << "\n";
      std::cout << (report.all_pass() ? "verify: all checks passed"
                                      : "verify: CHECK FAILURES PRESENT")
                << " (" << report.checks.size() << " checks)\n";
      return report.all_pass() ? 0 : 1;
    }
  }
  return 0;
}

}  // namespace snq
