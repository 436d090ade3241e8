#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "snq/config.hpp"
#include "snq/quadrature.hpp"
#include "snq/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t reps = 0;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file (JSON)")->required();
  cmd->add_option("--seed", flags.seed, "override the config seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--reps", flags.reps, "override the replication count");
  cmd->add_option("--out", flags.out_dir, "override the output directory");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware concurrency)");
}

int run(snq::RunMode mode, const CommonFlags& flags) {
  auto cfg = snq::ExperimentConfig::from_file(flags.config_path);
  cfg.mode = mode;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.reps > 0) cfg.reps = flags.reps;
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.threads >= 0) cfg.threads = flags.threads;
  cfg.validate();
  return snq::run_experiment(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shot-noise Cox queueing toolkit: simulation and closed-form analytics"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "sample paths, arrivals and occupancy records");
  auto* analyze = app.add_subcommand("analyze", "evaluate transform/moment queries to CSV");
  auto* fclt = app.add_subcommand("fclt", "heavy-traffic scaling experiments");
  auto* verify = app.add_subcommand("verify", "run the formula-vs-simulation check suite");
  for (auto* cmd : {simulate, analyze, fclt, verify}) add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  snq::RunMode mode = snq::RunMode::Verify;
  if (simulate->parsed()) mode = snq::RunMode::Simulate;
  if (analyze->parsed()) mode = snq::RunMode::Analyze;
  if (fclt->parsed()) mode = snq::RunMode::Fclt;

  try {
    return run(mode, flags);
  } catch (const snq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const snq::QuadratureError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
