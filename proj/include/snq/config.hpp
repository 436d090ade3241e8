#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snq/fcltlab.hpp"
#include "snq/netsim.hpp"
#include "snq/shotnoise.hpp"

namespace snq {

// Schema violation; message carries the offending field path and reason.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& reason)
      : std::runtime_error(field + ": " + reason), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class RunMode { Simulate, Analyze, Fclt, Verify };

enum class NetworkKind { Single, Tandem, Dag, Loop };

struct NetworkConfig {
  NetworkKind kind = NetworkKind::Single;
  ServiceLaw single_service = ServiceLaw::exponential(1.0);  // Single
  TandemSpec tandem;                                         // Tandem
  NetworkSpec dag;                                           // Dag
  double loop_eta = 0.0;                                     // Loop
  std::vector<ServiceLaw> loop_services;                     // Loop (two laws)

  // Uniform view for the simulator.
  NetworkSpec as_network_spec() const;
};

struct FcltConfig {
  double mu = 1.0;
  std::vector<int> n_values;
  std::vector<double> time_grid;
  std::vector<double> t_stars;
  std::uint64_t reps = 1000;
  std::uint64_t limit_reps = 10000;
  double delta = 1.0 / 256.0;
};

struct ExperimentConfig {
  RunMode mode = RunMode::Verify;
  std::uint64_t seed = 0;  // mandatory in the file; no wall-clock fallback
  std::uint64_t reps = 1;
  double horizon = 1.0;
  int threads = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
  ShotNoiseSpec shotnoise;
  std::optional<NetworkConfig> network;
  std::vector<TransformQuery> queries;
  std::optional<FcltConfig> fclt;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  void validate() const;  // throws ConfigError
};

ShotLaw shot_law_from_json(const nlohmann::json& j, const std::string& field);
ServiceLaw service_law_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json shot_law_to_json(const ShotLaw& law);
nlohmann::json service_law_to_json(const ServiceLaw& law);

}  // namespace snq
