#include "snq/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace snq {

namespace {

using nlohmann::json;

double require_positive(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "must be a number");
  const double v = j.get<double>();
  if (!(v > 0)) throw ConfigError(field, "must be > 0");
  return v;
}

double require_nonnegative(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "must be a number");
  const double v = j.get<double>();
  if (v < 0) throw ConfigError(field, "must be >= 0");
  return v;
}

const json& require_key(const json& j, const char* key, const std::string& field) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(field + "." + key, "missing required field");
  return *it;
}

}  // namespace

ShotLaw shot_law_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "must be a tagged record object");
  const std::string kind = require_key(j, "kind", field).get<std::string>();
  if (kind == "exponential")
    return ShotLaw::exponential(require_positive(require_key(j, "mean", field), field + ".mean"));
  if (kind == "deterministic")
    return ShotLaw::deterministic(require_positive(require_key(j, "value", field), field + ".value"));
  if (kind == "gamma")
    return ShotLaw::gamma(require_positive(require_key(j, "shape", field), field + ".shape"),
                          require_positive(require_key(j, "scale", field), field + ".scale"));
  throw ConfigError(field + ".kind", "unknown shot law '" + kind + "'");
}

ServiceLaw service_law_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "must be a tagged record object");
  const std::string kind = require_key(j, "kind", field).get<std::string>();
  if (kind == "exponential")
    return ServiceLaw::exponential(require_positive(require_key(j, "rate", field), field + ".rate"));
  if (kind == "deterministic")
    return ServiceLaw::deterministic(
        require_positive(require_key(j, "value", field), field + ".value"));
  if (kind == "uniform")
    return ServiceLaw::uniform(require_positive(require_key(j, "upper", field), field + ".upper"));
  if (kind == "gamma")
    return ServiceLaw::gamma(require_positive(require_key(j, "shape", field), field + ".shape"),
                             require_positive(require_key(j, "rate", field), field + ".rate"));
  throw ConfigError(field + ".kind", "unknown service law '" + kind + "'");
}

json shot_law_to_json(const ShotLaw& law) {
  switch (law.kind) {
    case ShotLaw::Kind::Exponential: return {{"kind", "exponential"}, {"mean", law.p1}};
    case ShotLaw::Kind::Deterministic: return {{"kind", "deterministic"}, {"value", law.p1}};
    case ShotLaw::Kind::Gamma: return {{"kind", "gamma"}, {"shape", law.p1}, {"scale", law.p2}};
  }
  return {};
}

json service_law_to_json(const ServiceLaw& law) {
  switch (law.kind) {
    case ServiceLaw::Kind::Exponential: return {{"kind", "exponential"}, {"rate", law.p1}};
    case ServiceLaw::Kind::Deterministic: return {{"kind", "deterministic"}, {"value", law.p1}};
    case ServiceLaw::Kind::Uniform: return {{"kind", "uniform"}, {"upper", law.p1}};
    case ServiceLaw::Kind::Gamma: return {{"kind", "gamma"}, {"shape", law.p1}, {"rate", law.p2}};
  }
  return {};
}

namespace {

ShotNoiseSpec shotnoise_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("shotnoise", "must be an object");
  ShotNoiseSpec spec;
  spec.nu = require_positive(require_key(j, "nu", "shotnoise"), "shotnoise.nu");
  const json& comps = require_key(j, "components", "shotnoise");
  if (!comps.is_array() || comps.empty())
    throw ConfigError("shotnoise.components", "must be a nonempty array");
  std::size_t idx = 0;
  for (const auto& c : comps) {
    const std::string field = "shotnoise.components[" + std::to_string(idx) + "]";
    spec.decay.push_back(require_positive(require_key(c, "r", field), field + ".r"));
    spec.lambda0.push_back(
        c.contains("lambda0") ? require_nonnegative(c["lambda0"], field + ".lambda0") : 0.0);
    spec.shots.components.push_back(shot_law_from_json(require_key(c, "shot", field), field + ".shot"));
    ++idx;
  }
  if (j.contains("coupling")) {
    const std::string c = j["coupling"].get<std::string>();
    if (c == "independent")
      spec.shots.coupling = ShotLawVector::Coupling::Independent;
    else if (c == "comonotone")
      spec.shots.coupling = ShotLawVector::Coupling::Comonotone;
    else
      throw ConfigError("shotnoise.coupling", "must be 'independent' or 'comonotone'");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("shotnoise", e.what());
  }
  return spec;
}

NetworkConfig network_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("network", "must be an object");
  NetworkConfig net;
  const std::string type = require_key(j, "type", "network").get<std::string>();
  if (type == "single") {
    net.kind = NetworkKind::Single;
    net.single_service = service_law_from_json(require_key(j, "service", "network"), "network.service");
  } else if (type == "tandem") {
    net.kind = NetworkKind::Tandem;
    const json& services = require_key(j, "services", "network");
    if (!services.is_array() || services.empty())
      throw ConfigError("network.services", "must be a nonempty array");
    std::size_t idx = 0;
    for (const auto& s : services)
      net.tandem.services.push_back(
          service_law_from_json(s, "network.services[" + std::to_string(idx++) + "]"));
    net.tandem.source_component =
        j.contains("component") ? j["component"].get<std::size_t>() : 0;
  } else if (type == "dag") {
    net.kind = NetworkKind::Dag;
    const json& nodes = require_key(j, "nodes", "network");
    if (!nodes.is_array() || nodes.empty())
      throw ConfigError("network.nodes", "must be a nonempty array");
    std::size_t idx = 0;
    for (const auto& n : nodes) {
      const std::string field = "network.nodes[" + std::to_string(idx++) + "]";
      net.dag.nodes.push_back({require_key(n, "id", field).get<int>(),
                               service_law_from_json(require_key(n, "service", field),
                                                     field + ".service")});
    }
    if (j.contains("edges")) {
      idx = 0;
      for (const auto& e : j["edges"]) {
        const std::string field = "network.edges[" + std::to_string(idx++) + "]";
        net.dag.edges.push_back({require_key(e, "from", field).get<int>(),
                                 require_key(e, "to", field).get<int>(),
                                 e.contains("prob") ? require_positive(e["prob"], field + ".prob")
                                                    : 1.0});
      }
    }
    const json& sources = require_key(j, "sources", "network");
    idx = 0;
    for (const auto& s : sources) {
      const std::string field = "network.sources[" + std::to_string(idx++) + "]";
      net.dag.sources[require_key(s, "node", field).get<int>()] =
          require_key(s, "component", field).get<std::size_t>();
    }
    const std::string dep =
        j.contains("dependence") ? j["dependence"].get<std::string>() : "single";
    if (dep == "single")
      net.dag.dependence = Dependence::Single;
    else if (dep == "M1")
      net.dag.dependence = Dependence::M1;
    else if (dep == "M2")
      net.dag.dependence = Dependence::M2;
    else
      throw ConfigError("network.dependence", "must be 'single', 'M1' or 'M2'");
    try {
      net.dag.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("network", e.what());
    }
  } else if (type == "loop") {
    net.kind = NetworkKind::Loop;
    const json& eta = require_key(j, "eta", "network");
    if (!eta.is_number() || eta.get<double>() < 0.0 || eta.get<double>() >= 1.0)
      throw ConfigError("network.eta", "must lie in [0, 1)");
    net.loop_eta = eta.get<double>();
    const json& services = require_key(j, "services", "network");
    if (!services.is_array() || services.size() != 2)
      throw ConfigError("network.services", "loop requires exactly two services");
    std::size_t idx = 0;
    for (const auto& s : services)
      net.loop_services.push_back(
          service_law_from_json(s, "network.services[" + std::to_string(idx++) + "]"));
  } else {
    throw ConfigError("network.type", "unknown network type '" + type + "'");
  }
  return net;
}

FcltConfig fclt_from_json(const json& j) {
  FcltConfig f;
  f.mu = require_positive(require_key(j, "mu", "fclt"), "fclt.mu");
  for (const auto& n : require_key(j, "n_values", "fclt")) f.n_values.push_back(n.get<int>());
  for (const auto& t : require_key(j, "time_grid", "fclt")) f.time_grid.push_back(t.get<double>());
  if (j.contains("t_stars"))
    for (const auto& t : j["t_stars"]) f.t_stars.push_back(t.get<double>());
  else if (!f.time_grid.empty())
    f.t_stars.push_back(f.time_grid.back());
  if (j.contains("reps")) f.reps = j["reps"].get<std::uint64_t>();
  if (j.contains("limit_reps")) f.limit_reps = j["limit_reps"].get<std::uint64_t>();
  if (j.contains("delta")) f.delta = require_positive(j["delta"], "fclt.delta");
  return f;
}

}  // namespace

NetworkSpec NetworkConfig::as_network_spec() const {
  switch (kind) {
    case NetworkKind::Single: {
      NetworkSpec net;
      net.nodes = {{1, single_service}};
      net.sources[1] = 0;
      return net;
    }
    case NetworkKind::Tandem: {
      NetworkSpec net;
      for (std::size_t i = 0; i < tandem.services.size(); ++i)
        net.nodes.push_back({static_cast<int>(i + 1), tandem.services[i]});
      for (std::size_t i = 0; i + 1 < tandem.services.size(); ++i)
        net.edges.push_back({static_cast<int>(i + 1), static_cast<int>(i + 2), 1.0});
      net.sources[1] = tandem.source_component;
      return net;
    }
    case NetworkKind::Dag: return dag;
    case NetworkKind::Loop: {
      NetworkSpec net;
      net.nodes = {{1, loop_services[0]}, {2, loop_services[1]}};
      net.loop_eta = loop_eta;
      return net;
    }
  }
  throw std::logic_error("NetworkConfig::as_network_spec");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  ExperimentConfig cfg;
  const std::string mode = require_key(j, "mode", "config").get<std::string>();
  if (mode == "simulate")
    cfg.mode = RunMode::Simulate;
  else if (mode == "analyze")
    cfg.mode = RunMode::Analyze;
  else if (mode == "fclt")
    cfg.mode = RunMode::Fclt;
  else if (mode == "verify")
    cfg.mode = RunMode::Verify;
  else
    throw ConfigError("mode", "must be one of simulate|analyze|fclt|verify");

  const json& seed = require_key(j, "seed", "config");
  if (!seed.is_number_unsigned()) throw ConfigError("seed", "must be an unsigned integer");
  cfg.seed = seed.get<std::uint64_t>();

  if (j.contains("reps")) {
    cfg.reps = j["reps"].get<std::uint64_t>();
    if (cfg.reps < 1) throw ConfigError("reps", "must be >= 1");
  }
  if (j.contains("horizon")) cfg.horizon = require_positive(j["horizon"], "horizon");
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

  cfg.shotnoise = shotnoise_from_json(require_key(j, "shotnoise", "config"));
  if (j.contains("network")) cfg.network = network_from_json(j["network"]);
  if (j.contains("queries")) {
    std::size_t idx = 0;
    for (const auto& q : j["queries"]) {
      const std::string field = "queries[" + std::to_string(idx++) + "]";
      TransformQuery query;
      query.t = require_positive(require_key(q, "t", field), field + ".t");
      for (const auto& z : require_key(q, "z", field)) query.z.push_back(z.get<double>());
      for (const auto& s : require_key(q, "s", field)) query.s.push_back(s.get<double>());
      try {
        query.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
      }
      cfg.queries.push_back(std::move(query));
    }
  }
  if (j.contains("fclt")) cfg.fclt = fclt_from_json(j["fclt"]);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("JSON parse error: ") + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  try {
    shotnoise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("shotnoise", e.what());
  }
  if (mode == RunMode::Simulate && !network)
    throw ConfigError("network", "simulate mode requires a network section");
  if (mode == RunMode::Analyze && !network)
    throw ConfigError("network", "analyze mode requires a network section");
  if (mode == RunMode::Analyze && queries.empty())
    throw ConfigError("queries", "analyze mode requires at least one query");
  if (mode == RunMode::Fclt && !fclt)
    throw ConfigError("fclt", "fclt mode requires an fclt section");
}

}  // namespace snq
