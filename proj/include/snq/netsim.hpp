#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "snq/coxarrivals.hpp"
#include "snq/distributions.hpp"
#include "snq/shotnoise.hpp"
#include "snq/stats.hpp"

namespace snq {

struct TandemSpec {
  std::vector<ServiceLaw> services;    // length S_i >= 1
  std::size_t source_component = 0;    // driving shot-noise component
};

// Evaluation point of the joint transform E prod z_j^{N_j(t)} e^{-<s, L(t)>}.
struct TransformQuery {
  double t = 1.0;
  std::vector<double> z;  // one entry per node, each in (0, 1]
  std::vector<double> s;  // one entry per intensity component, each >= 0
  void validate() const;
};

enum class Dependence { Single, M1, M2 };

// Feedforward network of infinite-server nodes. Outgoing probabilities at a
// node may sum to less than one; the deficit is the departure probability.
// loop_eta switches to the two-node loop system (1 -> 2 -> 1 with prob eta).
struct NetworkSpec {
  struct Node {
    int id = 0;
    ServiceLaw service;
  };
  struct Edge {
    int from = 0;
    int to = 0;
    double prob = 1.0;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::map<int, std::size_t> sources;  // node id -> shot-noise component
  Dependence dependence = Dependence::Single;
  std::optional<double> loop_eta;

  void validate() const;
  std::size_t node_index(int id) const;
};

struct PathDecomposition {
  TandemSpec tandem;
  std::vector<int> node_ids;  // original node ids along the path
  double probability = 1.0;
};

// Enumerates all source-to-departure paths of a feedforward DAG; each path is
// one tandem, weighted by the product of routing probabilities along it and
// the departure probability at its last node. Cycles are rejected with the
// offending node sequence.
std::vector<PathDecomposition> decompose(const NetworkSpec& net);

// Right-continuous per-node job count.
struct StepFunction {
  std::vector<double> times;  // strictly increasing change points
  std::vector<int> counts;    // value from times[k] (inclusive) onward
  int at(double t) const;
};

struct OccupancyRecord {
  std::vector<int> node_ids;
  std::vector<StepFunction> counts;
  std::vector<int> final_counts;
  std::vector<std::uint64_t> admissions;   // total entries per node
  std::vector<std::uint64_t> departures;   // total exits per node within horizon
  std::vector<double> intensity_final;     // L_i(horizon)
  double horizon = 0.0;

  void write_csv(std::ostream& os) const;       // rows (time, node, count)
  void write_summary_json(std::ostream& os) const;
};

OccupancyRecord simulate(const NetworkSpec& net, const ShotNoiseSpec& spec, double horizon,
                         std::uint64_t master_seed, std::uint64_t replication);

// Two-node loop of Remark-style feedback: node 1 -> node 2 -> node 1 with
// probability eta, else depart. Loop count is geometric, drawn at admission.
OccupancyRecord simulate_loop(double eta, const ServiceLaw& service1, const ServiceLaw& service2,
                              const ShotNoiseSpec& spec, double horizon, std::uint64_t master_seed,
                              std::uint64_t replication);

// Monte Carlo estimate of the joint PGF/LST at query.t. z is indexed by the
// network's nodes in their declaration order; s by intensity component.
EstimateWithCI estimate_joint_pgf(const NetworkSpec& net, const ShotNoiseSpec& spec,
                                  const TransformQuery& query, std::uint64_t reps,
                                  std::uint64_t master_seed, int threads = 1);

}  // namespace snq
