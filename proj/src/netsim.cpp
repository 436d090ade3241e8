#include "snq/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "snq/csv.hpp"
#include "snq/parallel.hpp"

namespace snq {

void TransformQuery::validate() const {
  if (!(t > 0)) throw std::invalid_argument("query.t: must be > 0");
  for (double zi : z)
    if (!(zi > 0.0 && zi <= 1.0)) throw std::invalid_argument("query.z: entries must lie in (0, 1]");
  for (double si : s)
    if (si < 0.0) throw std::invalid_argument("query.s: entries must be >= 0");
}

std::size_t NetworkSpec::node_index(int id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  throw std::invalid_argument("network: unknown node id " + std::to_string(id));
}

void NetworkSpec::validate() const {
  if (nodes.empty()) throw std::invalid_argument("network.nodes: must be nonempty");
  std::set<int> ids;
  for (const auto& n : nodes)
    if (!ids.insert(n.id).second)
      throw std::invalid_argument("network.nodes: duplicate id " + std::to_string(n.id));
  if (loop_eta) {
    if (!(*loop_eta >= 0.0 && *loop_eta < 1.0))
      throw std::invalid_argument("network.loop.eta: must lie in [0, 1)");
    if (nodes.size() != 2)
      throw std::invalid_argument("network.loop: exactly two nodes required");
    return;  // edges are implied in loop mode
  }
  for (const auto& e : edges) {
    node_index(e.from);
    node_index(e.to);
    if (!(e.prob > 0.0 && e.prob <= 1.0))
      throw std::invalid_argument("network.edges.prob: must lie in (0, 1]");
  }
  if (sources.empty()) throw std::invalid_argument("network.sources: must be nonempty");
  for (const auto& [id, comp] : sources) node_index(id);
  for (const auto& n : nodes) {
    double out = 0.0;
    for (const auto& e : edges)
      if (e.from == n.id) out += e.prob;
    if (out > 1.0 + 1e-12)
      throw std::invalid_argument("network.edges: outgoing probabilities at node " +
                                  std::to_string(n.id) + " sum to " + std::to_string(out) +
                                  " > 1");
  }
  if (dependence == Dependence::M2) {
    std::set<std::size_t> comps;
    for (const auto& [id, comp] : sources) comps.insert(comp);
    if (comps.size() != 1 || *comps.begin() != 0)
      throw std::invalid_argument(
          "network.sources: M2 requires every source to reference scalar component 0");
  }
}

// ------------------------------------------------------------- decompose

namespace {

struct OutEdge {
  std::size_t to;
  double prob;
};

void enumerate_paths(const NetworkSpec& net, const std::vector<std::vector<OutEdge>>& adj,
                     std::vector<std::size_t>& stack, std::vector<bool>& on_stack, double prob,
                     std::size_t component, std::vector<PathDecomposition>& out) {
  const std::size_t here = stack.back();
  double out_prob = 0.0;
  for (const auto& e : adj[here]) out_prob += e.prob;
  const double depart = 1.0 - out_prob;
  if (depart > 1e-12) {
    PathDecomposition p;
    p.probability = prob * depart;
    p.tandem.source_component = component;
    for (std::size_t idx : stack) {
      p.tandem.services.push_back(net.nodes[idx].service);
      p.node_ids.push_back(net.nodes[idx].id);
    }
    out.push_back(std::move(p));
  }
  for (const auto& e : adj[here]) {
    if (on_stack[e.to]) {
      std::ostringstream oss;
      oss << "network: cycle detected through nodes";
      for (std::size_t idx : stack) oss << " " << net.nodes[idx].id;
      oss << " " << net.nodes[e.to].id;
      throw std::invalid_argument(oss.str());
    }
    stack.push_back(e.to);
    on_stack[e.to] = true;
    enumerate_paths(net, adj, stack, on_stack, prob * e.prob, component, out);
    on_stack[e.to] = false;
    stack.pop_back();
  }
}

std::vector<std::vector<OutEdge>> adjacency(const NetworkSpec& net) {
  std::vector<std::vector<OutEdge>> adj(net.nodes.size());
  for (const auto& e : net.edges)
    adj[net.node_index(e.from)].push_back({net.node_index(e.to), e.prob});
  return adj;
}

}  // namespace

std::vector<PathDecomposition> decompose(const NetworkSpec& net) {
  net.validate();
  if (net.loop_eta) throw std::invalid_argument("decompose: loop networks do not decompose");
  const auto adj = adjacency(net);
  std::vector<PathDecomposition> out;
  for (const auto& [id, component] : net.sources) {
    std::vector<std::size_t> stack{net.node_index(id)};
    std::vector<bool> on_stack(net.nodes.size(), false);
    on_stack[stack[0]] = true;
    enumerate_paths(net, adj, stack, on_stack, 1.0, component, out);
  }
  return out;
}

// -------------------------------------------------------------- simulate

int StepFunction::at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return counts[static_cast<std::size_t>(it - times.begin()) - 1];
}

namespace {

struct Event {
  double time;
  std::uint64_t seq;
  std::size_t node;
  int delta;
};

struct JobVisit {
  std::size_t node;
  double entry;
  double exit;
};

// Walks one job through the network, drawing its full route and all service
// times at the admission instant.
void walk_job(const NetworkSpec& net, const std::vector<std::vector<OutEdge>>& adj,
              std::size_t start, double arrival, RngStream& services, RngStream& routing,
              std::vector<JobVisit>& visits) {
  std::size_t here = start;
  double clock = arrival;
  for (;;) {
    const double service = net.nodes[here].service.sample(services);
    visits.push_back({here, clock, clock + service});
    clock += service;
    if (adj[here].empty()) break;
    double out_prob = 0.0;
    for (const auto& e : adj[here]) out_prob += e.prob;
    const double u = routing.uniform01();  // one categorical draw per hop
    if (u >= out_prob) break;
    double acc = 0.0;
    std::size_t next = adj[here].back().to;
    for (const auto& e : adj[here]) {
      acc += e.prob;
      if (u < acc) {
        next = e.to;
        break;
      }
    }
    here = next;
  }
}

OccupancyRecord build_record(const NetworkSpec& net, std::vector<Event> events,
                             const ShotNoisePath& path, double horizon) {
  // (time, seq) order; all events at one instant land in the same step so the
  // recorded count is the right-continuous value.
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.time != b.time ? a.time < b.time : a.seq < b.seq;
  });
  OccupancyRecord rec;
  rec.horizon = horizon;
  rec.node_ids.reserve(net.nodes.size());
  for (const auto& n : net.nodes) rec.node_ids.push_back(n.id);
  rec.counts.assign(net.nodes.size(), {});
  rec.final_counts.assign(net.nodes.size(), 0);
  rec.admissions.assign(net.nodes.size(), 0);
  rec.departures.assign(net.nodes.size(), 0);
  std::vector<int> level(net.nodes.size(), 0);
  for (const Event& e : events) {
    level[e.node] += e.delta;
    if (e.delta > 0)
      ++rec.admissions[e.node];
    else
      ++rec.departures[e.node];
    auto& sf = rec.counts[e.node];
    if (!sf.times.empty() && sf.times.back() == e.time)
      sf.counts.back() = level[e.node];
    else {
      sf.times.push_back(e.time);
      sf.counts.push_back(level[e.node]);
    }
  }
  for (std::size_t n = 0; n < net.nodes.size(); ++n)
    rec.final_counts[n] = rec.counts[n].at(horizon);
  rec.intensity_final = path.level_vector_at(horizon);
  return rec;
}

std::vector<ArrivalStream> draw_arrivals(const NetworkSpec& net, const ShotNoisePath& path,
                                         std::uint64_t master_seed, std::uint64_t replication,
                                         std::vector<std::size_t>& start_nodes) {
  std::vector<ArrivalStream> streams;
  start_nodes.clear();
  if (net.dependence == Dependence::M2) {
    RngStream thin = seed_split(master_seed, replication, StreamRole::Thinning);
    ArrivalStream shared = sample_thinning(path, 0, thin);
    for (const auto& [id, comp] : net.sources) {
      streams.push_back(shared);
      start_nodes.push_back(net.node_index(id));
    }
  } else {
    std::uint32_t k = 0;
    for (const auto& [id, comp] : net.sources) {
      RngStream thin = seed_split(master_seed, replication, role_id(StreamRole::Thinning, k++));
      streams.push_back(sample_thinning(path, comp, thin));
      start_nodes.push_back(net.node_index(id));
    }
  }
  return streams;
}

}  // namespace

OccupancyRecord simulate(const NetworkSpec& net, const ShotNoiseSpec& spec, double horizon,
                         std::uint64_t master_seed, std::uint64_t replication) {
  net.validate();
  spec.validate();
  if (net.loop_eta)
    return simulate_loop(*net.loop_eta, net.nodes[0].service, net.nodes[1].service, spec, horizon,
                         master_seed, replication);
  for (const auto& [id, comp] : net.sources)
    if (comp >= spec.dim())
      throw std::invalid_argument("network.sources: component index out of range of shotnoise spec");

  if (horizon <= 0.0) {
    ShotNoisePath empty(spec, {}, {}, 0.0);
    return build_record(net, {}, empty, 0.0);
  }
  RngStream shots = seed_split(master_seed, replication, StreamRole::Shots);
  std::vector<Event> events;
  const ShotNoisePath path = simulate_path(spec, horizon, shots);
  const auto adj = adjacency(net);

  std::vector<std::size_t> start_nodes;
  auto arrivals = draw_arrivals(net, path, master_seed, replication, start_nodes);

  RngStream services = seed_split(master_seed, replication, StreamRole::Services);
  RngStream routing = seed_split(master_seed, replication, StreamRole::Routing);

  std::uint64_t seq = 0;
  std::vector<JobVisit> visits;
  for (std::size_t s = 0; s < arrivals.size(); ++s) {
    for (double epoch : arrivals[s].epochs) {
      visits.clear();
      walk_job(net, adj, start_nodes[s], epoch, services, routing, visits);
      for (const auto& v : visits) {
        if (v.entry > horizon) break;
        events.push_back({v.entry, seq++, v.node, +1});
        if (v.exit <= horizon) events.push_back({v.exit, seq++, v.node, -1});
      }
    }
  }
  return build_record(net, std::move(events), path, horizon);
}

OccupancyRecord simulate_loop(double eta, const ServiceLaw& service1, const ServiceLaw& service2,
                              const ShotNoiseSpec& spec, double horizon, std::uint64_t master_seed,
                              std::uint64_t replication) {
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::invalid_argument("simulate_loop: eta must lie in [0, 1)");
  spec.validate();
  NetworkSpec shape;  // two nodes, used only for record layout
  shape.nodes = {{1, service1}, {2, service2}};
  if (horizon <= 0.0) {
    ShotNoisePath empty(spec, {}, {}, 0.0);
    return build_record(shape, {}, empty, 0.0);
  }
  RngStream shots = seed_split(master_seed, replication, StreamRole::Shots);
  RngStream thin = seed_split(master_seed, replication, StreamRole::Thinning);
  RngStream services = seed_split(master_seed, replication, StreamRole::Services);
  RngStream routing = seed_split(master_seed, replication, StreamRole::Routing);

  const ShotNoisePath path = simulate_path(spec, horizon, shots);
  const auto arr = sample_thinning(path, 0, thin);

  std::vector<Event> events;
  std::uint64_t seq = 0;
  for (double epoch : arr.epochs) {
    // full route at admission: cycles follow a geometric law
    std::uint64_t cycles = 1;
    while (routing.uniform01() < eta) ++cycles;
    double clock = epoch;
    for (std::uint64_t c = 0; c < cycles && clock <= horizon; ++c) {
      const double j1 = service1.sample(services);
      const double j2 = service2.sample(services);
      events.push_back({clock, seq++, 0, +1});
      if (clock + j1 <= horizon) events.push_back({clock + j1, seq++, 0, -1});
      clock += j1;
      if (clock > horizon) break;
      events.push_back({clock, seq++, 1, +1});
      if (clock + j2 <= horizon) events.push_back({clock + j2, seq++, 1, -1});
      clock += j2;
    }
  }
  return build_record(shape, std::move(events), path, horizon);
}

// Unbiased sample estimate of E prod_j z_j^{N_j(t)} e^{-<s, L(t)>}.
EstimateWithCI estimate_joint_pgf(const NetworkSpec& net, const ShotNoiseSpec& spec,
                                  const TransformQuery& query, std::uint64_t reps,
                                  std::uint64_t master_seed, int threads) {
  net.validate();
  spec.validate();
  query.validate();
  if (query.z.size() != net.nodes.size())
    throw std::invalid_argument("query.z: one entry per network node required");
  if (query.s.size() != spec.dim())
    throw std::invalid_argument("query.s: one entry per intensity component required");

  const bool all_unit_z =
      std::all_of(query.z.begin(), query.z.end(), [](double z) { return z == 1.0; });
  const bool all_zero_s =
      std::all_of(query.s.begin(), query.s.end(), [](double s) { return s == 0.0; });
  if (all_unit_z && all_zero_s) return {1.0, 0.0, reps, master_seed};

  const std::uint64_t n_chunks = (reps + 511) / 512;
  std::vector<Moments> partial(n_chunks);
  parallel_for_chunks(reps, threads, [&](std::uint64_t c, std::uint64_t lo, std::uint64_t hi) {
    Moments m;
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      const auto rec = simulate(net, spec, query.t, master_seed, rep);
      double v = 0.0;
      for (std::size_t n = 0; n < rec.final_counts.size(); ++n)
        v += static_cast<double>(rec.final_counts[n]) * std::log(query.z[n]);
      for (std::size_t i = 0; i < query.s.size(); ++i)
        v -= query.s[i] * rec.intensity_final[i];
      m.add(std::exp(v));
    }
    partial[c] = m;
  });
  Moments m;
  for (const auto& p : partial) m.merge(p);
  return {m.mean, m.se_mean(), reps, master_seed};
}

void OccupancyRecord::write_csv(std::ostream& os) const {
  os << "time,node,count\n";
  for (std::size_t n = 0; n < node_ids.size(); ++n)
    for (std::size_t k = 0; k < counts[n].times.size(); ++k)
      os << fmt_double(counts[n].times[k]) << "," << node_ids[n] << "," << counts[n].counts[k]
         << "\n";
}

void OccupancyRecord::write_summary_json(std::ostream& os) const {
  os << "{\"horizon\":" << fmt_double(horizon) << ",\"nodes\":[";
  for (std::size_t n = 0; n < node_ids.size(); ++n) {
    if (n) os << ",";
    os << "{\"id\":" << node_ids[n] << ",\"final_count\":" << final_counts[n]
       << ",\"admissions\":" << admissions[n] << ",\"departures\":" << departures[n] << "}";
  }
  os << "],\"intensity_final\":[";
  for (std::size_t c = 0; c < intensity_final.size(); ++c) {
    if (c) os << ",";
    os << fmt_double(intensity_final[c]);
  }
  os << "]}\n";
}

}  // namespace snq
