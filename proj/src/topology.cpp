#include "qfa/topology.hpp"

#include "qfa/stochastic.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace qfa {

Topology::Topology(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)), adjacency_(node_count)
{
  if (node_count_ == 0) throw ConfigError("topology has no nodes");
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    if (e.id != i) throw ConfigError("edge ids must match their position");
    if (e.u >= node_count_ || e.v >= node_count_) {
      throw ConfigError("edge " + std::to_string(i) + " references an unknown node");
    }
    if (e.u == e.v) throw ConfigError("edge " + std::to_string(i) + " is a self-loop");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.emplace(e.u, e.v).second) {
      throw ConfigError("duplicate edge between " + std::to_string(e.u) + " and " +
                        std::to_string(e.v));
    }
    adjacency_[e.u].push_back({e.v, e.id});
    adjacency_[e.v].push_back({e.u, e.id});
  }
  const auto dist = hop_distances(0);
  if (std::any_of(dist.begin(), dist.end(),
                  [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); })) {
    throw ConfigError("topology is not connected");
  }
}

std::optional<EdgeId> Topology::find_edge(NodeId a, NodeId b) const
{
  if (a >= node_count_) return std::nullopt;
  for (const Adjacent& adj : adjacency_[a]) {
    if (adj.node == b) return adj.edge;
  }
  return std::nullopt;
}

bool Topology::contains(const Path& path) const
{
  if (path.edges.empty() || path.nodes.size() != path.edges.size() + 1) return false;
  std::set<NodeId> visited;
  for (NodeId n : path.nodes) {
    if (n >= node_count_ || !visited.insert(n).second) return false;
  }
  for (std::size_t i = 0; i < path.edges.size(); ++i) {
    const auto id = find_edge(path.nodes[i], path.nodes[i + 1]);
    if (!id || *id != path.edges[i]) return false;
  }
  return true;
}

std::vector<std::size_t> Topology::hop_distances(NodeId source) const
{
  std::vector<std::size_t> dist(node_count_, std::numeric_limits<std::size_t>::max());
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    for (const Adjacent& adj : adjacency_[n]) {
      if (dist[adj.node] == std::numeric_limits<std::size_t>::max()) {
        dist[adj.node] = dist[n] + 1;
        queue.push_back(adj.node);
      }
    }
  }
  return dist;
}

namespace {

template <typename LengthFn>
Topology grid_with(int rows, int cols, const EdgeDefaults& defaults, LengthFn&& next_length)
{
  if (rows < 1 || cols < 1) throw ConfigError("grid dimensions must be at least 1x1");
  std::vector<Edge> edges;
  const auto id_of = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  const auto add = [&](NodeId a, NodeId b) {
    Edge e;
    e.id = static_cast<EdgeId>(edges.size());
    e.u = a;
    e.v = b;
    e.length_km = next_length();
    e.modes = defaults.modes;
    e.retain_cap = defaults.retain_cap;
    e.base_fidelity = defaults.base_fidelity;
    edges.push_back(e);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) add(id_of(r, c), id_of(r, c + 1));
      if (r + 1 < rows) add(id_of(r, c), id_of(r + 1, c));
    }
  }
  return Topology(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                  std::move(edges));
}

} // namespace

Topology build_grid(int rows, int cols, double link_length_km, const EdgeDefaults& defaults)
{
  if (link_length_km < 0.0) throw ConfigError("link length must be non-negative");
  return grid_with(rows, cols, defaults, [=] { return link_length_km; });
}

Topology build_grid(int rows, int cols, double min_km, double max_km, RngStream& lengths,
                    const EdgeDefaults& defaults)
{
  if (min_km < 0.0 || max_km < min_km) throw ConfigError("invalid link length range");
  return grid_with(rows, cols, defaults,
                   [&] { return min_km + (max_km - min_km) * lengths.uniform(); });
}

namespace {

struct PathSearch {
  const Topology& topology;
  NodeId target;
  std::vector<std::size_t> to_target;
  std::vector<bool> on_path;
  std::vector<EdgeId> edges;
  std::vector<NodeId> nodes;
  std::vector<Path> found;

  void extend(NodeId at, std::size_t budget)
  {
    if (at == target) {
      if (budget == 0) found.push_back(Path{edges, nodes});
      return;
    }
    if (budget == 0 || to_target[at] > budget) return;
    for (const auto& adj : topology.neighbors(at)) {
      if (on_path[adj.node]) continue;
      on_path[adj.node] = true;
      edges.push_back(adj.edge);
      nodes.push_back(adj.node);
      extend(adj.node, budget - 1);
      nodes.pop_back();
      edges.pop_back();
      on_path[adj.node] = false;
    }
  }
};

} // namespace

std::vector<Path> enumerate_candidate_paths(const Topology& topology, NodeId source,
                                            NodeId destination, int k)
{
  const std::size_t n = topology.node_count();
  if (source >= n || destination >= n) throw ConfigError("flow endpoint not in topology");
  if (source == destination) throw ConfigError("flow source equals destination");
  if (k < 1) throw ConfigError("need at least one candidate path per flow");

  PathSearch search{topology, destination, topology.hop_distances(destination),
                    std::vector<bool>(n, false), {}, {source}, {}};
  if (search.to_target[source] == std::numeric_limits<std::size_t>::max()) {
    throw ConfigError("flow endpoints are disconnected");
  }
  search.on_path[source] = true;

  std::vector<Path> result;
  for (std::size_t hops = search.to_target[source];
       hops < n && result.size() < static_cast<std::size_t>(k); ++hops) {
    search.found.clear();
    search.extend(source, hops);
    std::sort(search.found.begin(), search.found.end(),
              [](const Path& a, const Path& b) { return a.edges < b.edges; });
    for (auto& p : search.found) {
      if (result.size() == static_cast<std::size_t>(k)) break;
      result.push_back(std::move(p));
    }
  }
  return result;
}

std::vector<Flow> make_flows(const Topology& topology, std::span<const FlowSpec> specs,
                             int paths_per_flow)
{
  std::vector<Flow> flows;
  flows.reserve(specs.size());
  for (const FlowSpec& s : specs) {
    flows.push_back(Flow{s.source, s.destination, s.weight,
                         enumerate_candidate_paths(topology, s.source, s.destination,
                                                   paths_per_flow)});
  }
  return flows;
}

std::vector<FlowSpec> sample_flows(const Topology& topology, std::size_t count, FlowSampling mode,
                                   RngStream& flow_generation)
{
  std::vector<FlowSpec> pool;
  const auto n = static_cast<NodeId>(topology.node_count());
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId d = 0; d < n; ++d) {
      if (s == d) continue;
      if (mode == FlowSampling::AdjacentPairs && !topology.find_edge(s, d)) continue;
      pool.push_back({s, d, 1.0});
    }
  }
  if (count > pool.size()) {
    throw ConfigError("requested " + std::to_string(count) + " flows but only " +
                      std::to_string(pool.size()) + " distinct pairs exist");
  }
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(flow_generation.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::string> validate_config(const SimConfig& c, const Topology& topology)
{
  std::vector<std::string> v;
  const auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) v.push_back(std::string(name) + " must lie in [0, 1]");
  };
  if (!(c.alpha_per_km >= 0.0)) v.push_back("alpha_per_km must be non-negative");
  if (!(c.slot_duration > 0.0)) v.push_back("slot_duration must be positive");
  prob(c.bsm_success, "bsm_success");
  if (c.bsm_success == 0.0) v.push_back("bsm_success must be positive");
  if (!(c.f_min > kWernerFloor)) v.push_back("F_min must exceed 1/4");
  if (!(c.f_min < 1.0)) v.push_back("F_min must be below 1");
  if (!(c.t2_seconds > 0.0)) v.push_back("t2_seconds must be positive");
  if (c.t_mem_slots < 1) v.push_back("t_mem_slots must be at least 1");
  if (c.attempt_budget < 1) v.push_back("attempt_budget must be at least 1");
  if (c.path_candidates_per_flow < 1) v.push_back("path_candidates_per_flow must be at least 1");
  if (c.slots < 1) v.push_back("slots must be at least 1");
  if (c.warmup_slots < 0 || c.warmup_slots >= c.slots) {
    v.push_back("warmup_slots must be in [0, slots)");
  }
  if (c.seeds.empty()) v.push_back("at least one seed is required");
  if (c.flows.empty()) v.push_back("at least one flow is required");

  if (c.purification.enabled) {
    const auto& m = c.purification.model;
    if (m.variant == PurificationVariant::Unset) v.push_back("purification variant not set");
    if (m.variant == PurificationVariant::Simplified) {
      prob(m.p_pur, "purification.p_pur");
      if (!(m.delta_f >= 0.0)) v.push_back("purification.delta_f must be non-negative");
    }
  }

  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < c.flows.size(); ++i) {
    const FlowSpec& f = c.flows[i];
    const std::string tag = "flow " + std::to_string(i) + ": ";
    if (f.source >= topology.node_count() || f.destination >= topology.node_count()) {
      v.push_back(tag + "endpoint not in topology");
    } else if (f.source == f.destination) {
      v.push_back(tag + "source equals destination");
    } else if (!pairs.emplace(f.source, f.destination).second) {
      v.push_back(tag + "duplicate source-destination pair");
    }
    if (!(f.weight >= 0.0)) v.push_back(tag + "weight must be non-negative");
  }

  for (const Edge& e : topology.edges()) {
    const std::string tag = "edge " + std::to_string(e.id) + ": ";
    if (e.length_km < 0.0) v.push_back(tag + "negative length");
    if (e.modes < 1) v.push_back(tag + "modes must be at least 1");
    if (!(e.base_fidelity > kWernerFloor && e.base_fidelity <= 1.0)) {
      v.push_back(tag + "base fidelity must lie in (1/4, 1]");
    }
    if (c.purification.enabled && e.retain_cap < 2) {
      v.push_back(tag + "purification requires retain_cap >= 2");
    }
    if (!c.purification.enabled && e.retain_cap != 1) {
      v.push_back(tag + "retain_cap must be 1 without purification");
    }
  }
  return v;
}

} // namespace qfa
