#pragma once

// Network graph, flows, candidate paths and the static simulation config.

#include "qfa/physics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfa {

class RngStream;

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  EdgeId id = 0;
  NodeId u = 0; // u < v
  NodeId v = 0;
  double length_km = 0.0;
  int modes = 1;                // S(e)
  int retain_cap = 1;           // m_max(e)
  double base_fidelity = 1.0;   // F0(e)

  NodeId other(NodeId n) const { return n == u ? v : u; }
};

struct EdgeDefaults {
  int modes = 8;
  int retain_cap = 1;
  double base_fidelity = 0.82;
};

/// A simple path: `nodes` has one more entry than `edges`.
struct Path {
  std::vector<EdgeId> edges;
  std::vector<NodeId> nodes;

  std::size_t hop_count() const { return edges.size(); }
  bool operator==(const Path&) const = default;
};

class Topology {
 public:
  struct Adjacent {
    NodeId node;
    EdgeId edge;
  };

  /// Edge ids must equal their index. Throws ConfigError on self-loops,
  /// duplicate edges, unknown endpoints or a disconnected graph.
  Topology(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  std::span<const Adjacent> neighbors(NodeId n) const { return adjacency_.at(n); }
  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;

  /// True when `path` is a simple, contiguous walk over existing edges.
  bool contains(const Path& path) const;

  /// Hop distances from `source` (unreachable nodes get SIZE_MAX).
  std::vector<std::size_t> hop_distances(NodeId source) const;

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

/// rows x cols 4-neighbour grid, node id = r * cols + c. For every node in id
/// order the right edge comes first, then the down edge.
Topology build_grid(int rows, int cols, double link_length_km, const EdgeDefaults& defaults);

/// Same layout with each length drawn uniformly from [min_km, max_km] in edge order.
Topology build_grid(int rows, int cols, double min_km, double max_km, RngStream& lengths,
                    const EdgeDefaults& defaults);

/// Up to k shortest simple paths by hop count; equal hop counts are ordered
/// lexicographically by their edge-id sequence.
std::vector<Path> enumerate_candidate_paths(const Topology& topology, NodeId source,
                                            NodeId destination, int k);

struct FlowSpec {
  NodeId source = 0;
  NodeId destination = 0;
  double weight = 1.0;
};

struct Flow {
  NodeId source = 0;
  NodeId destination = 0;
  double weight = 1.0;
  std::vector<Path> candidate_paths;
};

std::vector<Flow> make_flows(const Topology& topology, std::span<const FlowSpec> specs,
                             int paths_per_flow);

enum class FlowSampling {
  UniformPairs,  // distinct ordered node pairs
  AdjacentPairs, // distinct ordered pairs joined by an edge
};

/// First `count` pairs of a seeded Fisher-Yates shuffle over the candidate
/// ordered pairs (listed in lexicographic order before shuffling).
std::vector<FlowSpec> sample_flows(const Topology& topology, std::size_t count, FlowSampling mode,
                                   RngStream& flow_generation);

struct PurificationConfig {
  bool enabled = false;
  PurificationModel model;
};

struct SimConfig {
  double alpha_per_km = 0.046;
  double slot_duration = 0.01; // seconds
  double bsm_success = 0.95;
  double f_min = 0.75;
  double t2_seconds = 1.0;
  int t_mem_slots = 1;
  int attempt_budget = 8;
  PurificationConfig purification;
  std::vector<FlowSpec> flows;
  int path_candidates_per_flow = 3;
  std::int64_t slots = 200000;
  std::int64_t warmup_slots = 20000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

/// Every violated invariant, each with a readable reason. Empty means valid.
std::vector<std::string> validate_config(const SimConfig& config, const Topology& topology);

} // namespace qfa
