#pragma once

// Experiment descriptions: JSON (de)serialization and resolution into a
// runnable Scenario.

#include "qfa/analytics.hpp"
#include "qfa/engine.hpp"
#include "qfa/scheduling.hpp"
#include "qfa/topology.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qfa {

inline constexpr int kSchemaVersion = 1;

struct TopologySpec {
  enum class Kind { Grid, Explicit } kind = Kind::Grid;
  int rows = 3;
  int cols = 3;
  double link_length_km = 28.6;
  std::optional<std::pair<double, double>> length_range_km; // random lengths when set
  EdgeDefaults edge;
  std::size_t nodes = 0;   // explicit graphs only
  std::vector<Edge> edges; // explicit graphs only
};

struct FlowSamplingSpec {
  std::size_t count = 0;
  FlowSampling mode = FlowSampling::UniformPairs;
};

struct SweepSpec {
  enum class Kind { None, Fidelity, Coherence, Load } kind = Kind::None;
  std::vector<double> f_min;
  std::vector<int> t_mem_slots;
  std::vector<double> t2_seconds;
  std::vector<double> loads;
};

struct ExperimentSpec {
  std::string name = "custom";
  SimConfig config;
  TopologySpec topology;
  std::optional<FlowSamplingSpec> flow_sampling; // used when config.flows is empty
  std::uint64_t topology_seed = 1;                // random lengths and sampled flows
  std::vector<PolicyConfig> policies{PolicyConfig{}};
  SweepSpec sweep;
  std::optional<double> a_ref;
};

/// Strict parse: unknown keys and wrongly typed values raise ConfigError.
ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

ExperimentSpec load_experiment(const std::string& path);

/// Builds the topology (drawing lengths if needed).
Topology build_topology(const ExperimentSpec& spec);

/// Topology plus sampled flows, validated. Flows listed in the config win over sampling.
Scenario resolve(const ExperimentSpec& spec);

/// The spec with generated flows and the edge list written out explicitly;
/// loading it back yields the same scenario.
nlohmann::json resolved_json(const ExperimentSpec& spec, const Scenario& scenario);

std::string_view sweep_kind_name(SweepSpec::Kind kind);

/// Sweep points for the spec's sweep axes; empty when it has none.
std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec, const Scenario& scenario);

} // namespace qfa
