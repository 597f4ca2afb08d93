#include "qfa/presets.hpp"

namespace qfa {

namespace {

std::vector<PolicyConfig> all_policies()
{
  std::vector<PolicyConfig> out;
  for (PolicyId id : {PolicyId::TpMax, PolicyId::FidMax, PolicyId::FaThr, PolicyId::FaIndex}) {
    PolicyConfig p;
    p.policy = id;
    out.push_back(p);
  }
  return out;
}

PolicyConfig only(PolicyId id)
{
  PolicyConfig p;
  p.policy = id;
  return p;
}

// Shared physics: 28.6 km links give a per-slot edge success of about 0.918
// with 8 modes at 0.046 /km.
ExperimentSpec grid_defaults(std::string_view name)
{
  ExperimentSpec s;
  s.name = std::string(name);
  s.topology.rows = 3;
  s.topology.cols = 3;
  s.topology.link_length_km = 28.6;
  s.topology.edge = EdgeDefaults{8, 1, 0.82};
  SimConfig& c = s.config;
  c.alpha_per_km = 0.046;
  c.slot_duration = 0.01;
  c.bsm_success = 0.95;
  c.f_min = 0.75;
  c.t2_seconds = 1.0;
  c.t_mem_slots = 1;
  c.path_candidates_per_flow = 3;
  c.slots = 200000;
  c.warmup_slots = 20000;
  c.seeds = {1, 2, 3, 4, 5};
  s.topology_seed = 1;
  return s;
}

} // namespace

std::vector<std::string_view> preset_names()
{
  return {"baseline", "load", "fidelity-sweep", "heterogeneous", "coherence", "frontier"};
}

ExperimentSpec make_preset(std::string_view name)
{
  ExperimentSpec s = grid_defaults(name);
  SimConfig& c = s.config;
  if (name == "baseline") {
    c.flows = {FlowSpec{0, 1, 1.0}};
    c.attempt_budget = 1;
    s.policies = {only(PolicyId::TpMax)};
  } else if (name == "load" || name == "frontier") {
    s.flow_sampling = FlowSamplingSpec{16, FlowSampling::AdjacentPairs};
    c.attempt_budget = 8;
    s.policies = all_policies();
    if (name == "frontier") {
      c.seeds.clear();
      for (std::uint64_t k = 1; k <= 20; ++k) c.seeds.push_back(k);
      s.sweep.kind = SweepSpec::Kind::Load;
      s.sweep.loads = {0.5, 1.0};
    }
  } else if (name == "fidelity-sweep") {
    s.flow_sampling = FlowSamplingSpec{8, FlowSampling::UniformPairs};
    c.attempt_budget = 8;
    c.purification.enabled = true;
    c.purification.model = PurificationModel{PurificationVariant::Simplified, 0.8, 0.08};
    s.topology.edge.retain_cap = 2;
    s.policies = {only(PolicyId::FaIndex)};
    s.sweep.kind = SweepSpec::Kind::Fidelity;
    s.sweep.f_min = {0.70, 0.75, 0.80, 0.85};
  } else if (name == "heterogeneous") {
    s.topology.length_range_km = std::pair{10.0, 80.0};
    s.flow_sampling = FlowSamplingSpec{8, FlowSampling::UniformPairs};
    c.bsm_success = 0.9;
    c.attempt_budget = 4;
    s.policies = all_policies();
  } else if (name == "coherence") {
    s.flow_sampling = FlowSamplingSpec{8, FlowSampling::UniformPairs};
    c.bsm_success = 0.9;
    c.attempt_budget = 8;
    s.policies = all_policies();
    s.sweep.kind = SweepSpec::Kind::Coherence;
    s.sweep.t_mem_slots = {2, 4, 8};
    s.sweep.t2_seconds = {0.05, 0.1, 0.2};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

} // namespace qfa
