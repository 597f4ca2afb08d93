#include "qfa/scenario_io.hpp"

#include <fstream>
#include <set>

namespace qfa {

using nlohmann::json;

namespace {

// Reads an object field by field and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where))
  {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out)
  {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& ex) {
      throw ConfigError(where_ + "." + key + ": " + ex.what());
    }
  }

  const json* child(const char* key)
  {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const
  {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string_view purification_name(PurificationVariant v)
{
  switch (v) {
    case PurificationVariant::Simplified: return "simplified";
    case PurificationVariant::Bbpssw: return "bbpssw";
    case PurificationVariant::Unset: break;
  }
  return "unset";
}

PurificationVariant parse_purification(const std::string& s)
{
  if (s == "simplified") return PurificationVariant::Simplified;
  if (s == "bbpssw") return PurificationVariant::Bbpssw;
  if (s == "unset") return PurificationVariant::Unset;
  throw ConfigError("purification.variant: unknown variant '" + s + "'");
}

std::string_view sampling_name(FlowSampling m)
{
  return m == FlowSampling::AdjacentPairs ? "adjacent" : "uniform";
}

std::string_view index_form_name(IndexForm f)
{
  return f == IndexForm::Literal ? "literal" : "age-weighted";
}

PolicyConfig policy_from_json(const json& j, const std::string& where)
{
  ObjectReader r(j, where);
  PolicyConfig p;
  std::string name = std::string(policy_name(p.policy));
  r.get("policy", name);
  const auto id = parse_policy(name);
  if (!id) throw ConfigError(where + ".policy: unknown policy '" + name + "'");
  p.policy = *id;
  r.get("tau", p.fa_thr_tau);
  r.get("beta", p.fa_index_beta);
  r.get("thr_strict", p.thr_strict);
  std::string form(index_form_name(p.index_form));
  r.get("index_form", form);
  if (form == "literal") {
    p.index_form = IndexForm::Literal;
  } else if (form != "age-weighted") {
    throw ConfigError(where + ".index_form: expected 'age-weighted' or 'literal'");
  }
  r.finish();
  return p;
}

json policy_to_json(const PolicyConfig& p)
{
  return json{{"policy", policy_name(p.policy)},
              {"tau", p.fa_thr_tau},
              {"beta", p.fa_index_beta},
              {"thr_strict", p.thr_strict},
              {"index_form", index_form_name(p.index_form)}};
}

json edge_to_json(const Edge& e)
{
  return json{{"u", e.u},
              {"v", e.v},
              {"length_km", e.length_km},
              {"modes", e.modes},
              {"retain_cap", e.retain_cap},
              {"base_fidelity", e.base_fidelity}};
}

json flows_to_json(const std::vector<FlowSpec>& flows)
{
  json out = json::array();
  for (const auto& f : flows) {
    out.push_back({{"source", f.source}, {"destination", f.destination}, {"weight", f.weight}});
  }
  return out;
}

} // namespace

std::string_view sweep_kind_name(SweepSpec::Kind kind)
{
  switch (kind) {
    case SweepSpec::Kind::Fidelity: return "fidelity";
    case SweepSpec::Kind::Coherence: return "coherence";
    case SweepSpec::Kind::Load: return "load";
    case SweepSpec::Kind::None: break;
  }
  return "none";
}

ExperimentSpec experiment_from_json(const json& j)
{
  ExperimentSpec s;
  ObjectReader r(j, "config");
  int version = kSchemaVersion;
  r.get("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(version));
  }
  r.get("name", s.name);
  std::string algorithm(RngStreams::kAlgorithm);
  r.get("rng_algorithm", algorithm);
  if (algorithm != RngStreams::kAlgorithm) {
    throw ConfigError("config.rng_algorithm: only '" + std::string(RngStreams::kAlgorithm) +
                      "' is available");
  }

  SimConfig& c = s.config;
  r.get("alpha_per_km", c.alpha_per_km);
  r.get("slot_duration", c.slot_duration);
  r.get("bsm_success", c.bsm_success);
  r.get("f_min", c.f_min);
  r.get("t2_seconds", c.t2_seconds);
  r.get("t_mem_slots", c.t_mem_slots);
  r.get("attempt_budget", c.attempt_budget);
  r.get("path_candidates_per_flow", c.path_candidates_per_flow);
  r.get("slots", c.slots);
  r.get("warmup_slots", c.warmup_slots);
  r.get("seeds", c.seeds);
  r.get("topology_seed", s.topology_seed);

  if (const json* p = r.child("purification")) {
    ObjectReader pr(*p, "config.purification");
    pr.get("enabled", c.purification.enabled);
    std::string variant(purification_name(c.purification.model.variant));
    pr.get("variant", variant);
    c.purification.model.variant = parse_purification(variant);
    pr.get("p_pur", c.purification.model.p_pur);
    pr.get("delta_f", c.purification.model.delta_f);
    pr.finish();
  }

  if (const json* t = r.child("topology")) {
    ObjectReader tr(*t, "config.topology");
    TopologySpec& ts = s.topology;
    std::string kind = "grid";
    tr.get("kind", kind);
    if (kind == "grid") {
      ts.kind = TopologySpec::Kind::Grid;
    } else if (kind == "explicit") {
      ts.kind = TopologySpec::Kind::Explicit;
    } else {
      throw ConfigError("config.topology.kind: expected 'grid' or 'explicit'");
    }
    tr.get("rows", ts.rows);
    tr.get("cols", ts.cols);
    tr.get("link_length_km", ts.link_length_km);
    if (const json* range = tr.child("length_range_km")) {
      if (!range->is_array() || range->size() != 2) {
        throw ConfigError("config.topology.length_range_km: expected [min, max]");
      }
      ts.length_range_km = std::pair{range->at(0).get<double>(), range->at(1).get<double>()};
    }
    tr.get("modes", ts.edge.modes);
    tr.get("retain_cap", ts.edge.retain_cap);
    tr.get("base_fidelity", ts.edge.base_fidelity);
    tr.get("nodes", ts.nodes);
    if (const json* edges = tr.child("edges")) {
      if (!edges->is_array()) throw ConfigError("config.topology.edges: expected an array");
      for (std::size_t i = 0; i < edges->size(); ++i) {
        ObjectReader er(edges->at(i), "config.topology.edges[" + std::to_string(i) + "]");
        Edge e;
        e.id = static_cast<EdgeId>(i);
        e.modes = ts.edge.modes;
        e.retain_cap = ts.edge.retain_cap;
        e.base_fidelity = ts.edge.base_fidelity;
        e.length_km = ts.link_length_km;
        er.get("u", e.u);
        er.get("v", e.v);
        er.get("length_km", e.length_km);
        er.get("modes", e.modes);
        er.get("retain_cap", e.retain_cap);
        er.get("base_fidelity", e.base_fidelity);
        er.finish();
        ts.edges.push_back(e);
      }
    }
    tr.finish();
  }

  if (const json* flows = r.child("flows")) {
    if (!flows->is_array()) throw ConfigError("config.flows: expected an array");
    for (std::size_t i = 0; i < flows->size(); ++i) {
      ObjectReader fr(flows->at(i), "config.flows[" + std::to_string(i) + "]");
      FlowSpec f;
      fr.get("source", f.source);
      fr.get("destination", f.destination);
      fr.get("weight", f.weight);
      fr.finish();
      c.flows.push_back(f);
    }
  }
  if (const json* fs = r.child("flow_sampling")) {
    ObjectReader fr(*fs, "config.flow_sampling");
    FlowSamplingSpec spec;
    fr.get("count", spec.count);
    std::string mode(sampling_name(spec.mode));
    fr.get("mode", mode);
    if (mode == "adjacent") {
      spec.mode = FlowSampling::AdjacentPairs;
    } else if (mode != "uniform") {
      throw ConfigError("config.flow_sampling.mode: expected 'uniform' or 'adjacent'");
    }
    fr.finish();
    s.flow_sampling = spec;
  }

  if (const json* pols = r.child("policies")) {
    if (!pols->is_array() || pols->empty()) {
      throw ConfigError("config.policies: expected a non-empty array");
    }
    s.policies.clear();
    for (std::size_t i = 0; i < pols->size(); ++i) {
      s.policies.push_back(policy_from_json(pols->at(i), "config.policies[" + std::to_string(i) + "]"));
    }
  }

  if (const json* sw = r.child("sweep")) {
    ObjectReader sr(*sw, "config.sweep");
    std::string kind = "none";
    sr.get("kind", kind);
    if (kind == "fidelity") {
      s.sweep.kind = SweepSpec::Kind::Fidelity;
    } else if (kind == "coherence") {
      s.sweep.kind = SweepSpec::Kind::Coherence;
    } else if (kind == "load") {
      s.sweep.kind = SweepSpec::Kind::Load;
    } else if (kind != "none") {
      throw ConfigError("config.sweep.kind: unknown sweep '" + kind + "'");
    }
    sr.get("f_min", s.sweep.f_min);
    sr.get("t_mem_slots", s.sweep.t_mem_slots);
    sr.get("t2_seconds", s.sweep.t2_seconds);
    sr.get("loads", s.sweep.loads);
    sr.finish();
  }

  if (const json* a = r.child("a_ref")) {
    if (!a->is_null()) {
      if (!a->is_number()) throw ConfigError("config.a_ref: expected a number");
      s.a_ref = a->get<double>();
    }
  }
  r.finish();
  return s;
}

json to_json(const ExperimentSpec& s)
{
  const SimConfig& c = s.config;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = s.name;
  j["alpha_per_km"] = c.alpha_per_km;
  j["slot_duration"] = c.slot_duration;
  j["bsm_success"] = c.bsm_success;
  j["f_min"] = c.f_min;
  j["t2_seconds"] = c.t2_seconds;
  j["t_mem_slots"] = c.t_mem_slots;
  j["attempt_budget"] = c.attempt_budget;
  j["path_candidates_per_flow"] = c.path_candidates_per_flow;
  j["slots"] = c.slots;
  j["warmup_slots"] = c.warmup_slots;
  j["seeds"] = c.seeds;
  j["topology_seed"] = s.topology_seed;
  j["purification"] = {{"enabled", c.purification.enabled},
                       {"variant", purification_name(c.purification.model.variant)},
                       {"p_pur", c.purification.model.p_pur},
                       {"delta_f", c.purification.model.delta_f}};

  const TopologySpec& t = s.topology;
  json tj{{"modes", t.edge.modes},
          {"retain_cap", t.edge.retain_cap},
          {"base_fidelity", t.edge.base_fidelity},
          {"link_length_km", t.link_length_km}};
  if (t.kind == TopologySpec::Kind::Grid) {
    tj["kind"] = "grid";
    tj["rows"] = t.rows;
    tj["cols"] = t.cols;
    if (t.length_range_km) {
      tj["length_range_km"] = {t.length_range_km->first, t.length_range_km->second};
    }
  } else {
    tj["kind"] = "explicit";
    tj["nodes"] = t.nodes;
    json edges = json::array();
    for (const Edge& e : t.edges) edges.push_back(edge_to_json(e));
    tj["edges"] = edges;
  }
  j["topology"] = tj;

  j["flows"] = flows_to_json(c.flows);
  if (s.flow_sampling) {
    j["flow_sampling"] = {{"count", s.flow_sampling->count},
                          {"mode", sampling_name(s.flow_sampling->mode)}};
  }
  json pols = json::array();
  for (const auto& p : s.policies) pols.push_back(policy_to_json(p));
  j["policies"] = pols;
  if (s.sweep.kind != SweepSpec::Kind::None) {
    j["sweep"] = {{"kind", sweep_kind_name(s.sweep.kind)},
                  {"f_min", s.sweep.f_min},
                  {"t_mem_slots", s.sweep.t_mem_slots},
                  {"t2_seconds", s.sweep.t2_seconds},
                  {"loads", s.sweep.loads}};
  }
  j["a_ref"] = s.a_ref ? json(*s.a_ref) : json(nullptr);
  return j;
}

ExperimentSpec load_experiment(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError("'" + path + "': " + ex.what());
  }
  return experiment_from_json(j);
}

Topology build_topology(const ExperimentSpec& spec)
{
  const TopologySpec& t = spec.topology;
  if (t.kind == TopologySpec::Kind::Explicit) {
    if (t.edges.empty()) throw ConfigError("explicit topology has no edges");
    return Topology(t.nodes, t.edges);
  }
  if (t.length_range_km) {
    RngStreams rng(spec.topology_seed);
    return build_grid(t.rows, t.cols, t.length_range_km->first, t.length_range_km->second,
                      rng[Stream::TopologyLengths], t.edge);
  }
  return build_grid(t.rows, t.cols, t.link_length_km, t.edge);
}

Scenario resolve(const ExperimentSpec& spec)
{
  Topology topology = build_topology(spec);
  SimConfig config = spec.config;
  if (config.flows.empty() && spec.flow_sampling) {
    RngStreams rng(spec.topology_seed);
    config.flows = sample_flows(topology, spec.flow_sampling->count, spec.flow_sampling->mode,
                                rng[Stream::FlowGeneration]);
  }
  return make_scenario(std::move(config), std::move(topology));
}

json resolved_json(const ExperimentSpec& spec, const Scenario& scenario)
{
  ExperimentSpec out = spec;
  out.config.flows = scenario.config.flows;
  out.flow_sampling.reset();
  out.topology.kind = TopologySpec::Kind::Explicit;
  out.topology.nodes = scenario.topology.node_count();
  out.topology.edges.assign(scenario.topology.edges().begin(), scenario.topology.edges().end());
  out.topology.length_range_km.reset();
  json j = to_json(out);
  j["rng_algorithm"] = RngStreams::kAlgorithm;
  return j;
}

std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec, const Scenario& scenario)
{
  const SimConfig& base = scenario.config;
  switch (spec.sweep.kind) {
    case SweepSpec::Kind::None: return {};
    case SweepSpec::Kind::Fidelity: {
      std::vector<SweepPoint> out;
      for (const auto& p : spec.policies) {
        auto g = fidelity_grid(base, p, spec.sweep.f_min);
        out.insert(out.end(), g.begin(), g.end());
      }
      return out;
    }
    case SweepSpec::Kind::Coherence: {
      std::vector<SweepPoint> out;
      for (const auto& p : spec.policies) {
        auto g = coherence_grid(base, p, spec.sweep.t_mem_slots, spec.sweep.t2_seconds);
        out.insert(out.end(), g.begin(), g.end());
      }
      return out;
    }
    case SweepSpec::Kind::Load: return load_grid(base, spec.policies, spec.sweep.loads);
  }
  return {};
}

} // namespace qfa
