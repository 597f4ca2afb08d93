#include "qfa/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <sstream>
#include <thread>

namespace qfa {

EngineError::EngineError(std::int64_t slot, const std::string& what)
    : std::runtime_error("slot " + std::to_string(slot) + ": " + what), slot_(slot)
{
}

Scenario make_scenario(SimConfig config, Topology topology)
{
  const auto problems = validate_config(config, topology);
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
  auto flows = make_flows(topology, config.flows, config.path_candidates_per_flow);
  return Scenario{std::move(config), std::move(topology), std::move(flows)};
}

std::int64_t FlowAgeState::update(std::size_t flow, std::int64_t t, bool delivered)
{
  if (delivered) {
    ages_[flow] = 0;
    epochs_[flow].push_back(t);
  } else {
    ages_[flow] += 1;
  }
  return ages_[flow];
}

std::vector<std::int64_t> FlowAgeState::intervals(std::size_t flow) const
{
  const auto& e = epochs_[flow];
  std::vector<std::int64_t> out;
  if (e.size() < 2) return out;
  out.reserve(e.size() - 1);
  for (std::size_t i = 1; i < e.size(); ++i) out.push_back(e[i] - e[i - 1]);
  return out;
}

std::span<const std::uint32_t> RunArtifact::age_series(std::size_t flow, std::int64_t from) const
{
  const auto n = static_cast<std::size_t>(slots);
  return std::span<const std::uint32_t>(ages).subspan(flow * n + static_cast<std::size_t>(from),
                                                      n - static_cast<std::size_t>(from));
}

std::span<const std::uint8_t> RunArtifact::delivery_series(std::size_t flow, std::int64_t from) const
{
  const auto n = static_cast<std::size_t>(slots);
  return std::span<const std::uint8_t>(delivered).subspan(flow * n + static_cast<std::size_t>(from),
                                                          n - static_cast<std::size_t>(from));
}

SlotRecord RunArtifact::record(std::int64_t t) const
{
  if (t < 1 || t > slots) throw std::out_of_range("slot out of range");
  SlotRecord r;
  r.slot = t;
  for (std::size_t f = 0; f < flow_count; ++f) {
    r.delivered.push_back(delivered_at(f, t) ? 1 : 0);
    r.ages.push_back(age(f, t));
  }
  r.n_succ = n_succ[static_cast<std::size_t>(t - 1)];
  for (std::size_t e = 0; e < edge_count; ++e) {
    r.retained.push_back(retained[static_cast<std::size_t>(t - 1) * edge_count + e]);
  }
  return r;
}

namespace {

class PairStore {
 public:
  virtual ~PairStore() = default;
  virtual void begin_slot(std::int64_t t) = 0;
  virtual void deposit(EdgeId e, std::int64_t t, int count) = 0;
  virtual PairId deposit_output(EdgeId e, std::int64_t t, double fidelity) = 0;
  virtual StoredPair take(EdgeId e, PairId id) = 0;
  virtual std::span<const StoredPair> pairs(EdgeId e) const = 0;
  virtual std::size_t violations() const { return 0; }
  virtual InventoryLedger totals() const { return {}; }
};

class InventoryStore final : public PairStore {
 public:
  InventoryStore(const Topology& topology, const SimConfig& c)
      : inv_(topology, c.t_mem_slots, DecayLaw{c.slot_duration, c.t2_seconds})
  {
  }
  void begin_slot(std::int64_t t) override { inv_.advance_slot(t); }
  void deposit(EdgeId e, std::int64_t t, int count) override { inv_.deposit(e, t, count); }
  PairId deposit_output(EdgeId e, std::int64_t t, double f) override
  {
    return inv_.deposit_with_fidelity(e, t, f);
  }
  StoredPair take(EdgeId e, PairId id) override { return inv_.consume_pair(e, id); }
  std::span<const StoredPair> pairs(EdgeId e) const override { return inv_.pairs(e); }
  std::size_t violations() const override { return inv_.conservation_violations(); }
  InventoryLedger totals() const override { return inv_.totals(); }

 private:
  Inventory inv_;
};

// Pairs live for the slot they were generated in and nothing else.
class MemorylessStore final : public PairStore {
 public:
  explicit MemorylessStore(const Topology& topology) : pairs_(topology.edge_count())
  {
    for (const Edge& e : topology.edges()) {
      base_.push_back(e.base_fidelity);
      caps_.push_back(static_cast<std::size_t>(e.retain_cap));
    }
  }
  void begin_slot(std::int64_t) override
  {
    for (auto& p : pairs_) p.clear();
  }
  void deposit(EdgeId e, std::int64_t t, int count) override
  {
    const auto n = std::min(static_cast<std::size_t>(std::max(count, 0)), caps_[e]);
    for (std::size_t i = 0; i < n; ++i) pairs_[e].push_back({next_++, e, t, base_[e], base_[e]});
  }
  PairId deposit_output(EdgeId e, std::int64_t t, double f) override
  {
    auto& list = pairs_[e];
    const auto pos = std::find_if(list.begin(), list.end(),
                                  [&](const StoredPair& p) { return p.fidelity < f; });
    const PairId id = next_++;
    list.insert(pos, StoredPair{id, e, t, f, f});
    return id;
  }
  StoredPair take(EdgeId e, PairId id) override
  {
    auto& list = pairs_[e];
    const auto it =
        std::find_if(list.begin(), list.end(), [id](const StoredPair& p) { return p.id == id; });
    if (it == list.end()) throw SchedulingError("pair " + std::to_string(id) + " not available");
    StoredPair out = *it;
    list.erase(it);
    return out;
  }
  std::span<const StoredPair> pairs(EdgeId e) const override { return pairs_[e]; }

 private:
  std::vector<std::vector<StoredPair>> pairs_;
  std::vector<double> base_;
  std::vector<std::size_t> caps_;
  PairId next_ = 1;
};

struct PurifyResult {
  PairId primary;
  bool ok;
  PairId output;
};

} // namespace

RunArtifact run(const Scenario& scenario, const PolicyConfig& policy, std::uint64_t seed,
                const EngineOptions& options)
{
  const SimConfig& c = scenario.config;
  const Topology& topo = scenario.topology;
  const std::size_t n_flows = scenario.flows.size();
  const std::size_t n_edges = topo.edge_count();
  const auto T = c.slots;

  std::unique_ptr<PairStore> store;
  if (options.storage == StorageMode::Memoryless) {
    if (c.t_mem_slots != 1) throw ConfigError("memoryless storage requires t_mem_slots = 1");
    store = std::make_unique<MemorylessStore>(topo);
  } else {
    store = std::make_unique<InventoryStore>(topo, c);
  }

  RunArtifact art;
  art.seed = seed;
  art.policy = policy;
  art.slots = T;
  art.warmup = c.warmup_slots;
  art.flow_count = n_flows;
  art.edge_count = n_edges;
  art.ages.resize(n_flows * static_cast<std::size_t>(T));
  art.delivered.resize(n_flows * static_cast<std::size_t>(T));
  art.n_succ.resize(static_cast<std::size_t>(T));
  art.retained.resize(n_edges * static_cast<std::size_t>(T));
  art.final_state = FlowAgeState(n_flows);
  FlowAgeState& state = art.final_state;

  RngStreams rng(seed);
  const ExternalPhase external(topo, c.alpha_per_km);
  ExternalOutcome outcome;
  std::vector<std::vector<PairView>> views(n_edges);
  std::vector<std::int64_t> prev_ages(n_flows, 0);
  std::vector<std::uint8_t> hit(n_flows, 0);
  std::vector<PurifyResult> purified;
  std::vector<double> fids;

  SlotObservation obs;
  obs.topology = &topo;
  obs.flows = scenario.flows;
  obs.ages = prev_ages;
  obs.edge_pairs = views;
  obs.external = &outcome;
  obs.bsm_success = c.bsm_success;
  obs.f_min = c.f_min;
  obs.attempt_budget = c.attempt_budget;
  obs.purification = &c.purification;

  for (std::int64_t t = 1; t <= T; ++t) {
    try {
      store->begin_slot(t);
      external.run(rng[Stream::LinkAttempts], outcome);
      for (EdgeId e = 0; e < n_edges; ++e) {
        store->deposit(e, t, outcome.retained[e]);
        art.retained[static_cast<std::size_t>(t - 1) * n_edges + e] =
            static_cast<std::uint16_t>(std::min(outcome.retained[e], 0xffff));
      }
      for (EdgeId e = 0; e < n_edges; ++e) {
        views[e].clear();
        for (const StoredPair& p : store->pairs(e)) views[e].push_back({p.id, p.fidelity});
      }

      const Action action = select_action(obs, policy);
      if (options.check_actions) {
        const auto problems = check_action(action, obs);
        if (!problems.empty()) throw SchedulingError("invalid action: " + problems.front());
      }

      purified.clear();
      for (const PurificationOp& op : action.purifications) {
        const StoredPair a = store->take(op.edge, op.first);
        const StoredPair b = store->take(op.edge, op.second);
        const auto res = purify(a.fidelity, b.fidelity, c.purification.model);
        const bool ok = rng[Stream::Purification].bernoulli(res.success_prob);
        const PairId out = ok ? store->deposit_output(op.edge, t, res.fidelity) : 0;
        purified.push_back({op.first, ok, out});
        ++art.purification_attempts;
        if (ok) ++art.purification_successes;
      }
      const auto purification_of = [&](PairId primary) -> const PurifyResult& {
        return *std::find_if(purified.begin(), purified.end(),
                             [&](const PurifyResult& r) { return r.primary == primary; });
      };

      std::fill(hit.begin(), hit.end(), 0);
      int n_succ = 0;
      for (const Activation& a : action.activations) {
        ActivationRecord rec;
        rec.slot = t;
        rec.flow = a.flow;
        rec.path_index = a.path_index;
        for (const HopAssignment& hop : a.hops) {
          if (hop.partner && !purification_of(hop.primary).ok) rec.purification_ok = false;
        }
        if (rec.purification_ok) {
          fids.clear();
          for (const HopAssignment& hop : a.hops) {
            const PairId id = hop.partner ? purification_of(hop.primary).output : hop.primary;
            fids.push_back(store->take(hop.edge, id).fidelity);
            if (options.keep_activations) rec.consumed_edges.push_back(hop.edge);
          }
          rec.f_end = swap_compose(fids);
          for (std::size_t i = 0; i + 1 < a.hops.size(); ++i) {
            const bool ok = rng[Stream::Bsm].bernoulli(c.bsm_success);
            if (!ok && rec.failed_bsm < 0) rec.failed_bsm = static_cast<int>(i);
          }
          rec.delivered = rec.failed_bsm < 0 && rec.f_end >= c.f_min;
          if (rec.delivered) {
            hit[a.flow] = 1;
            ++n_succ;
          }
        }
        if (options.keep_activations) art.activations.push_back(std::move(rec));
      }

      const auto col = static_cast<std::size_t>(t - 1);
      for (std::size_t f = 0; f < n_flows; ++f) {
        const auto age = state.update(f, t, hit[f] != 0);
        prev_ages[f] = age;
        art.ages[f * static_cast<std::size_t>(T) + col] = static_cast<std::uint32_t>(age);
        art.delivered[f * static_cast<std::size_t>(T) + col] = hit[f];
      }
      art.n_succ[col] = static_cast<std::uint16_t>(n_succ);
      if (store->violations() != 0) ++art.conservation_violations;
    } catch (const EngineError&) {
      throw;
    } catch (const std::exception& ex) {
      throw EngineError(t, ex.what());
    }
  }
  art.ledger = store->totals();
  return art;
}

std::vector<RunArtifact> run_batch(const Scenario& scenario, const PolicyConfig& policy,
                                   const EngineOptions& options, unsigned threads)
{
  const auto& seeds = scenario.config.seeds;
  if (seeds.empty()) throw ConfigError("run_batch: no seeds configured");
  std::vector<RunArtifact> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run(scenario, policy, seeds[i], options);
      } catch (const std::exception& ex) {
        errors[i] = std::make_exception_ptr(
            std::runtime_error("seed " + std::to_string(seeds[i]) + ": " + ex.what()));
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

} // namespace qfa
