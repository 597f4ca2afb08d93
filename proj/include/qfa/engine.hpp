#pragma once

// Slot loop: aging, link generation, policy decision, purification, swaps,
// usable-delivery test and age update.

#include "qfa/memory.hpp"
#include "qfa/scheduling.hpp"
#include "qfa/stochastic.hpp"
#include "qfa/topology.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qfa {

class EngineError : public std::runtime_error {
 public:
  EngineError(std::int64_t slot, const std::string& what);
  std::int64_t slot() const { return slot_; }

 private:
  std::int64_t slot_;
};

/// Validated, immutable inputs shared by every run of one configuration.
struct Scenario {
  SimConfig config;
  Topology topology;
  std::vector<Flow> flows;
};

/// Validates `config` against `topology` and enumerates candidate paths.
/// Throws ConfigError listing every violation.
Scenario make_scenario(SimConfig config, Topology topology);

/// Per-flow age process: A(t) = 0 on a usable delivery, A(t-1) + 1 otherwise,
/// starting from A(0) = 0.
class FlowAgeState {
 public:
  explicit FlowAgeState(std::size_t flows = 0) : ages_(flows, 0), epochs_(flows) {}

  /// Applies slot t's outcome for `flow`; returns the new age.
  std::int64_t update(std::size_t flow, std::int64_t t, bool delivered);

  std::size_t flow_count() const { return ages_.size(); }
  std::int64_t age(std::size_t flow) const { return ages_[flow]; }
  std::span<const std::int64_t> ages() const { return ages_; }
  std::span<const std::int64_t> epochs(std::size_t flow) const { return epochs_[flow]; }
  /// tau_n = t_n - t_(n-1) between consecutive deliveries.
  std::vector<std::int64_t> intervals(std::size_t flow) const;

 private:
  std::vector<std::int64_t> ages_;
  std::vector<std::vector<std::int64_t>> epochs_;
};

struct ActivationRecord {
  std::int64_t slot = 0;
  std::size_t flow = 0;
  std::size_t path_index = 0;
  bool purification_ok = true;  // false: a purified hop failed and nothing was swapped
  int failed_bsm = -1;          // index of the first failed swap, -1 if all succeeded
  double f_end = 0.0;
  bool delivered = false;
  std::vector<EdgeId> consumed_edges; // one entry per pair removed by the swap chain
};

/// One slot of a run, materialized from the columnar artifact.
struct SlotRecord {
  std::int64_t slot = 0;
  std::vector<std::uint8_t> delivered;
  std::vector<std::int64_t> ages;
  int n_succ = 0;
  std::vector<int> retained;
};

enum class StorageMode {
  Inventory,  // stored pairs age, decay and expire after T_mem slots
  Memoryless, // only this slot's pairs exist; valid with T_mem = 1 only
};

struct EngineOptions {
  StorageMode storage = StorageMode::Inventory;
  bool keep_activations = false;
  bool check_actions = true;
};

struct RunArtifact {
  std::uint64_t seed = 0;
  PolicyConfig policy;
  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  std::size_t flow_count = 0;
  std::size_t edge_count = 0;

  std::vector<std::uint32_t> ages;       // [flow * slots + (t - 1)], after the update
  std::vector<std::uint8_t> delivered;   // same layout
  std::vector<std::uint16_t> n_succ;     // [t - 1]
  std::vector<std::uint16_t> retained;   // [(t - 1) * edges + e]
  std::vector<ActivationRecord> activations;
  FlowAgeState final_state;

  InventoryLedger ledger;
  std::int64_t conservation_violations = 0; // slots whose ledger failed to balance
  std::int64_t purification_attempts = 0;
  std::int64_t purification_successes = 0;

  std::uint32_t age(std::size_t flow, std::int64_t t) const
  {
    return ages[flow * static_cast<std::size_t>(slots) + static_cast<std::size_t>(t - 1)];
  }
  bool delivered_at(std::size_t flow, std::int64_t t) const
  {
    return delivered[flow * static_cast<std::size_t>(slots) + static_cast<std::size_t>(t - 1)] != 0;
  }
  /// Ages of one flow for slots t in (from, slots].
  std::span<const std::uint32_t> age_series(std::size_t flow, std::int64_t from = 0) const;
  std::span<const std::uint8_t> delivery_series(std::size_t flow, std::int64_t from = 0) const;
  SlotRecord record(std::int64_t t) const;
};

RunArtifact run(const Scenario& scenario, const PolicyConfig& policy, std::uint64_t seed,
                const EngineOptions& options = {});

/// One artifact per configured seed, in seed order. `threads` = 0 picks the
/// hardware concurrency.
std::vector<RunArtifact> run_batch(const Scenario& scenario, const PolicyConfig& policy,
                                   const EngineOptions& options = {}, unsigned threads = 0);

} // namespace qfa
