#pragma once

// Per-edge stored-pair inventories with aging, expiry and a conservation ledger.

#include "qfa/physics.hpp"
#include "qfa/topology.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qfa {

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using PairId = std::uint64_t;

struct DecayLaw {
  double slot_duration = 0.01;
  double t2_seconds = 1.0;

  double apply(double base_fidelity, std::int64_t age_slots) const
  {
    return decohere(base_fidelity, age_slots, slot_duration, t2_seconds);
  }
};

/// One link-level pair held in memory. Its fidelity is always derived from
/// (base_fidelity, age); purified outputs carry their own base fidelity.
struct StoredPair {
  PairId id = 0;
  EdgeId edge = 0;
  std::int64_t created_slot = 0;
  double base_fidelity = 1.0;
  double fidelity = 1.0; // cached decay of base_fidelity at the current slot

  std::int64_t age(std::int64_t now) const { return now - created_slot; }
};

struct InventoryLedger {
  std::int64_t deposits = 0; // includes purification outputs
  std::int64_t consumed = 0; // swaps and purification inputs
  std::int64_t expired = 0;
  std::int64_t evicted = 0;

  std::int64_t balance() const { return deposits - consumed - expired - evicted; }
};

class Inventory {
 public:
  Inventory(const Topology& topology, int t_mem_slots, DecayLaw decay);

  /// Drops pairs aged T_mem or more and refreshes fidelities for slot t.
  /// Must be called exactly once per slot, with increasing t.
  int advance_slot(std::int64_t t);

  /// Stores up to `count` fresh pairs at F0(e). When the edge is full the
  /// lowest-fidelity (oldest) pairs are evicted to make room.
  int deposit(EdgeId edge, std::int64_t t, int count);

  /// Stores one pair with an explicit fidelity (a purification output).
  PairId deposit_with_fidelity(EdgeId edge, std::int64_t t, double fidelity);

  /// Removes and returns the n highest-fidelity pairs on the edge.
  std::vector<StoredPair> consume(EdgeId edge, int n);

  /// Removes one specific pair; throws SchedulingError if it is not stored on `edge`.
  StoredPair consume_pair(EdgeId edge, PairId id);

  /// Pairs sorted by descending fidelity (youngest first for equal base).
  std::span<const StoredPair> pairs(EdgeId edge) const { return pairs_.at(edge); }
  std::size_t size(EdgeId edge) const { return pairs_.at(edge).size(); }
  std::size_t capacity(EdgeId edge) const { return caps_.at(edge); }

  const InventoryLedger& ledger(EdgeId edge) const { return ledgers_.at(edge); }
  InventoryLedger totals() const;

  /// Number of edges whose ledger balance differs from the stored count.
  std::size_t conservation_violations() const;

  std::int64_t current_slot() const { return now_; }
  const DecayLaw& decay() const { return decay_; }

 private:
  void insert_sorted(EdgeId edge, StoredPair pair);

  std::vector<std::vector<StoredPair>> pairs_;
  std::vector<std::size_t> caps_;
  std::vector<double> base_fidelity_;
  std::vector<InventoryLedger> ledgers_;
  int t_mem_;
  DecayLaw decay_;
  std::int64_t now_ = 0;
  bool advanced_ = false;
  PairId next_id_ = 1;
};

} // namespace qfa
