#include "qfa/memory.hpp"

#include <algorithm>
#include <cassert>

namespace qfa {

Inventory::Inventory(const Topology& topology, int t_mem_slots, DecayLaw decay)
    : pairs_(topology.edge_count()),
      ledgers_(topology.edge_count()),
      t_mem_(t_mem_slots),
      decay_(decay)
{
  if (t_mem_slots < 1) throw ConfigError("t_mem_slots must be at least 1");
  for (const Edge& e : topology.edges()) {
    caps_.push_back(static_cast<std::size_t>(e.retain_cap));
    base_fidelity_.push_back(e.base_fidelity);
    pairs_[e.id].reserve(caps_.back() + 1);
  }
}

int Inventory::advance_slot(std::int64_t t)
{
  if (advanced_ && t <= now_) {
    throw std::logic_error("Inventory::advance_slot called twice for slot " + std::to_string(t));
  }
  advanced_ = true;
  now_ = t;
  int expired = 0;
  for (std::size_t e = 0; e < pairs_.size(); ++e) {
    auto& list = pairs_[e];
    const auto old_size = list.size();
    std::erase_if(list, [&](const StoredPair& p) { return p.age(t) >= t_mem_; });
    const auto dropped = static_cast<int>(old_size - list.size());
    ledgers_[e].expired += dropped;
    expired += dropped;
    for (StoredPair& p : list) p.fidelity = decay_.apply(p.base_fidelity, p.age(t));
  }
  return expired;
}

void Inventory::insert_sorted(EdgeId edge, StoredPair pair)
{
  auto& list = pairs_[edge];
  // Equal decay rates keep this order stable as every pair ages by one slot.
  const auto pos = std::find_if(list.begin(), list.end(), [&](const StoredPair& p) {
    return p.fidelity < pair.fidelity ||
           (p.fidelity == pair.fidelity && p.created_slot < pair.created_slot);
  });
  list.insert(pos, pair);
}

int Inventory::deposit(EdgeId edge, std::int64_t t, int count)
{
  if (count <= 0) return 0;
  const auto cap = caps_.at(edge);
  const int stored = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(count), cap));
  auto& list = pairs_[edge];
  const std::size_t overflow =
      list.size() + static_cast<std::size_t>(stored) > cap
          ? list.size() + static_cast<std::size_t>(stored) - cap
          : 0;
  // Freshest pairs are kept: evict from the low-fidelity tail.
  list.resize(list.size() - overflow);
  ledgers_[edge].evicted += static_cast<std::int64_t>(overflow);
  for (int i = 0; i < stored; ++i) {
    const double f = base_fidelity_[edge];
    insert_sorted(edge, StoredPair{next_id_++, edge, t, f, f});
  }
  ledgers_[edge].deposits += stored;
  return stored;
}

PairId Inventory::deposit_with_fidelity(EdgeId edge, std::int64_t t, double fidelity)
{
  auto& list = pairs_.at(edge);
  if (list.size() >= caps_[edge]) {
    list.pop_back();
    ledgers_[edge].evicted += 1;
  }
  const PairId id = next_id_++;
  const double f = clamp_fidelity(fidelity);
  insert_sorted(edge, StoredPair{id, edge, t, f, f});
  ledgers_[edge].deposits += 1;
  return id;
}

std::vector<StoredPair> Inventory::consume(EdgeId edge, int n)
{
  auto& list = pairs_.at(edge);
  if (n < 0 || static_cast<std::size_t>(n) > list.size()) {
    throw SchedulingError("consume: edge " + std::to_string(edge) + " holds " +
                          std::to_string(list.size()) + " pairs, " + std::to_string(n) +
                          " requested");
  }
  std::vector<StoredPair> out(list.begin(), list.begin() + n);
  list.erase(list.begin(), list.begin() + n);
  ledgers_[edge].consumed += n;
  return out;
}

StoredPair Inventory::consume_pair(EdgeId edge, PairId id)
{
  auto& list = pairs_.at(edge);
  const auto it =
      std::find_if(list.begin(), list.end(), [id](const StoredPair& p) { return p.id == id; });
  if (it == list.end()) {
    throw SchedulingError("consume_pair: pair " + std::to_string(id) + " not stored on edge " +
                          std::to_string(edge));
  }
  StoredPair out = *it;
  list.erase(it);
  ledgers_[edge].consumed += 1;
  return out;
}

InventoryLedger Inventory::totals() const
{
  InventoryLedger sum;
  for (const auto& l : ledgers_) {
    sum.deposits += l.deposits;
    sum.consumed += l.consumed;
    sum.expired += l.expired;
    sum.evicted += l.evicted;
  }
  return sum;
}

std::size_t Inventory::conservation_violations() const
{
  std::size_t bad = 0;
  for (std::size_t e = 0; e < pairs_.size(); ++e) {
    if (ledgers_[e].balance() != static_cast<std::int64_t>(pairs_[e].size())) ++bad;
    if (pairs_[e].size() > caps_[e]) ++bad;
  }
  return bad;
}

} // namespace qfa
