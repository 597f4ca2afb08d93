#include "qfa/memory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace qfa {
namespace {

Topology line(int cap, double f0 = 0.82)
{
  return build_grid(1, 2, 10.0, EdgeDefaults{8, cap, f0});
}

TEST(Inventory, SingleSlotMemoryEmptiesOnAdvance)
{
  const Topology t = line(1);
  Inventory inv(t, 1, DecayLaw{0.01, 1.0});
  inv.advance_slot(1);
  inv.deposit(0, 1, 1);
  EXPECT_EQ(inv.size(0), 1u);
  EXPECT_EQ(inv.advance_slot(2), 1);
  EXPECT_EQ(inv.size(0), 0u);
}

TEST(Inventory, DecayExample)
{
  const Topology t = line(2);
  Inventory inv(t, 4, DecayLaw{0.1, 1.0});
  inv.advance_slot(1);
  inv.deposit(0, 1, 1);
  inv.advance_slot(2);
  inv.advance_slot(3);
  ASSERT_EQ(inv.size(0), 1u);
  EXPECT_NEAR(inv.pairs(0)[0].fidelity, 0.25 + 0.57 * std::exp(-0.2), 1e-12);
  EXPECT_NEAR(inv.pairs(0)[0].fidelity, 0.7168, 2e-4);
}

TEST(Inventory, EmptyAdvance)
{
  const Topology t = line(1);
  Inventory inv(t, 3, DecayLaw{});
  EXPECT_EQ(inv.advance_slot(1), 0);
}

TEST(Inventory, DoubleAdvanceIsAnError)
{
  const Topology t = line(1);
  Inventory inv(t, 3, DecayLaw{});
  inv.advance_slot(5);
  EXPECT_THROW(inv.advance_slot(5), std::logic_error);
}

TEST(Inventory, DepositCapsAndPrefersFreshPairs)
{
  const Topology t = line(1);
  Inventory inv(t, 4, DecayLaw{0.01, 1.0});
  inv.advance_slot(1);
  EXPECT_EQ(inv.deposit(0, 1, 3), 1);
  EXPECT_EQ(inv.size(0), 1u);
  inv.advance_slot(2);
  EXPECT_EQ(inv.deposit(0, 2, 1), 1);
  ASSERT_EQ(inv.size(0), 1u);
  EXPECT_EQ(inv.pairs(0)[0].created_slot, 2);
  EXPECT_EQ(inv.ledger(0).evicted, 1);
  EXPECT_EQ(inv.deposit(0, 2, 0), 0);
  EXPECT_EQ(inv.size(0), 1u);
}

TEST(Inventory, ConsumeYoungestFirst)
{
  const Topology t = line(2);
  Inventory inv(t, 5, DecayLaw{0.01, 1.0});
  inv.advance_slot(1);
  inv.deposit(0, 1, 1);
  inv.advance_slot(2);
  inv.advance_slot(3);
  inv.deposit(0, 3, 1);
  const auto got = inv.consume(0, 1);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].age(3), 0);
  EXPECT_TRUE(inv.consume(0, 0).empty());
  EXPECT_THROW(inv.consume(0, 2), SchedulingError);
}

TEST(Inventory, ConsumePairById)
{
  const Topology t = line(2);
  Inventory inv(t, 2, DecayLaw{});
  inv.advance_slot(1);
  inv.deposit(0, 1, 2);
  const PairId id = inv.pairs(0)[1].id;
  EXPECT_EQ(inv.consume_pair(0, id).id, id);
  EXPECT_THROW(inv.consume_pair(0, id), SchedulingError);
}

TEST(Inventory, PurifiedOutputKeepsItsOwnBase)
{
  const Topology t = line(2);
  Inventory inv(t, 4, DecayLaw{0.1, 1.0});
  inv.advance_slot(1);
  inv.deposit_with_fidelity(0, 1, 0.9);
  inv.advance_slot(2);
  EXPECT_NEAR(inv.pairs(0)[0].fidelity, 0.25 + 0.65 * std::exp(-0.1), 1e-12);
}

TEST(Inventory, LedgerBalancesUnderRandomTraffic)
{
  const Topology t = build_grid(2, 3, 10.0, EdgeDefaults{8, 3, 0.82});
  Inventory inv(t, 4, DecayLaw{0.01, 0.05});
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> count(0, 4);
  for (std::int64_t s = 1; s <= 5000; ++s) {
    inv.advance_slot(s);
    for (EdgeId e = 0; e < t.edge_count(); ++e) {
      inv.deposit(e, s, count(rng));
      if (count(rng) == 0 && inv.size(e) > 0) inv.deposit_with_fidelity(e, s, 0.9);
      const int take = std::min<int>(count(rng) % 3, static_cast<int>(inv.size(e)));
      inv.consume(e, take);
      for (const auto& p : inv.pairs(e)) {
        ASSERT_LE(p.fidelity, p.base_fidelity);
        ASSERT_GE(p.fidelity, 0.25);
        ASSERT_LT(p.age(s), 4);
      }
    }
    ASSERT_EQ(inv.conservation_violations(), 0u);
  }
  const auto total = inv.totals();
  EXPECT_GT(total.expired, 0);
  EXPECT_GT(total.evicted, 0);
}

} // namespace
} // namespace qfa
