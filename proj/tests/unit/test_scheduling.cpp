#include "qfa/scheduling.hpp"

#include "random_observation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace qfa {
namespace {

// Hand-built observation over a fixed topology.
struct Fixture {
  Topology topology;
  std::vector<Flow> flows;
  std::vector<std::int64_t> ages;
  std::vector<std::vector<PairView>> pairs;
  PurificationConfig purification;
  double q = 0.95;
  double f_min = 0.75;
  int budget = 8;

  Fixture(Topology t, const std::vector<FlowSpec>& specs, int k = 3)
      : topology(std::move(t)),
        flows(make_flows(topology, specs, k)),
        ages(specs.size(), 1),
        pairs(topology.edge_count())
  {
  }

  void fill(double f = 0.82, int n = 1)
  {
    PairId id = 1;
    for (auto& list : pairs) {
      list.clear();
      for (int i = 0; i < n; ++i) list.push_back({id++, f});
    }
  }

  SlotObservation obs() const
  {
    SlotObservation o;
    o.topology = &topology;
    o.flows = flows;
    o.ages = ages;
    o.edge_pairs = pairs;
    o.bsm_success = q;
    o.f_min = f_min;
    o.attempt_budget = budget;
    o.purification = &purification;
    return o;
  }
};

const EdgeDefaults kEdge{8, 1, 0.82};

std::vector<std::size_t> flows_of(const Action& a)
{
  std::vector<std::size_t> out;
  for (const auto& act : a.activations) out.push_back(act.flow);
  return out;
}

TEST(EstimateUtility, Examples)
{
  Fixture fx(build_grid(1, 4, 10.0, kEdge), {{0, 1, 1.0}, {0, 3, 1.0}});
  fx.fill(0.82);
  const auto o = fx.obs();
  const PairAvailability avail(o);
  const auto one = estimate_utility(0, o, avail);
  EXPECT_DOUBLE_EQ(one.utility, 1.0);
  ASSERT_TRUE(one.plan);
  EXPECT_DOUBLE_EQ(one.predicted_fidelity, 0.82);
  // 3 hops at F = 0.82 fall below 0.75.
  EXPECT_EQ(estimate_utility(1, o, avail).utility, 0.0);
  EXPECT_FALSE(estimate_utility(1, o, avail).plan);

  fx.fill(1.0);
  const auto o2 = fx.obs();
  const auto three = estimate_utility(1, o2, PairAvailability(o2));
  EXPECT_NEAR(three.utility, 0.9025, 1e-15);
}

TEST(EstimateUtility, NoPairsNoPath)
{
  Fixture fx(build_grid(1, 2, 10.0, kEdge), {{0, 1, 1.0}});
  const auto o = fx.obs();
  EXPECT_EQ(estimate_utility(0, o, PairAvailability(o)).utility, 0.0);
}

TEST(TpMax, EmptyWhenNothingFeasible)
{
  Fixture fx(build_grid(3, 3, 10.0, kEdge), {{0, 1, 1.0}, {3, 4, 1.0}});
  EXPECT_TRUE(tp_max(fx.obs()).activations.empty());
}

TEST(TpMax, SharedEdgeWithOnePairServesOne)
{
  Fixture fx(build_grid(1, 2, 10.0, kEdge), {{0, 1, 1.0}, {1, 0, 1.0}});
  fx.fill();
  fx.budget = 2;
  const auto a = tp_max(fx.obs());
  EXPECT_EQ(flows_of(a), (std::vector<std::size_t>{0}));
  EXPECT_TRUE(check_action(a, fx.obs()).empty());
}

TEST(TpMax, BudgetBinds)
{
  const Topology g = build_grid(3, 3, 10.0, kEdge);
  std::vector<FlowSpec> specs;
  for (const Edge& e : g.edges()) specs.push_back({e.u, e.v, 1.0});
  for (int i = 0; i < 4; ++i) specs.push_back({g.edge(i).v, g.edge(i).u, 1.0});
  Fixture fx(g, specs);
  fx.fill(0.82, 2);
  const auto a = tp_max(fx.obs());
  EXPECT_EQ(a.activations.size(), 8u);
  EXPECT_EQ(flows_of(a), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(TpMax, PrefersShorterPaths)
{
  Fixture fx(build_grid(1, 3, 10.0, kEdge), {{0, 2, 1.0}, {1, 2, 1.0}});
  fx.fill(1.0);
  fx.budget = 1;
  EXPECT_EQ(flows_of(tp_max(fx.obs())), (std::vector<std::size_t>{1}));
}

TEST(FidMax, RankingAndTies)
{
  Fixture fx(build_grid(1, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}});
  fx.fill();
  fx.budget = 1;
  fx.pairs[0] = {{1, 0.78}};
  fx.pairs[1] = {{2, 0.80}};
  EXPECT_EQ(flows_of(fid_max(fx.obs())), (std::vector<std::size_t>{1}));
  fx.pairs[0] = {{1, 0.80}};
  EXPECT_EQ(flows_of(fid_max(fx.obs())), (std::vector<std::size_t>{0}));
  Fixture single(build_grid(1, 2, 10.0, kEdge), {{0, 1, 1.0}});
  single.fill();
  EXPECT_EQ(flows_of(fid_max(single.obs())), (std::vector<std::size_t>{0}));
}

TEST(FidMax, GatesOnFmin)
{
  Fixture fx(build_grid(1, 2, 10.0, kEdge), {{0, 1, 1.0}});
  fx.fill(0.7);
  EXPECT_TRUE(fid_max(fx.obs()).activations.empty());
}

TEST(FaThr, ZeroThresholdEqualsTpMax)
{
  Fixture fx(build_grid(3, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {4, 5, 1.0}});
  fx.fill(1.0);
  fx.budget = 2;
  fx.ages = {3, 1, 9, 2};
  EXPECT_EQ(fa_thr(fx.obs(), 0.0).activation_set(), tp_max(fx.obs()).activation_set());
}

TEST(FaThr, EligibleFlowServedFirst)
{
  Fixture fx(build_grid(1, 3, 10.0, kEdge), {{0, 1, 1.0}, {0, 2, 1.0}});
  fx.fill(1.0);
  fx.budget = 1;
  fx.ages = {0, 10};
  EXPECT_EQ(flows_of(fa_thr(fx.obs(), 5.0)), (std::vector<std::size_t>{1}));
  EXPECT_EQ(flows_of(tp_max(fx.obs())), (std::vector<std::size_t>{0}));
}

TEST(FaThr, LeftoverBudgetFilledUnlessStrict)
{
  Fixture fx(build_grid(1, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}});
  fx.fill();
  fx.ages = {1, 2};
  EXPECT_EQ(fa_thr(fx.obs(), 5.0).activations.size(), 2u);
  EXPECT_TRUE(fa_thr(fx.obs(), 5.0, true).activations.empty());
}

TEST(FaIndex, LiteralValueExample)
{
  EXPECT_DOUBLE_EQ(fa_index_value(0.5, 10, 0.1, IndexForm::Literal), 0.25);
  EXPECT_DOUBLE_EQ(fa_index_value(0.5, 10, 0.1, IndexForm::AgeWeighted), 1.0);
}

TEST(FaIndex, ZeroAgesEqualTpMax)
{
  Fixture fx(build_grid(3, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {4, 5, 1.0}});
  fx.fill(1.0);
  fx.budget = 2;
  fx.ages = {0, 0, 0, 0};
  for (IndexForm form : {IndexForm::AgeWeighted, IndexForm::Literal}) {
    EXPECT_EQ(fa_index(fx.obs(), 0.1, form).activation_set(), tp_max(fx.obs()).activation_set());
  }
}

TEST(FaIndex, StaleFlowsRiseUnderDefaultForm)
{
  Fixture fx(build_grid(1, 2, 10.0, kEdge), {{0, 1, 1.0}, {1, 0, 1.0}});
  fx.fill();
  fx.budget = 1;
  fx.ages = {0, 4};
  EXPECT_EQ(flows_of(fa_index(fx.obs(), 0.1)), (std::vector<std::size_t>{1}));
  EXPECT_EQ(flows_of(fa_index(fx.obs(), 0.1, IndexForm::Literal)), (std::vector<std::size_t>{0}));
  EXPECT_THROW(fa_index(fx.obs(), 0.0), ConfigError);
}

TEST(Policies, ArgmaxEquivalenceOnRandomObservations)
{
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto o = testing::random_observation(rng);
    const auto view = o.view();
    const auto tp = tp_max(view).activation_set();
    EXPECT_EQ(fa_thr(view, 0.0).activation_set(), tp) << "observation " << i;
    EXPECT_EQ(fa_index(view, 1e-9).activation_set(), tp) << "observation " << i;
  }
}

TEST(Policies, ActionsAlwaysValidAndPure)
{
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto o = testing::random_observation(rng);
    const auto view = o.view();
    for (PolicyId id : {PolicyId::TpMax, PolicyId::FidMax, PolicyId::FaThr, PolicyId::FaIndex}) {
      PolicyConfig cfg;
      cfg.policy = id;
      const auto a = select_action(view, cfg);
      const auto problems = check_action(a, view);
      EXPECT_TRUE(problems.empty()) << policy_name(id) << ": " << problems.front();
      EXPECT_EQ(select_action(view, cfg).activation_set(), a.activation_set());
      for (const auto& act : a.activations) EXPECT_GE(act.predicted_fidelity, view.f_min);
    }
  }
}

TEST(Purification, PlannedWhenNeeded)
{
  Fixture fx(build_grid(1, 3, 10.0, EdgeDefaults{8, 2, 0.82}), {{0, 2, 1.0}}, 1);
  fx.purification.enabled = true;
  fx.purification.model = PurificationModel{PurificationVariant::Simplified, 0.8, 0.08};
  fx.f_min = 0.72;
  fx.pairs[0] = {{1, 0.80}, {2, 0.80}};
  fx.pairs[1] = {{3, 0.82}};
  const auto o = fx.obs();
  const auto a = tp_max(o);
  ASSERT_EQ(a.activations.size(), 1u);
  ASSERT_EQ(a.purifications.size(), 1u);
  EXPECT_EQ(a.purifications[0].edge, 0u);
  EXPECT_NEAR(a.activations[0].utility, 0.95 * 0.8, 1e-15);
  const std::vector<double> fids{0.88, 0.82};
  EXPECT_NEAR(a.activations[0].predicted_fidelity, swap_compose(fids), 1e-15);
  EXPECT_TRUE(check_action(a, o).empty());
}

TEST(Purification, SkippedWhenUnneededOrDisabledOrSingle)
{
  Fixture fx(build_grid(1, 2, 10.0, EdgeDefaults{8, 2, 0.82}), {{0, 1, 1.0}}, 1);
  fx.purification.enabled = true;
  fx.purification.model = PurificationModel{PurificationVariant::Simplified, 0.8, 0.08};
  fx.pairs[0] = {{1, 0.80}, {2, 0.80}};
  EXPECT_TRUE(tp_max(fx.obs()).purifications.empty());
  fx.f_min = 0.85;
  EXPECT_EQ(tp_max(fx.obs()).purifications.size(), 1u);
  fx.purification.enabled = false;
  EXPECT_TRUE(tp_max(fx.obs()).activations.empty());
  fx.purification.enabled = true;
  fx.pairs[0] = {{1, 0.80}};
  EXPECT_TRUE(tp_max(fx.obs()).activations.empty());
}

TEST(DriftReference, ZeroGammaMatchesTpMaxWithoutConflicts)
{
  Fixture fx(build_grid(3, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}, {0, 2, 1.0}});
  fx.fill(1.0);
  fx.budget = 2;
  fx.ages = {1, 2, 3, 4};
  double drift_u = 0.0;
  for (const auto& a : drift_reference(fx.obs(), 0.0).activations) drift_u += a.utility;
  double tp_u = 0.0;
  for (const auto& a : tp_max(fx.obs()).activations) tp_u += a.utility;
  EXPECT_GE(drift_u, tp_u - 1e-12);
}

TEST(DriftReference, LargeGammaPicksOldest)
{
  Fixture fx(build_grid(3, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}});
  fx.fill();
  fx.budget = 2;
  fx.ages = {5, 40, 2, 30};
  const auto a = drift_reference(fx.obs(), 100.0);
  EXPECT_EQ(a.activation_set().size(), 2u);
  auto f = flows_of(a);
  std::sort(f.begin(), f.end());
  EXPECT_EQ(f, (std::vector<std::size_t>{1, 3}));
}

TEST(DriftReference, ServesAllWhenBudgetAllows)
{
  Fixture fx(build_grid(3, 3, 10.0, kEdge), {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}});
  fx.fill();
  fx.budget = 5;
  EXPECT_EQ(drift_reference(fx.obs(), 0.5).activations.size(), 3u);
}

TEST(DriftReference, RejectsLargeInstances)
{
  const Topology g = build_grid(3, 3, 10.0, kEdge);
  std::vector<FlowSpec> specs;
  for (const Edge& e : g.edges()) specs.push_back({e.u, e.v, 1.0});
  Fixture fx(g, specs);
  EXPECT_THROW(drift_reference(fx.obs(), 0.0), ConfigError);
}

TEST(CheckAction, FlagsViolations)
{
  Fixture fx(build_grid(1, 2, 10.0, kEdge), {{0, 1, 1.0}, {1, 0, 1.0}});
  fx.fill();
  fx.budget = 1;
  Action a;
  a.activations.push_back({0, 0, {{0, 1, std::nullopt}}, 1.0, 0.82});
  EXPECT_TRUE(check_action(a, fx.obs()).empty());
  a.activations.push_back({1, 0, {{0, 1, std::nullopt}}, 1.0, 0.82});
  const auto problems = check_action(a, fx.obs());
  EXPECT_GE(problems.size(), 2u); // budget and double claim
  Action bogus;
  bogus.activations.push_back({0, 0, {{0, 99, std::nullopt}}, 1.0, 0.82});
  EXPECT_FALSE(check_action(bogus, fx.obs()).empty());
}

TEST(PolicyNames, RoundTrip)
{
  for (PolicyId id : {PolicyId::TpMax, PolicyId::FidMax, PolicyId::FaThr, PolicyId::FaIndex}) {
    EXPECT_EQ(parse_policy(policy_name(id)), id);
  }
  EXPECT_FALSE(parse_policy("greedy"));
}

} // namespace
} // namespace qfa
