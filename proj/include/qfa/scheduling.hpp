#pragma once

// Slot-level scheduling policies: TP-MAX, FID-MAX, FA-THR, FA-INDEX and an
// exhaustive drift-rule reference for small instances.

#include "qfa/memory.hpp"
#include "qfa/stochastic.hpp"
#include "qfa/topology.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace qfa {

enum class PolicyId { TpMax, FidMax, FaThr, FaIndex };

std::string_view policy_name(PolicyId id);           // "tp-max", ...
std::optional<PolicyId> parse_policy(std::string_view name);

enum class IndexForm {
  AgeWeighted, // I = U * (1 + beta * A): stale flows rise in priority
  Literal,     // I = U / (1 + beta * A)
};

struct PolicyConfig {
  PolicyId policy = PolicyId::FaIndex;
  double fa_thr_tau = 5.0;
  double fa_index_beta = 0.1;
  double drift_gamma = 0.0;
  bool thr_strict = false; // FA-THR leaves budget unused instead of serving non-eligible flows
  IndexForm index_form = IndexForm::AgeWeighted;
};

/// Relative gap below which two FA-INDEX values count as tied (then the lower
/// flow id wins).
inline constexpr double kIndexTieTolerance = 1e-6;

/// Pair held on one edge, as seen by the controller.
struct PairView {
  PairId id = 0;
  double fidelity = 1.0;
};

/// Read-only controller view of one slot.
struct SlotObservation {
  const Topology* topology = nullptr;
  std::span<const Flow> flows;
  std::span<const std::int64_t> ages;                    // A_sd before this slot's update
  std::span<const std::vector<PairView>> edge_pairs;     // per edge, descending fidelity
  const ExternalOutcome* external = nullptr;             // may be null in unit tests
  double bsm_success = 1.0;
  double f_min = 0.5;
  int attempt_budget = 1;
  const PurificationConfig* purification = nullptr;      // null or disabled: no purification
};

/// Pair use on one hop of an activated path. With `partner` set, `primary` and
/// `partner` are purified first and the surviving pair is swapped.
struct HopAssignment {
  EdgeId edge = 0;
  PairId primary = 0;
  std::optional<PairId> partner;
};

struct PurificationOp {
  EdgeId edge = 0;
  PairId first = 0;
  PairId second = 0;
};

struct Activation {
  std::size_t flow = 0;
  std::size_t path_index = 0;
  std::vector<HopAssignment> hops;
  double utility = 0.0;          // q^(k-1) times purification success
  double predicted_fidelity = 0.0;
};

struct Action {
  std::vector<PurificationOp> purifications;
  std::vector<Activation> activations;

  /// (flow, path_index) pairs, for set comparisons.
  std::vector<std::pair<std::size_t, std::size_t>> activation_set() const;
};

/// Tracks which observed pairs are still unreserved while a policy builds its action.
class PairAvailability {
 public:
  explicit PairAvailability(const SlotObservation& obs);

  std::size_t available(EdgeId e) const { return pairs_[e].size() - cursor_[e]; }
  /// i-th best unreserved pair; requires i < available(e).
  const PairView& peek(EdgeId e, std::size_t i = 0) const { return pairs_[e][cursor_[e] + i]; }
  void reserve(EdgeId e, std::size_t n) { cursor_[e] += n; }

 private:
  std::span<const std::vector<PairView>> pairs_;
  std::vector<std::size_t> cursor_;
};

/// Best way to serve one path from the currently unreserved pairs.
struct PathPlan {
  std::size_t path_index = 0;
  double utility = 0.0;
  double predicted_fidelity = 0.0;
  std::vector<HopAssignment> hops;
};

/// Cheapest purification schedule (fewest expected losses) for one path: the
/// subset of hops to purify that lifts the predicted end fidelity to F_min
/// with the highest joint purification success. Each purified hop takes its
/// two best unreserved pairs. Returns nullopt when no subset reaches F_min or
/// a hop has no pair.
std::optional<PathPlan> plan_purification(const Path& path, std::size_t path_index,
                                          const SlotObservation& obs,
                                          const PairAvailability& avail);

struct UtilityEstimate {
  double utility = 0.0;                 // 0 when no candidate path is feasible
  std::optional<PathPlan> plan;         // best feasible path
  double predicted_fidelity = 0.0;
};

/// Scans the flow's candidate paths in order and returns the one with the
/// highest conditional success probability q^(k-1) * prod(p_pur); ties keep
/// the earlier candidate.
UtilityEstimate estimate_utility(std::size_t flow, const SlotObservation& obs,
                                 const PairAvailability& avail);

Action tp_max(const SlotObservation& obs);
Action fid_max(const SlotObservation& obs);
Action fa_thr(const SlotObservation& obs, double tau, bool strict = false);
double fa_index_value(double utility, std::int64_t age, double beta, IndexForm form);
Action fa_index(const SlotObservation& obs, double beta, IndexForm form = IndexForm::AgeWeighted);

/// Dispatches on `config.policy`.
Action select_action(const SlotObservation& obs, const PolicyConfig& config);

inline constexpr std::size_t kDriftReferenceMaxFlows = 10;

/// Exhaustive maximiser of sum(U + gamma * A) over jointly feasible flow
/// subsets of size <= R. Flows in a subset claim pairs in id order. Ties go to
/// the lexicographically smallest id set. Throws for more than 10 flows.
Action drift_reference(const SlotObservation& obs, double gamma);

/// Empty when the action respects the budget, serves each flow at most once
/// and never claims a pair twice or one that is not on the hop's edge.
std::vector<std::string> check_action(const Action& action, const SlotObservation& obs);

} // namespace qfa
