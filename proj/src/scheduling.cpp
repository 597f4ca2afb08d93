#include "qfa/scheduling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

namespace qfa {

std::string_view policy_name(PolicyId id)
{
  switch (id) {
    case PolicyId::TpMax: return "tp-max";
    case PolicyId::FidMax: return "fid-max";
    case PolicyId::FaThr: return "fa-thr";
    case PolicyId::FaIndex: return "fa-index";
  }
  return "unknown";
}

std::optional<PolicyId> parse_policy(std::string_view name)
{
  for (PolicyId id : {PolicyId::TpMax, PolicyId::FidMax, PolicyId::FaThr, PolicyId::FaIndex}) {
    if (policy_name(id) == name) return id;
  }
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> Action::activation_set() const
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& a : activations) out.emplace_back(a.flow, a.path_index);
  std::sort(out.begin(), out.end());
  return out;
}

PairAvailability::PairAvailability(const SlotObservation& obs)
    : pairs_(obs.edge_pairs), cursor_(obs.edge_pairs.size(), 0)
{
}

namespace {

bool purification_on(const SlotObservation& obs)
{
  return obs.purification != nullptr && obs.purification->enabled;
}

// Subsets larger than this are not searched; grid paths stay far below it.
constexpr std::size_t kMaxPurifiableHops = 16;

struct PathScore {
  double utility = 0.0;
  double fidelity = 0.0;
  std::uint64_t purify_hops = 0; // bit j set: hop j is purified
};

struct ScoreScratch {
  std::vector<double> plain;
  std::vector<double> upgraded; // purified fidelity per hop, plain where not eligible
  std::vector<std::size_t> eligible;
  std::vector<PurificationOutcome> purified;
};

// Same arithmetic as swap_compose, without the argument checks.
template <typename FidelityAt>
double compose(std::size_t k, FidelityAt&& fidelity_at)
{
  if (k == 1) return fidelity_at(0);
  double p = 1.0;
  for (std::size_t j = 0; j < k; ++j) p *= (4.0 * fidelity_at(j) - 1.0) / 3.0;
  return (1.0 + 3.0 * p) / 4.0;
}

std::optional<PathScore> score_path(const Path& path, const SlotObservation& obs,
                                    const PairAvailability& avail)
{
  thread_local ScoreScratch s;
  const std::size_t k = path.hop_count();
  s.plain.resize(k);
  s.eligible.clear();
  const bool purifying = purification_on(obs);
  for (std::size_t j = 0; j < k; ++j) {
    const EdgeId e = path.edges[j];
    const std::size_t n = avail.available(e);
    if (n == 0) return std::nullopt;
    s.plain[j] = avail.peek(e).fidelity;
    if (purifying && n >= 2 && s.eligible.size() < kMaxPurifiableHops) s.eligible.push_back(j);
  }
  double swap_prob = 1.0;
  for (std::size_t j = 1; j < k; ++j) swap_prob *= obs.bsm_success;
  const double plain_end = compose(k, [&](std::size_t j) { return s.plain[j]; });
  if (plain_end >= obs.f_min) return PathScore{swap_prob, plain_end, 0};
  if (s.eligible.empty()) return std::nullopt;

  s.purified.resize(s.eligible.size());
  s.upgraded = s.plain;
  for (std::size_t b = 0; b < s.eligible.size(); ++b) {
    const EdgeId e = path.edges[s.eligible[b]];
    s.purified[b] =
        purify(avail.peek(e, 0).fidelity, avail.peek(e, 1).fidelity, obs.purification->model);
    s.upgraded[s.eligible[b]] = s.purified[b].fidelity;
  }
  const double ceiling =
      compose(k, [&](std::size_t j) { return std::max(s.plain[j], s.upgraded[j]); });
  if (ceiling < obs.f_min) return std::nullopt;

  std::optional<PathScore> best;
  int best_count = 0;
  const std::uint32_t subsets = 1u << s.eligible.size();
  for (std::uint32_t mask = 1; mask < subsets; ++mask) {
    double success = 1.0;
    std::uint64_t hops = 0;
    for (std::size_t b = 0; b < s.eligible.size(); ++b) {
      if (mask & (1u << b)) {
        success *= s.purified[b].success_prob;
        hops |= std::uint64_t{1} << s.eligible[b];
      }
    }
    if (success <= 0.0) continue;
    const double utility = swap_prob * success;
    const int count = std::popcount(mask);
    if (best && (utility < best->utility || (utility == best->utility && count > best_count))) {
      continue;
    }
    const double f_end = compose(k, [&](std::size_t j) {
      return (hops & (std::uint64_t{1} << j)) ? s.upgraded[j] : s.plain[j];
    });
    if (f_end < obs.f_min) continue;
    if (!best || utility > best->utility || count < best_count || f_end > best->fidelity) {
      best = PathScore{utility, f_end, hops};
      best_count = count;
    }
  }
  return best;
}

PathPlan materialize(const Path& path, std::size_t path_index, const PathScore& score,
                     const PairAvailability& avail)
{
  PathPlan plan;
  plan.path_index = path_index;
  plan.utility = score.utility;
  plan.predicted_fidelity = score.fidelity;
  plan.hops.reserve(path.hop_count());
  for (std::size_t j = 0; j < path.hop_count(); ++j) {
    const EdgeId e = path.edges[j];
    HopAssignment hop{e, avail.peek(e, 0).id, std::nullopt};
    if (score.purify_hops & (std::uint64_t{1} << j)) hop.partner = avail.peek(e, 1).id;
    plan.hops.push_back(hop);
  }
  return plan;
}

struct FlowScore {
  std::size_t path_index = 0;
  PathScore score;
};

std::optional<FlowScore> score_flow(std::size_t flow, const SlotObservation& obs,
                                    const PairAvailability& avail)
{
  std::optional<FlowScore> best;
  const auto& paths = obs.flows[flow].candidate_paths;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto s = score_path(paths[i], obs, avail);
    if (s && (!best || s->utility > best->score.utility)) best = FlowScore{i, *s};
  }
  return best;
}

} // namespace

std::optional<PathPlan> plan_purification(const Path& path, std::size_t path_index,
                                          const SlotObservation& obs,
                                          const PairAvailability& avail)
{
  const auto score = score_path(path, obs, avail);
  if (!score) return std::nullopt;
  return materialize(path, path_index, *score, avail);
}

UtilityEstimate estimate_utility(std::size_t flow, const SlotObservation& obs,
                                 const PairAvailability& avail)
{
  UtilityEstimate out;
  const auto best = score_flow(flow, obs, avail);
  if (!best) return out;
  out.utility = best->score.utility;
  out.predicted_fidelity = best->score.fidelity;
  out.plan = materialize(obs.flows[flow].candidate_paths[best->path_index], best->path_index,
                         best->score, avail);
  return out;
}

namespace {

struct Candidate {
  std::size_t flow;
  double utility;
  double fidelity;
};

std::vector<Candidate> feasible_candidates(const SlotObservation& obs)
{
  const PairAvailability avail(obs);
  std::vector<Candidate> out;
  out.reserve(obs.flows.size());
  for (std::size_t f = 0; f < obs.flows.size(); ++f) {
    const auto best = score_flow(f, obs, avail);
    if (best) out.push_back({f, best->score.utility, best->score.fidelity});
  }
  return out;
}

// Serves flows in `order`, re-planning each against the pairs still free.
Action serve_in_order(const SlotObservation& obs, std::span<const std::size_t> order)
{
  Action action;
  PairAvailability avail(obs);
  const auto budget = static_cast<std::size_t>(std::max(obs.attempt_budget, 0));
  for (std::size_t f : order) {
    if (action.activations.size() >= budget) break;
    const auto best = score_flow(f, obs, avail);
    if (!best) continue;
    PathPlan plan = materialize(obs.flows[f].candidate_paths[best->path_index], best->path_index,
                                best->score, avail);
    for (const HopAssignment& hop : plan.hops) {
      if (hop.partner) {
        action.purifications.push_back({hop.edge, hop.primary, *hop.partner});
        avail.reserve(hop.edge, 2);
      } else {
        avail.reserve(hop.edge, 1);
      }
    }
    action.activations.push_back(
        {f, plan.path_index, std::move(plan.hops), plan.utility, plan.predicted_fidelity});
  }
  return action;
}

template <typename Key>
std::vector<std::size_t> rank_by(std::vector<Candidate> cands, Key key)
{
  std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    const double ka = key(a);
    const double kb = key(b);
    if (ka != kb) return ka > kb;
    return a.flow < b.flow;
  });
  std::vector<std::size_t> order;
  order.reserve(cands.size());
  for (const auto& c : cands) order.push_back(c.flow);
  return order;
}

} // namespace

Action tp_max(const SlotObservation& obs)
{
  const auto order =
      rank_by(feasible_candidates(obs), [](const Candidate& c) { return c.utility; });
  return serve_in_order(obs, order);
}

Action fid_max(const SlotObservation& obs)
{
  const auto order =
      rank_by(feasible_candidates(obs), [](const Candidate& c) { return c.fidelity; });
  return serve_in_order(obs, order);
}

Action fa_thr(const SlotObservation& obs, double tau, bool strict)
{
  auto cands = feasible_candidates(obs);
  std::vector<Candidate> eligible;
  std::vector<Candidate> rest;
  for (const auto& c : cands) {
    (static_cast<double>(obs.ages[c.flow]) > tau ? eligible : rest).push_back(c);
  }
  const auto by_utility = [](const Candidate& c) { return c.utility; };
  auto order = rank_by(std::move(eligible), by_utility);
  if (!strict) {
    const auto tail = rank_by(std::move(rest), by_utility);
    order.insert(order.end(), tail.begin(), tail.end());
  }
  return serve_in_order(obs, order);
}

double fa_index_value(double utility, std::int64_t age, double beta, IndexForm form)
{
  const double boost = 1.0 + beta * static_cast<double>(age);
  return form == IndexForm::AgeWeighted ? utility * boost : utility / boost;
}

Action fa_index(const SlotObservation& obs, double beta, IndexForm form)
{
  if (!(beta > 0.0)) throw ConfigError("fa_index: beta must be positive");
  auto cands = feasible_candidates(obs);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(cands.size());
  for (const auto& c : cands) {
    scored.emplace_back(fa_index_value(c.utility, obs.ages[c.flow], beta, form), c.flow);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  // Collapse runs of near-equal indices into one rank, then order by flow id.
  std::vector<std::pair<std::size_t, std::size_t>> ranked; // (rank, flow)
  std::size_t rank = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (i > 0) {
      const double prev = scored[i - 1].first;
      if (prev - scored[i].first > kIndexTieTolerance * std::abs(prev)) ++rank;
    }
    ranked.emplace_back(rank, scored[i].second);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::size_t> order;
  order.reserve(ranked.size());
  for (const auto& r : ranked) order.push_back(r.second);
  return serve_in_order(obs, order);
}

Action select_action(const SlotObservation& obs, const PolicyConfig& config)
{
  switch (config.policy) {
    case PolicyId::TpMax: return tp_max(obs);
    case PolicyId::FidMax: return fid_max(obs);
    case PolicyId::FaThr: return fa_thr(obs, config.fa_thr_tau, config.thr_strict);
    case PolicyId::FaIndex: return fa_index(obs, config.fa_index_beta, config.index_form);
  }
  throw ConfigError("unknown policy");
}

Action drift_reference(const SlotObservation& obs, double gamma)
{
  const std::size_t n = obs.flows.size();
  if (n > kDriftReferenceMaxFlows) {
    throw ConfigError("drift_reference: instance too large (" + std::to_string(n) + " flows)");
  }
  if (gamma < 0.0) throw ConfigError("drift_reference: gamma must be non-negative");
  const auto budget = static_cast<std::size_t>(std::max(obs.attempt_budget, 0));

  std::vector<std::size_t> members;
  const auto ids_of = [&](std::uint32_t mask) {
    members.clear();
    for (std::size_t f = 0; f < n; ++f) {
      if (mask & (1u << f)) members.push_back(f);
    }
    return members;
  };

  std::uint32_t best_mask = 0;
  double best_value = 0.0;
  std::vector<std::size_t> best_ids;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > budget) continue;
    const auto ids = ids_of(mask);
    PairAvailability avail(obs);
    double value = 0.0;
    bool feasible = true;
    for (std::size_t f : ids) {
      const auto best = score_flow(f, obs, avail);
      if (!best) {
        feasible = false;
        break;
      }
      const Path& path = obs.flows[f].candidate_paths[best->path_index];
      for (std::size_t j = 0; j < path.hop_count(); ++j) {
        const bool purified = best->score.purify_hops & (std::uint64_t{1} << j);
        avail.reserve(path.edges[j], purified ? 2 : 1);
      }
      value += best->score.utility + gamma * static_cast<double>(obs.ages[f]);
    }
    if (!feasible) continue;
    const double tol = 1e-12 * std::max(1.0, std::abs(best_value));
    if (value > best_value + tol ||
        (std::abs(value - best_value) <= tol && (best_mask == 0 || ids < best_ids))) {
      best_mask = mask;
      best_value = value;
      best_ids = ids;
    }
  }
  return serve_in_order(obs, best_ids);
}

std::vector<std::string> check_action(const Action& action, const SlotObservation& obs)
{
  std::vector<std::string> problems;
  if (action.activations.size() > static_cast<std::size_t>(std::max(obs.attempt_budget, 0))) {
    problems.push_back("attempt budget exceeded");
  }
  std::set<std::size_t> flows;
  std::set<PairId> used;
  const auto on_edge = [&](EdgeId e, PairId id) {
    if (e >= obs.edge_pairs.size()) return false;
    return std::any_of(obs.edge_pairs[e].begin(), obs.edge_pairs[e].end(),
                       [id](const PairView& p) { return p.id == id; });
  };
  const auto claim = [&](EdgeId e, PairId id) {
    if (!on_edge(e, id)) {
      problems.push_back("pair " + std::to_string(id) + " is not on edge " + std::to_string(e));
    } else if (!used.insert(id).second) {
      problems.push_back("pair " + std::to_string(id) + " claimed twice");
    }
  };

  std::set<std::pair<PairId, PairId>> ops;
  for (const auto& op : action.purifications) {
    claim(op.edge, op.first);
    claim(op.edge, op.second);
    ops.emplace(op.first, op.second);
  }
  std::set<PairId> purified_claims;
  for (const auto& a : action.activations) {
    if (a.flow >= obs.flows.size()) {
      problems.push_back("activation references unknown flow");
      continue;
    }
    if (!flows.insert(a.flow).second) {
      problems.push_back("flow " + std::to_string(a.flow) + " activated twice");
    }
    const auto& paths = obs.flows[a.flow].candidate_paths;
    if (a.path_index >= paths.size()) {
      problems.push_back("activation references unknown path");
      continue;
    }
    const Path& path = paths[a.path_index];
    if (a.hops.size() != path.hop_count()) {
      problems.push_back("activation hop count does not match its path");
      continue;
    }
    for (std::size_t j = 0; j < a.hops.size(); ++j) {
      const auto& hop = a.hops[j];
      if (hop.edge != path.edges[j]) problems.push_back("hop edge does not match its path");
      if (hop.partner) {
        if (!ops.count({hop.primary, *hop.partner})) {
          problems.push_back("purified hop without a matching purification op");
        } else if (!purified_claims.insert(hop.primary).second) {
          problems.push_back("purification output used twice");
        }
      } else {
        claim(hop.edge, hop.primary);
      }
    }
  }
  if (purified_claims.size() != ops.size()) {
    problems.push_back("purification op whose output is never used");
  }
  return problems;
}

} // namespace qfa
