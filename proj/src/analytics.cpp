#include "qfa/analytics.hpp"

#include "qfa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qfa {

namespace {

void require_probability(double p, const char* what)
{
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + ": p must lie in [0, 1]");
}

} // namespace

double renewal_implied_age(std::span<const std::int64_t> intervals, double delta)
{
  if (intervals.empty()) throw MetricsError("renewal_implied_age: no intervals");
  long double s1 = 0;
  long double s2 = 0;
  for (auto tau : intervals) {
    if (tau <= 0) throw MetricsError("renewal_implied_age: intervals must be positive");
    s1 += tau;
    s2 += static_cast<long double>(tau) * tau;
  }
  return static_cast<double>(delta * s2 / (2 * s1));
}

double geometric_age(double p, double delta)
{
  require_probability(p, "geometric_age");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return delta / 2.0 * (2.0 - p) / p;
}

double discrete_geometric_age(double p)
{
  require_probability(p, "discrete_geometric_age");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - p) / p;
}

double homogeneous_e2e_prob(double p_link, double q, int k)
{
  require_probability(p_link, "homogeneous_e2e_prob");
  require_probability(q, "homogeneous_e2e_prob");
  if (k < 1) throw DomainError("homogeneous_e2e_prob: k must be at least 1");
  return std::pow(p_link, k) * std::pow(q, k - 1);
}

RenewalStats renewal_stats(const RunArtifact& run, std::size_t flow)
{
  RenewalStats s;
  const auto& state = run.final_state;
  s.deliveries = state.epochs(flow).size();
  s.observed_age = mean_age(run.age_series(flow));
  const auto tau = state.intervals(flow);
  if (tau.empty()) return s;
  long double s1 = 0;
  long double s2 = 0;
  for (auto t : tau) {
    s1 += t;
    s2 += static_cast<long double>(t) * t;
    s.max_interval = std::max(s.max_interval, t);
  }
  const auto n = static_cast<long double>(tau.size());
  s.mean_interval = static_cast<double>(s1 / n);
  s.mean_interval_sq = static_cast<double>(s2 / n);
  s.implied_age = renewal_implied_age(tau, 1.0);
  return s;
}

std::vector<FrontierPoint> pareto_frontier(std::span<const FrontierPoint> points)
{
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const bool dominated = std::any_of(points.begin(), points.end(), [&](const FrontierPoint& q) {
      return q.throughput >= p.throughput && q.tail <= p.tail &&
             (q.throughput > p.throughput || q.tail < p.tail);
    });
    if (!dominated) keep.push_back(i);
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return points[a].throughput < points[b].throughput;
  });
  std::vector<FrontierPoint> out;
  for (auto i : keep) out.push_back(points[i]);
  return out;
}

std::vector<SweepPoint> fidelity_grid(const SimConfig& base, const PolicyConfig& policy,
                                      std::span<const double> f_mins)
{
  std::vector<SweepPoint> out;
  for (double f : f_mins) {
    SweepPoint p{{{"f_min", f}}, base, policy};
    p.config.f_min = f;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SweepPoint> coherence_grid(const SimConfig& base, const PolicyConfig& policy,
                                       std::span<const int> t_mems,
                                       std::span<const double> t2_seconds)
{
  std::vector<SweepPoint> out;
  for (int tm : t_mems) {
    for (double t2 : t2_seconds) {
      SweepPoint p{{{"t_mem_slots", tm}, {"t2_seconds", t2}}, base, policy};
      p.config.t_mem_slots = tm;
      p.config.t2_seconds = t2;
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<SweepPoint> load_grid(const SimConfig& base, std::span<const PolicyConfig> policies,
                                  std::span<const double> loads)
{
  std::vector<SweepPoint> out;
  const auto flows = static_cast<double>(base.flows.size());
  for (const PolicyConfig& pol : policies) {
    for (double load : loads) {
      SweepPoint p{{{"load", load}}, base, pol};
      p.config.attempt_budget = std::max(1, static_cast<int>(std::lround(load * flows)));
      out.push_back(std::move(p));
    }
  }
  return out;
}

} // namespace qfa
