#pragma once

// Renewal and closed-form age formulas, Pareto frontiers and declarative
// experiment grids.

#include "qfa/engine.hpp"
#include "qfa/scheduling.hpp"
#include "qfa/topology.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qfa {

/// delta * E[tau^2] / (2 E[tau]) over the observed inter-delivery intervals.
double renewal_implied_age(std::span<const std::int64_t> intervals, double delta);

/// Continuous-time mean age (delta / 2)(2 - p) / p of i.i.d. slot successes.
/// Returns +infinity for p = 0.
double geometric_age(double p, double delta);

/// Mean of the slot-sampled age, (1 - p) / p. It equals geometric_age(p, 1)
/// minus 1/2: sampling at slot ends drops the half-slot offset.
/// Returns +infinity for p = 0.
double discrete_geometric_age(double p);

/// p_link^k * q^(k-1).
double homogeneous_e2e_prob(double p_link, double q, int k);

struct RenewalStats {
  std::size_t deliveries = 0;
  double mean_interval = 0.0;
  double mean_interval_sq = 0.0;
  std::int64_t max_interval = 0;
  double implied_age = 0.0;  // renewal_implied_age with delta = 1 slot
  double observed_age = 0.0; // time-averaged slot-sampled age over the whole run
};

/// Needs at least two deliveries for the interval moments; otherwise they stay 0.
RenewalStats renewal_stats(const RunArtifact& run, std::size_t flow);

struct FrontierPoint {
  std::string label;
  double throughput = 0.0;
  double tail = 0.0; // lower is better
};

/// Points not dominated in (max throughput, min tail), sorted by throughput
/// (input order breaks ties).
std::vector<FrontierPoint> pareto_frontier(std::span<const FrontierPoint> points);

struct SweepPoint {
  std::vector<std::pair<std::string, double>> axes;
  SimConfig config;
  PolicyConfig policy;
};

std::vector<SweepPoint> fidelity_grid(const SimConfig& base, const PolicyConfig& policy,
                                      std::span<const double> f_mins);

std::vector<SweepPoint> coherence_grid(const SimConfig& base, const PolicyConfig& policy,
                                       std::span<const int> t_mems,
                                       std::span<const double> t2_seconds);

/// attempt_budget = round(load * |P|) for each policy and load.
std::vector<SweepPoint> load_grid(const SimConfig& base, std::span<const PolicyConfig> policies,
                                  std::span<const double> loads);

} // namespace qfa
