#pragma once

// Age, tail, throughput and fairness statistics over run artifacts, plus
// across-seed confidence intervals.

#include "qfa/engine.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qfa {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double mean_age(std::span<const double> ages);
double mean_age(std::span<const std::uint32_t> ages);

/// Smallest sample value a with (#samples <= a) / n >= level.
double tail_age(std::span<const double> samples, double level = 0.95);
double tail_age(std::span<const std::uint32_t> samples, double level = 0.95);

/// Mean of the samples strictly above tail_age; tail_age itself when none are.
double cvar(std::span<const double> samples, double level = 0.95);
double cvar(std::span<const std::uint32_t> samples, double level = 0.95);

/// Usable deliveries per slot.
double throughput(std::span<const std::uint16_t> n_succ);

/// Jain's index of x = 1 / (1 + mean age).
double jain_index(std::span<const double> mean_ages);

/// Fraction of flows whose mean age exceeds a_ref.
double starvation(std::span<const double> mean_ages, double a_ref);

struct Estimate {
  double mean = 0.0;
  std::optional<double> half_width; // absent with fewer than two values
};

/// Sample mean and Student-t 95% half-width.
Estimate batch_ci(std::span<const double> values);

struct FlowMetrics {
  NodeId source = 0;
  NodeId destination = 0;
  double mean_age = 0.0;
  double a95 = 0.0;
  double cvar95 = 0.0;
  double throughput = 0.0;
  std::int64_t deliveries = 0;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  PolicyId policy = PolicyId::TpMax;
  std::vector<FlowMetrics> flows;
  double mean_age = 0.0; // flow averages of the per-flow values
  double a95 = 0.0;
  double cvar95 = 0.0;
  double throughput = 0.0;
  double jain = 1.0;
  double starvation = 0.0;
  double a_ref = 0.0;
};

/// Statistics over slots t > warmup.
MetricsReport compute_metrics(const RunArtifact& run, const Scenario& scenario, double a_ref);

struct BatchSummary {
  PolicyId policy = PolicyId::TpMax;
  Estimate mean_age;
  Estimate a95;
  Estimate cvar95;
  Estimate throughput;
  Estimate jain;
  Estimate starvation;
  std::vector<Estimate> flow_mean_age;
};

BatchSummary summarize(std::span<const MetricsReport> reports);

/// Single-flow reference scenario: one flow across edge 0, budget 1, same
/// physics, slots and seeds.
Scenario reference_scenario(const Scenario& scenario);

/// Seed-averaged A95 of the reference scenario under TP-MAX. Results are
/// cached per physics configuration.
double reference_age(const Scenario& scenario);

} // namespace qfa
