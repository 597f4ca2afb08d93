#pragma once

// Runs an experiment spec end to end and persists its outputs.

#include "qfa/outputs.hpp"
#include "qfa/scenario_io.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace qfa {

struct RunOptions {
  unsigned threads = 0;
  EngineOptions engine;
  /// Called for every finished run in output order (point, policy, seed).
  std::function<void(const RunArtifact&, const Scenario&, std::size_t point)> on_run;
};

struct PointResult {
  std::vector<std::pair<std::string, double>> axes;
  double a_ref = 0.0;
  PolicyResult result;
  InventoryLedger ledger;                    // summed over seeds
  std::int64_t conservation_violations = 0;  // summed over seeds
};

struct ExperimentResult {
  ExperimentSpec spec;
  nlohmann::json resolved;
  bool sweep = false;
  std::vector<PointResult> points; // one per policy, or one per sweep point
  double seconds = 0.0;

  std::int64_t conservation_violations() const;
  std::vector<PolicyResult> policy_results() const;
  std::vector<SweepRow> sweep_rows() const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// metrics.csv and resolved_config.json; sweeps add sweep.csv and one
/// point_<i>/metrics.csv per point; load sweeps also add frontier.csv.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

} // namespace qfa
