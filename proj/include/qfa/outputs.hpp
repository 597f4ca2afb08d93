#pragma once

// CSV, trace and JSON writers for experiment results.

#include "qfa/analytics.hpp"
#include "qfa/metrics.hpp"
#include "qfa/scenario_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfa {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kMetricsHeader =
    "policy,seed,flow_src,flow_dst,mean_age,a95,cvar95,throughput,jain,starvation,ci_mean_age,"
    "schema_version";

/// Six significant digits, '.' decimal point, no grouping.
std::string format_value(double v);

struct PolicyResult {
  PolicyConfig policy;
  std::vector<MetricsReport> reports; // one per seed
  BatchSummary summary;
};

/// One metrics.csv line. Aggregate rows have no flow endpoints; per-flow rows
/// carry no Jain value and a 0/1 starvation indicator.
struct MetricsRow {
  std::string policy;
  std::uint64_t seed = 0;
  std::optional<NodeId> flow_src;
  std::optional<NodeId> flow_dst;
  double mean_age = 0.0;
  double a95 = 0.0;
  double cvar95 = 0.0;
  double throughput = 0.0;
  std::optional<double> jain;
  double starvation = 0.0;
  std::optional<double> ci_mean_age;
  int schema_version = kSchemaVersion;

  bool aggregate() const { return !flow_src.has_value(); }
};

/// Per policy and seed: the flow rows in flow order, then the aggregate row.
std::vector<MetricsRow> metrics_rows(std::span<const PolicyResult> results);

/// Throws OutputError for an empty row set or an unwritable path.
void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// A run header line, then for every slot its per-edge {slot, edge, n_ret}
/// lines followed by its per-flow {slot, flow_src, flow_dst, Y, age} lines.
void write_trace(const RunArtifact& run, const Scenario& scenario, std::ostream& out);

struct SweepRow {
  std::vector<std::pair<std::string, double>> axes;
  BatchSummary summary;
};

/// Axis columns, then policy and the seed-averaged metrics with CI half-widths.
void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

/// Every (policy, load) point with an on_frontier flag for the A95 frontier.
void write_frontier_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

} // namespace qfa
