#include "qfa/experiment.hpp"
#include "qfa/outputs.hpp"
#include "qfa/presets.hpp"
#include "qfa/scenario_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace qfa {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("qfa_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec short_load(int seeds = 5)
{
  auto spec = make_preset("load");
  spec.config.slots = 400;
  spec.config.warmup_slots = 40;
  spec.config.seeds.clear();
  for (int s = 1; s <= seeds; ++s) spec.config.seeds.push_back(static_cast<std::uint64_t>(s));
  spec.policies.resize(1);
  spec.a_ref = 1.0;
  return spec;
}

TEST(ExperimentJson, RoundTripEveryPreset)
{
  for (auto name : preset_names()) {
    const auto spec = make_preset(name);
    const auto j = to_json(spec);
    const auto back = experiment_from_json(j);
    EXPECT_EQ(to_json(back), j) << name;
    EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
  }
  EXPECT_THROW(make_preset("nope"), ConfigError);
}

TEST(ExperimentJson, StrictParsing)
{
  auto j = to_json(make_preset("baseline"));
  j["surprise"] = 1;
  EXPECT_THROW(experiment_from_json(j), ConfigError);
  j = to_json(make_preset("baseline"));
  j["topology"]["colour"] = "red";
  EXPECT_THROW(experiment_from_json(j), ConfigError);
  j = to_json(make_preset("baseline"));
  j["slots"] = "many";
  EXPECT_THROW(experiment_from_json(j), ConfigError);
  j = to_json(make_preset("baseline"));
  j["schema_version"] = 99;
  EXPECT_THROW(experiment_from_json(j), ConfigError);
  j = to_json(make_preset("baseline"));
  j["policies"][0]["policy"] = "greedy";
  EXPECT_THROW(experiment_from_json(j), ConfigError);
  EXPECT_THROW(load_experiment("/nonexistent/config.json"), ConfigError);
}

TEST(ExperimentJson, ResolvedConfigReloadsToSameScenario)
{
  for (auto name : {"load", "heterogeneous"}) {
    const auto spec = make_preset(name);
    const auto sc = resolve(spec);
    const auto reloaded = resolve(experiment_from_json(resolved_json(spec, sc)));
    ASSERT_EQ(reloaded.flows.size(), sc.flows.size());
    for (std::size_t f = 0; f < sc.flows.size(); ++f) {
      EXPECT_EQ(reloaded.flows[f].source, sc.flows[f].source);
      EXPECT_EQ(reloaded.flows[f].destination, sc.flows[f].destination);
      EXPECT_EQ(reloaded.flows[f].candidate_paths, sc.flows[f].candidate_paths);
    }
    ASSERT_EQ(reloaded.topology.edge_count(), sc.topology.edge_count());
    for (std::size_t e = 0; e < sc.topology.edge_count(); ++e) {
      EXPECT_EQ(reloaded.topology.edges()[e].length_km, sc.topology.edges()[e].length_km);
    }
  }
}

TEST(ExperimentJson, FlowSamplingIsSeeded)
{
  auto spec = make_preset("load");
  const auto a = resolve(spec);
  const auto b = resolve(spec);
  spec.topology_seed = 77;
  const auto c = resolve(spec);
  ASSERT_EQ(a.flows.size(), 16u);
  bool same_ab = true;
  bool same_ac = true;
  for (std::size_t f = 0; f < a.flows.size(); ++f) {
    same_ab &= a.flows[f].source == b.flows[f].source && a.flows[f].destination == b.flows[f].destination;
    same_ac &= a.flows[f].source == c.flows[f].source && a.flows[f].destination == c.flows[f].destination;
    EXPECT_TRUE(a.topology.find_edge(a.flows[f].source, a.flows[f].destination));
  }
  EXPECT_TRUE(same_ab);
  EXPECT_FALSE(same_ac);
}

TEST(MetricsCsv, RowCountRoundTripAndStableRewrite)
{
  const auto result = run_experiment(short_load(), RunOptions{1, {}, {}});
  const auto rows = metrics_rows(result.policy_results());
  EXPECT_EQ(rows.size(), 85u);
  const auto dir = scratch_dir("csv");
  write_metrics_csv(rows, dir / "a.csv");
  const auto back = read_metrics_csv(dir / "a.csv");
  ASSERT_EQ(back.size(), rows.size());
  write_metrics_csv(back, dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  const auto text = slurp(dir / "a.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), kMetricsHeader);
  int aggregates = 0;
  for (const auto& r : back) {
    aggregates += r.aggregate() ? 1 : 0;
    EXPECT_EQ(r.schema_version, kSchemaVersion);
    EXPECT_EQ(r.jain.has_value(), r.aggregate());
    ASSERT_TRUE(r.ci_mean_age);
  }
  EXPECT_EQ(aggregates, 5);
}

TEST(MetricsCsv, Errors)
{
  const auto dir = scratch_dir("csv_err");
  EXPECT_THROW(write_metrics_csv({}, dir / "empty.csv"), OutputError);
  std::ofstream(dir / "bad.csv") << "policy,seed\n";
  EXPECT_THROW(read_metrics_csv(dir / "bad.csv"), OutputError);
  std::ofstream(dir / "short.csv") << kMetricsHeader << "\nfa-index,1,0,1\n";
  EXPECT_THROW(read_metrics_csv(dir / "short.csv"), OutputError);
  EXPECT_THROW(read_metrics_csv(dir / "missing.csv"), OutputError);
}

TEST(FormatValue, Conventions)
{
  EXPECT_EQ(format_value(0.0), "0");
  EXPECT_EQ(format_value(0.918403123), "0.918403");
  EXPECT_EQ(format_value(27509.4), "27509.4");
  EXPECT_EQ(format_value(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Trace, LineCountsAndDeliveries)
{
  auto spec = short_load(1);
  const auto sc = resolve(spec);
  const auto r = run(sc, spec.policies[0], 1);
  std::ostringstream out;
  write_trace(r, sc, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  EXPECT_EQ(header.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(header.at("slots"), r.slots);
  std::size_t edge_lines = 0;
  std::size_t flow_lines = 0;
  std::int64_t y_sum = 0;
  std::int64_t last_slot = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ASSERT_GE(j.at("slot").get<std::int64_t>(), last_slot);
    last_slot = j.at("slot");
    if (j.contains("edge")) {
      ++edge_lines;
    } else {
      ++flow_lines;
      y_sum += j.at("Y").get<int>();
      if (j.at("Y") == 1) EXPECT_EQ(j.at("age"), 0);
    }
  }
  EXPECT_EQ(edge_lines, static_cast<std::size_t>(r.slots) * sc.topology.edge_count());
  EXPECT_EQ(flow_lines, static_cast<std::size_t>(r.slots) * sc.flows.size());
  std::int64_t delivered = 0;
  for (auto n : r.n_succ) delivered += n;
  EXPECT_EQ(y_sum, delivered);
}

TEST(Outputs, ExperimentDirectoryLayout)
{
  auto spec = make_preset("frontier");
  spec.config.slots = 200;
  spec.config.warmup_slots = 20;
  spec.config.seeds = {1, 2};
  spec.a_ref = 1.0;
  const auto result = run_experiment(spec, RunOptions{1, {}, {}});
  EXPECT_EQ(result.conservation_violations(), 0);
  const auto dir = scratch_dir("layout");
  write_outputs(result, dir);
  EXPECT_TRUE(fs::exists(dir / "resolved_config.json"));
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "frontier.csv"));
  EXPECT_TRUE(fs::exists(dir / "point_0" / "metrics.csv"));
  const auto resolved = nlohmann::json::parse(slurp(dir / "resolved_config.json"));
  EXPECT_EQ(resolved.at("schema_version"), kSchemaVersion);
  std::ifstream sweep(dir / "sweep.csv");
  std::string header;
  std::getline(sweep, header);
  EXPECT_EQ(header.rfind("load,policy,", 0), 0u);
  EXPECT_NE(header.find(",schema_version"), std::string::npos);
}

} // namespace
} // namespace qfa
