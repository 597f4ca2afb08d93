#include "qfa/experiment.hpp"

#include <chrono>

namespace qfa {

std::int64_t ExperimentResult::conservation_violations() const
{
  std::int64_t n = 0;
  for (const auto& p : points) n += p.conservation_violations;
  return n;
}

std::vector<PolicyResult> ExperimentResult::policy_results() const
{
  std::vector<PolicyResult> out;
  for (const auto& p : points) out.push_back(p.result);
  return out;
}

std::vector<SweepRow> ExperimentResult::sweep_rows() const
{
  std::vector<SweepRow> out;
  for (const auto& p : points) out.push_back({p.axes, p.result.summary});
  return out;
}

namespace {

PointResult run_point(const Scenario& scenario, const PolicyConfig& policy,
                      const ExperimentSpec& spec, const RunOptions& options, std::size_t index)
{
  PointResult pr;
  pr.a_ref = spec.a_ref ? *spec.a_ref : reference_age(scenario);
  pr.result.policy = policy;
  const auto runs = run_batch(scenario, policy, options.engine, options.threads);
  for (const RunArtifact& a : runs) {
    if (options.on_run) options.on_run(a, scenario, index);
    pr.result.reports.push_back(compute_metrics(a, scenario, pr.a_ref));
    pr.ledger.deposits += a.ledger.deposits;
    pr.ledger.consumed += a.ledger.consumed;
    pr.ledger.expired += a.ledger.expired;
    pr.ledger.evicted += a.ledger.evicted;
    pr.conservation_violations += a.conservation_violations;
  }
  pr.result.summary = summarize(pr.result.reports);
  return pr;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options)
{
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.spec = spec;
  const Scenario base = resolve(spec);
  out.resolved = resolved_json(spec, base);

  const auto points = sweep_points(spec, base);
  out.sweep = !points.empty();
  if (out.sweep) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Scenario scenario = make_scenario(points[i].config, base.topology);
      auto pr = run_point(scenario, points[i].policy, spec, options, i);
      pr.axes = points[i].axes;
      out.points.push_back(std::move(pr));
    }
  } else {
    for (std::size_t i = 0; i < spec.policies.size(); ++i) {
      out.points.push_back(run_point(base, spec.policies[i], spec, options, i));
    }
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  nlohmann::json resolved = result.resolved;
  nlohmann::json refs = nlohmann::json::array();
  for (const auto& p : result.points) refs.push_back(p.a_ref);
  resolved["a_ref_used"] = refs;
  write_json(resolved, dir / "resolved_config.json");

  if (!result.sweep) {
    const auto results = result.policy_results();
    write_metrics_csv(metrics_rows(results), dir / "metrics.csv");
    return;
  }
  const auto rows = result.sweep_rows();
  write_sweep_csv(rows, dir / "sweep.csv");
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto point_dir = dir / ("point_" + std::to_string(i));
    std::filesystem::create_directories(point_dir);
    const std::vector<PolicyResult> one{result.points[i].result};
    const auto point_rows = metrics_rows(one);
    write_metrics_csv(point_rows, point_dir / "metrics.csv");
  }
  if (result.spec.sweep.kind == SweepSpec::Kind::Load) write_frontier_csv(rows, dir / "frontier.csv");
}

} // namespace qfa
