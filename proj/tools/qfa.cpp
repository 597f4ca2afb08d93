#include "qfa/experiment.hpp"
#include "qfa/presets.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw qfa::ConfigError("seed range '" + item + "' is empty");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw qfa::ConfigError("cannot parse seeds '" + text + "'");
    }
  }
  if (seeds.empty()) throw qfa::ConfigError("no seeds given");
  return seeds;
}

struct Flags {
  std::string preset;
  std::string config;
  std::string policy;
  std::optional<double> tau;
  std::optional<double> beta;
  std::string seeds;
  std::optional<std::int64_t> slots;
  std::optional<std::int64_t> warmup;
  std::optional<double> a_ref;
  std::string out = "qfa-out";
  bool emit_trace = false;
  bool thr_strict = false;
  unsigned threads = 0;
};

qfa::ExperimentSpec load_spec(const Flags& f)
{
  qfa::ExperimentSpec spec =
      f.config.empty() ? qfa::make_preset(f.preset.empty() ? "baseline" : f.preset)
                       : qfa::load_experiment(f.config);
  if (!f.policy.empty()) {
    const auto id = qfa::parse_policy(f.policy);
    if (!id) throw qfa::ConfigError("unknown policy '" + f.policy + "'");
    qfa::PolicyConfig chosen;
    chosen.policy = *id;
    for (const auto& p : spec.policies) {
      if (p.policy == *id) chosen = p;
    }
    spec.policies = {chosen};
  }
  for (auto& p : spec.policies) {
    if (f.tau) p.fa_thr_tau = *f.tau;
    if (f.beta) p.fa_index_beta = *f.beta;
    if (f.thr_strict) p.thr_strict = true;
  }
  if (!f.seeds.empty()) spec.config.seeds = parse_seeds(f.seeds);
  if (f.slots) {
    spec.config.slots = *f.slots;
    if (!f.warmup && spec.config.warmup_slots >= *f.slots) spec.config.warmup_slots = *f.slots / 10;
  }
  if (f.warmup) spec.config.warmup_slots = *f.warmup;
  if (f.a_ref) spec.a_ref = *f.a_ref;
  return spec;
}

void print_summary(const qfa::ExperimentResult& r)
{
  for (const auto& p : r.points) {
    const auto& s = p.result.summary;
    std::cout << qfa::policy_name(s.policy);
    for (const auto& [name, value] : p.axes) std::cout << ' ' << name << '=' << qfa::format_value(value);
    std::cout << "  mean_age=" << qfa::format_value(s.mean_age.mean)
              << " a95=" << qfa::format_value(s.a95.mean)
              << " thr=" << qfa::format_value(s.throughput.mean)
              << " jain=" << qfa::format_value(s.jain.mean)
              << " starvation=" << qfa::format_value(s.starvation.mean) << '\n';
  }
  std::cout << "elapsed " << qfa::format_value(r.seconds) << " s\n";
}

int run_command(const Flags& f)
{
  const auto spec = load_spec(f);
  const std::filesystem::path out = f.out;
  std::filesystem::create_directories(out);

  qfa::RunOptions options;
  options.threads = f.threads;
  std::unique_ptr<std::ofstream> trace;
  std::size_t trace_point = static_cast<std::size_t>(-1);
  if (f.emit_trace) {
    const bool sweep = spec.sweep.kind != qfa::SweepSpec::Kind::None;
    options.on_run = [&, sweep](const qfa::RunArtifact& a, const qfa::Scenario& s, std::size_t point) {
      if (!trace || (sweep && point != trace_point)) {
        std::filesystem::path file = out / "trace.ndjson";
        if (sweep) {
          const auto dir = out / ("point_" + std::to_string(point));
          std::filesystem::create_directories(dir);
          file = dir / "trace.ndjson";
        }
        trace = std::make_unique<std::ofstream>(file, std::ios::binary | std::ios::trunc);
        if (!*trace) throw qfa::OutputError("cannot write '" + file.string() + "'");
        trace_point = point;
      }
      qfa::write_trace(a, s, *trace);
    };
  }
  const auto result = qfa::run_experiment(spec, options);
  if (trace) trace->close();
  qfa::write_outputs(result, out);
  print_summary(result);
  if (result.conservation_violations() != 0) {
    std::cerr << "warning: inventory ledger failed to balance in "
              << result.conservation_violations() << " slots\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Slotted Monte Carlo simulator for flow age in quantum repeater networks"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "run a preset or a JSON experiment");
  auto* preset = run->add_option("--preset", f.preset, "built-in experiment")
                     ->check(CLI::IsMember(qfa::preset_names()));
  run->add_option("--config", f.config, "experiment JSON file")->excludes(preset);
  run->add_option("--policy", f.policy, "tp-max, fid-max, fa-thr or fa-index");
  run->add_option("--tau", f.tau, "FA-THR age threshold (slots)");
  run->add_option("--beta", f.beta, "FA-INDEX age weight");
  run->add_option("--seeds", f.seeds, "seed list, e.g. 1,2,7 or 1-5");
  run->add_option("--slots", f.slots, "slots per run");
  run->add_option("--warmup", f.warmup, "warm-up slots excluded from metrics");
  run->add_option("--a-ref", f.a_ref, "fixed starvation reference age");
  run->add_option("--out", f.out, "output directory")->capture_default_str();
  run->add_option("--threads", f.threads, "worker threads (0: all cores)");
  run->add_flag("--emit-trace", f.emit_trace, "write trace.ndjson");
  run->add_flag("--thr-strict", f.thr_strict, "FA-THR serves only flows above the threshold");

  auto* config = app.add_subcommand("config", "print the JSON of a preset");
  std::string config_preset = "baseline";
  config->add_option("preset", config_preset)->check(CLI::IsMember(qfa::preset_names()));

  app.add_subcommand("presets", "list built-in experiments");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return run_command(f);
    if (config->parsed()) {
      std::cout << qfa::to_json(qfa::make_preset(config_preset)).dump(2) << '\n';
      return 0;
    }
    for (auto name : qfa::preset_names()) std::cout << name << '\n';
    return 0;
  } catch (const qfa::ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
