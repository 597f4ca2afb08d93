#include "qfa/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace qfa {

namespace {

template <typename T>
void require_samples(std::span<const T> s, const char* what)
{
  if (s.empty()) throw MetricsError(std::string(what) + ": no samples");
}

template <typename T>
double mean_of(std::span<const T> s)
{
  long double sum = 0;
  for (T x : s) sum += x;
  return static_cast<double>(sum / static_cast<long double>(s.size()));
}

// 1-based rank k of the smallest sorted sample with k / n >= level.
std::size_t tail_rank(std::size_t n, double level)
{
  if (!(level > 0.0 && level <= 1.0)) throw MetricsError("tail level must lie in (0, 1]");
  const auto nd = static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(level * nd));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / nd >= level) --k;
  while (k < n && static_cast<double>(k) / nd < level) ++k;
  return k;
}

template <typename T>
double tail_of(std::span<const T> s, double level)
{
  require_samples(s, "tail_age");
  std::vector<T> v(s.begin(), s.end());
  const auto k = tail_rank(v.size(), level);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return static_cast<double>(v[k - 1]);
}

template <typename T>
double cvar_of(std::span<const T> s, double level)
{
  require_samples(s, "cvar");
  const double a = tail_of(s, level);
  long double sum = 0;
  std::size_t n = 0;
  for (T x : s) {
    if (static_cast<double>(x) > a) {
      sum += x;
      ++n;
    }
  }
  return n == 0 ? a : static_cast<double>(sum / static_cast<long double>(n));
}

} // namespace

double mean_age(std::span<const double> ages)
{
  require_samples(ages, "mean_age");
  return mean_of(ages);
}

double mean_age(std::span<const std::uint32_t> ages)
{
  require_samples(ages, "mean_age");
  return mean_of(ages);
}

double tail_age(std::span<const double> samples, double level) { return tail_of(samples, level); }
double tail_age(std::span<const std::uint32_t> samples, double level)
{
  return tail_of(samples, level);
}
double cvar(std::span<const double> samples, double level) { return cvar_of(samples, level); }
double cvar(std::span<const std::uint32_t> samples, double level)
{
  return cvar_of(samples, level);
}

double throughput(std::span<const std::uint16_t> n_succ)
{
  require_samples(n_succ, "throughput");
  return mean_of(n_succ);
}

double jain_index(std::span<const double> mean_ages)
{
  require_samples(mean_ages, "jain_index");
  double sum = 0.0;
  double sq = 0.0;
  for (double a : mean_ages) {
    const double x = 1.0 / (1.0 + a);
    sum += x;
    sq += x * x;
  }
  return sum * sum / (static_cast<double>(mean_ages.size()) * sq);
}

double starvation(std::span<const double> mean_ages, double a_ref)
{
  require_samples(mean_ages, "starvation");
  const auto n = std::count_if(mean_ages.begin(), mean_ages.end(),
                               [&](double a) { return a > a_ref; });
  return static_cast<double>(n) / static_cast<double>(mean_ages.size());
}

Estimate batch_ci(std::span<const double> values)
{
  require_samples(values, "batch_ci");
  Estimate e;
  e.mean = mean_of(values);
  if (values.size() < 2) return e;
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  const double n = static_cast<double>(values.size());
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  e.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
  return e;
}

MetricsReport compute_metrics(const RunArtifact& run, const Scenario& scenario, double a_ref)
{
  if (run.warmup >= run.slots) throw MetricsError("no slots after warm-up");
  MetricsReport r;
  r.seed = run.seed;
  r.policy = run.policy.policy;
  r.a_ref = a_ref;
  const auto post = static_cast<double>(run.slots - run.warmup);
  std::vector<double> means;
  for (std::size_t f = 0; f < run.flow_count; ++f) {
    const auto ages = run.age_series(f, run.warmup);
    const auto hits = run.delivery_series(f, run.warmup);
    FlowMetrics m;
    m.source = scenario.flows[f].source;
    m.destination = scenario.flows[f].destination;
    m.mean_age = mean_age(ages);
    m.a95 = tail_age(ages);
    m.cvar95 = cvar(ages);
    m.deliveries = std::count(hits.begin(), hits.end(), std::uint8_t{1});
    m.throughput = static_cast<double>(m.deliveries) / post;
    means.push_back(m.mean_age);
    r.a95 += m.a95;
    r.cvar95 += m.cvar95;
    r.flows.push_back(m);
  }
  const auto nf = static_cast<double>(run.flow_count);
  r.mean_age = mean_age(means);
  r.a95 /= nf;
  r.cvar95 /= nf;
  r.throughput = throughput(std::span<const std::uint16_t>(run.n_succ).subspan(
      static_cast<std::size_t>(run.warmup)));
  r.jain = jain_index(means);
  r.starvation = starvation(means, a_ref);
  return r;
}

BatchSummary summarize(std::span<const MetricsReport> reports)
{
  if (reports.empty()) throw MetricsError("summarize: no reports");
  BatchSummary s;
  s.policy = reports.front().policy;
  const auto collect = [&](auto field) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(field(r));
    return batch_ci(v);
  };
  s.mean_age = collect([](const MetricsReport& r) { return r.mean_age; });
  s.a95 = collect([](const MetricsReport& r) { return r.a95; });
  s.cvar95 = collect([](const MetricsReport& r) { return r.cvar95; });
  s.throughput = collect([](const MetricsReport& r) { return r.throughput; });
  s.jain = collect([](const MetricsReport& r) { return r.jain; });
  s.starvation = collect([](const MetricsReport& r) { return r.starvation; });
  const auto nf = reports.front().flows.size();
  for (std::size_t f = 0; f < nf; ++f) {
    s.flow_mean_age.push_back(collect([f](const MetricsReport& r) {
      if (r.flows.size() <= f) throw MetricsError("summarize: flow counts differ across seeds");
      return r.flows[f].mean_age;
    }));
  }
  return s;
}

Scenario reference_scenario(const Scenario& scenario)
{
  SimConfig c = scenario.config;
  const Edge& e = scenario.topology.edge(0);
  c.flows = {FlowSpec{e.u, e.v, 1.0}};
  c.attempt_budget = 1;
  return make_scenario(std::move(c), scenario.topology);
}

double reference_age(const Scenario& scenario)
{
  static std::mutex mu;
  static std::map<std::string, double> cache;

  const SimConfig& c = scenario.config;
  const Edge& e = scenario.topology.edge(0);
  std::ostringstream key;
  key.precision(17);
  key << c.alpha_per_km << '|' << c.slot_duration << '|' << c.bsm_success << '|' << c.f_min << '|'
      << c.t2_seconds << '|' << c.t_mem_slots << '|' << c.purification.enabled << '|'
      << static_cast<int>(c.purification.model.variant) << '|' << c.purification.model.p_pur << '|'
      << c.purification.model.delta_f << '|' << c.slots << '|' << c.warmup_slots << '|'
      << e.length_km << '|' << e.modes << '|' << e.retain_cap << '|' << e.base_fidelity;
  for (auto s : c.seeds) key << '|' << s;
  {
    const std::lock_guard lock(mu);
    if (const auto it = cache.find(key.str()); it != cache.end()) return it->second;
  }

  const Scenario ref = reference_scenario(scenario);
  PolicyConfig tp;
  tp.policy = PolicyId::TpMax;
  std::vector<double> tails;
  for (const RunArtifact& a : run_batch(ref, tp)) tails.push_back(tail_age(a.age_series(0, a.warmup)));
  const double value = batch_ci(tails).mean;

  const std::lock_guard lock(mu);
  cache.emplace(key.str(), value);
  return value;
}

} // namespace qfa
