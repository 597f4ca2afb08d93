#include "qfa/outputs.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace qfa {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path)
{
  out.close();
  if (!out) throw OutputError("failed writing '" + path.string() + "'");
}

std::string opt(const std::optional<double>& v) { return v ? format_value(*v) : std::string(); }

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where)
{
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw OutputError(where + ": not a number: '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_int(const std::string& s, const std::string& where)
{
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw OutputError(where + ": not an integer: '" + s + "'");
  }
  return v;
}

} // namespace

std::string format_value(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<MetricsRow> metrics_rows(std::span<const PolicyResult> results)
{
  std::vector<MetricsRow> rows;
  for (const PolicyResult& r : results) {
    const std::string name(policy_name(r.policy.policy));
    for (const MetricsReport& rep : r.reports) {
      for (std::size_t f = 0; f < rep.flows.size(); ++f) {
        const FlowMetrics& m = rep.flows[f];
        MetricsRow row;
        row.policy = name;
        row.seed = rep.seed;
        row.flow_src = m.source;
        row.flow_dst = m.destination;
        row.mean_age = m.mean_age;
        row.a95 = m.a95;
        row.cvar95 = m.cvar95;
        row.throughput = m.throughput;
        row.starvation = m.mean_age > rep.a_ref ? 1.0 : 0.0;
        if (f < r.summary.flow_mean_age.size()) {
          row.ci_mean_age = r.summary.flow_mean_age[f].half_width;
        }
        rows.push_back(row);
      }
      MetricsRow agg;
      agg.policy = name;
      agg.seed = rep.seed;
      agg.mean_age = rep.mean_age;
      agg.a95 = rep.a95;
      agg.cvar95 = rep.cvar95;
      agg.throughput = rep.throughput;
      agg.jain = rep.jain;
      agg.starvation = rep.starvation;
      agg.ci_mean_age = r.summary.mean_age.half_width;
      rows.push_back(agg);
    }
  }
  return rows;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path)
{
  if (rows.empty()) throw OutputError("refusing to write a metrics file without rows");
  auto out = open_for_write(path);
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) {
    out << r.policy << ',' << r.seed << ','
        << (r.flow_src ? std::to_string(*r.flow_src) : "*") << ','
        << (r.flow_dst ? std::to_string(*r.flow_dst) : "*") << ',' << format_value(r.mean_age)
        << ',' << format_value(r.a95) << ',' << format_value(r.cvar95) << ','
        << format_value(r.throughput) << ',' << opt(r.jain) << ',' << format_value(r.starvation)
        << ',' << opt(r.ci_mean_age) << ',' << r.schema_version << '\n';
  }
  close_checked(out, path);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw OutputError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw OutputError("'" + path.string() + "': unexpected header");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto c = split(line);
    if (c.size() != 12) throw OutputError(where + ": expected 12 columns");
    MetricsRow r;
    r.policy = c[0];
    r.seed = parse_int<std::uint64_t>(c[1], where);
    if (c[2] != "*") r.flow_src = parse_int<NodeId>(c[2], where);
    if (c[3] != "*") r.flow_dst = parse_int<NodeId>(c[3], where);
    r.mean_age = parse_double(c[4], where);
    r.a95 = parse_double(c[5], where);
    r.cvar95 = parse_double(c[6], where);
    r.throughput = parse_double(c[7], where);
    if (!c[8].empty()) r.jain = parse_double(c[8], where);
    r.starvation = parse_double(c[9], where);
    if (!c[10].empty()) r.ci_mean_age = parse_double(c[10], where);
    r.schema_version = parse_int<int>(c[11], where);
    rows.push_back(r);
  }
  return rows;
}

void write_trace(const RunArtifact& run, const Scenario& scenario, std::ostream& out)
{
  out << "{\"schema_version\":" << kSchemaVersion << ",\"type\":\"run\",\"policy\":\""
      << policy_name(run.policy.policy) << "\",\"seed\":" << run.seed
      << ",\"slots\":" << run.slots << ",\"flows\":" << run.flow_count
      << ",\"edges\":" << run.edge_count << "}\n";
  std::string buf;
  buf.reserve(1 << 16);
  char num[24];
  const auto put = [&](std::uint64_t v) {
    const auto [p, ec] = std::to_chars(num, num + sizeof num, v);
    buf.append(num, p);
  };
  for (std::int64_t t = 1; t <= run.slots; ++t) {
    for (std::size_t e = 0; e < run.edge_count; ++e) {
      buf += "{\"slot\":";
      put(static_cast<std::uint64_t>(t));
      buf += ",\"edge\":";
      put(e);
      buf += ",\"n_ret\":";
      put(run.retained[static_cast<std::size_t>(t - 1) * run.edge_count + e]);
      buf += "}\n";
    }
    for (std::size_t f = 0; f < run.flow_count; ++f) {
      buf += "{\"slot\":";
      put(static_cast<std::uint64_t>(t));
      buf += ",\"flow_src\":";
      put(scenario.flows[f].source);
      buf += ",\"flow_dst\":";
      put(scenario.flows[f].destination);
      buf += ",\"Y\":";
      put(run.delivered_at(f, t) ? 1 : 0);
      buf += ",\"age\":";
      put(run.age(f, t));
      buf += "}\n";
    }
    if (buf.size() > (1 << 15)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw OutputError("failed writing trace");
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path)
{
  if (rows.empty()) throw OutputError("refusing to write an empty sweep file");
  auto out = open_for_write(path);
  for (const auto& [name, value] : rows.front().axes) out << name << ',';
  out << "policy,mean_age,a95,cvar95,throughput,jain,starvation,ci_mean_age,ci_a95,"
         "ci_throughput,schema_version\n";
  for (const SweepRow& r : rows) {
    for (const auto& [name, value] : r.axes) out << format_value(value) << ',';
    const BatchSummary& s = r.summary;
    out << policy_name(s.policy) << ',' << format_value(s.mean_age.mean) << ','
        << format_value(s.a95.mean) << ',' << format_value(s.cvar95.mean) << ','
        << format_value(s.throughput.mean) << ',' << format_value(s.jain.mean) << ','
        << format_value(s.starvation.mean) << ',' << opt(s.mean_age.half_width) << ','
        << opt(s.a95.half_width) << ',' << opt(s.throughput.half_width) << ','
        << kSchemaVersion << '\n';
  }
  close_checked(out, path);
}

void write_frontier_csv(std::span<const SweepRow> rows, const std::filesystem::path& path)
{
  if (rows.empty()) throw OutputError("refusing to write an empty frontier file");
  std::vector<FrontierPoint> points;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    points.push_back({std::to_string(i), rows[i].summary.throughput.mean, rows[i].summary.a95.mean});
  }
  const auto front = pareto_frontier(points);
  std::vector<bool> on(rows.size(), false);
  for (const auto& p : front) on[std::stoul(p.label)] = true;

  auto out = open_for_write(path);
  out << "policy,load,throughput,a95,cvar95,mean_age,on_frontier,schema_version\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BatchSummary& s = rows[i].summary;
    double load = 0.0;
    for (const auto& [name, value] : rows[i].axes) {
      if (name == "load") load = value;
    }
    out << policy_name(s.policy) << ',' << format_value(load) << ','
        << format_value(s.throughput.mean) << ',' << format_value(s.a95.mean) << ','
        << format_value(s.cvar95.mean) << ',' << format_value(s.mean_age.mean) << ','
        << (on[i] ? 1 : 0) << ',' << kSchemaVersion << '\n';
  }
  close_checked(out, path);
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path)
{
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

} // namespace qfa
