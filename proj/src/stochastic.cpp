#include "qfa/stochastic.hpp"

#include "qfa/physics.hpp"
#include "qfa/topology.hpp"

#include <algorithm>
#include <limits>

namespace qfa {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::below(std::uint64_t n)
{
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

std::string_view stream_name(Stream s)
{
  switch (s) {
    case Stream::LinkAttempts: return "link-attempts";
    case Stream::Bsm: return "bsm";
    case Stream::Purification: return "purification";
    case Stream::TopologyLengths: return "topology-lengths";
    case Stream::FlowGeneration: return "flow-generation";
  }
  return "unknown";
}

namespace {

// FNV-1a, used only to give each stream name a fixed 64-bit tag.
constexpr std::uint64_t name_tag(std::string_view name)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream make_stream(std::uint64_t master, Stream s)
{
  return RngStream(splitmix64(master ^ name_tag(stream_name(s))));
}

} // namespace

RngStreams::RngStreams(std::uint64_t master_seed)
    : master_(master_seed),
      streams_{make_stream(master_seed, Stream::LinkAttempts),
               make_stream(master_seed, Stream::Bsm),
               make_stream(master_seed, Stream::Purification),
               make_stream(master_seed, Stream::TopologyLengths),
               make_stream(master_seed, Stream::FlowGeneration)}
{
}

ExternalPhase::ExternalPhase(const Topology& topology, double alpha_per_km)
{
  const auto edges = topology.edges();
  attempt_probs_.reserve(edges.size());
  for (const Edge& e : edges) {
    attempt_probs_.push_back(link_attempt_prob(e.length_km, alpha_per_km));
    modes_.push_back(e.modes);
    caps_.push_back(e.retain_cap);
  }
}

void ExternalPhase::run(RngStream& link_attempts, ExternalOutcome& out) const
{
  const std::size_t n = attempt_probs_.size();
  out.successes.assign(n, 0);
  out.retained.assign(n, 0);
  for (std::size_t e = 0; e < n; ++e) {
    int hits = 0;
    for (int mode = 0; mode < modes_[e]; ++mode) {
      hits += link_attempts.bernoulli(attempt_probs_[e]) ? 1 : 0;
    }
    out.successes[e] = hits;
    out.retained[e] = std::min(hits, caps_[e]);
  }
}

ExternalOutcome run_external_phase(const Topology& topology, double alpha_per_km,
                                   RngStream& link_attempts)
{
  ExternalOutcome out;
  ExternalPhase(topology, alpha_per_km).run(link_attempts, out);
  return out;
}

} // namespace qfa
