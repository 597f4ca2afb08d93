#pragma once

// Seeded random streams and the per-slot external (link generation) phase.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace qfa {

class Topology;

/// One independent pseudo-random stream (64-bit Mersenne Twister).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Draws one uniform u and returns 1{u < p}; consumes a draw even for p in {0, 1}.
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

enum class Stream : std::size_t {
  LinkAttempts = 0,
  Bsm,
  Purification,
  TopologyLengths,
  FlowGeneration,
};
inline constexpr std::size_t kStreamCount = 5;

std::string_view stream_name(Stream s);

/// Named substreams derived from one master seed. Each substream is seeded
/// from splitmix64(master ^ hash(name)), so consuming one never shifts another.
class RngStreams {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64-substreams";

  explicit RngStreams(std::uint64_t master_seed);

  RngStream& operator[](Stream s) { return streams_[static_cast<std::size_t>(s)]; }
  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
  std::array<RngStream, kStreamCount> streams_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Realized link-level successes of one slot.
struct ExternalOutcome {
  std::vector<int> successes; // N_t(e)
  std::vector<int> retained;  // min(N_t(e), m_max(e))

  bool in_support(std::size_t edge) const { return retained[edge] >= 1; }
};

/// Caches per-edge attempt probabilities and samples the external phase.
class ExternalPhase {
 public:
  ExternalPhase(const Topology& topology, double alpha_per_km);

  /// S(e) Bernoulli draws per edge, edges in id order, modes ascending.
  void run(RngStream& link_attempts, ExternalOutcome& out) const;

  std::span<const double> attempt_probs() const { return attempt_probs_; }

 private:
  std::vector<double> attempt_probs_;
  std::vector<int> modes_;
  std::vector<int> caps_;
};

ExternalOutcome run_external_phase(const Topology& topology, double alpha_per_km,
                                   RngStream& link_attempts);

} // namespace qfa
