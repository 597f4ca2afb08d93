#pragma once

// Werner-state fidelity algebra: link generation, storage decay, swapping and
// purification maps.

#include <cstdint>
#include <span>
#include <stdexcept>

namespace qfa {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fidelity of a maximally mixed two-qubit state; Werner fidelities never drop
/// below it.
inline constexpr double kWernerFloor = 0.25;

/// A Werner pair described by its fidelity F, or equivalently by the Werner
/// parameter p = (4F - 1) / 3.
class WernerState {
 public:
  constexpr WernerState() = default;

  static WernerState from_fidelity(double fidelity);
  static WernerState from_parameter(double werner_param);

  constexpr double fidelity() const { return fidelity_; }
  constexpr double parameter() const { return (4.0 * fidelity_ - 1.0) / 3.0; }

 private:
  explicit constexpr WernerState(double f) : fidelity_(f) {}
  double fidelity_ = 1.0;
};

/// Per-mode attempt success exp(-alpha * L).
double link_attempt_prob(double length_km, double alpha_per_km);

/// Probability that at least one of `modes` parallel attempts succeeds.
double per_edge_success_prob(double attempt_prob, int modes);

/// Storage decay of a Werner pair over `slots` slots: the Werner parameter is
/// multiplied by exp(-slot_duration / t2) per slot, so F relaxes toward 1/4.
double decohere(double fidelity, std::int64_t slots, double slot_duration, double t2);

/// End-to-end fidelity after swapping a chain of Werner pairs.
double swap_compose(std::span<const double> fidelities);

enum class PurificationVariant { Unset, Simplified, Bbpssw };

struct PurificationModel {
  PurificationVariant variant = PurificationVariant::Simplified;
  double p_pur = 0.8;    // SIMPLIFIED only
  double delta_f = 0.08; // SIMPLIFIED only
};

struct PurificationOutcome {
  double success_prob = 0.0;
  double fidelity = 0.0; // output fidelity conditioned on success
};

/// One purification round consuming two pairs on the same link.
///
/// SIMPLIFIED succeeds with p_pur and yields min(1, max(F1, F2) + delta_f).
/// BBPSSW uses the Werner-input bilateral-CNOT map; on success a single pair
/// survives with the returned fidelity.
PurificationOutcome purify(double f1, double f2, const PurificationModel& model);

/// Unconditional usable-delivery probability of a path whose edges succeed
/// with `link_probs` and whose k-1 swaps succeed with q each.
double path_success_prob(std::span<const double> link_probs, double bsm_success,
                         double end_fidelity, double f_min);

/// 1 - prod(1 - P_i) for pair-disjoint paths attempted in the same slot.
double parallel_success_prob(std::span<const double> path_probs);

/// Clamps to [1/4, 1]; values below the floor are reported on stderr once.
double clamp_fidelity(double fidelity);

} // namespace qfa
