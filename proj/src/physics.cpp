#include "qfa/physics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

namespace qfa {

namespace {

void require_fidelity(double f, const char* what)
{
  if (!(f >= kWernerFloor - 1e-12 && f <= 1.0 + 1e-12)) {
    throw DomainError(std::string(what) + ": fidelity outside [1/4, 1]");
  }
}

} // namespace

WernerState WernerState::from_fidelity(double fidelity)
{
  require_fidelity(fidelity, "WernerState");
  return WernerState(std::clamp(fidelity, kWernerFloor, 1.0));
}

WernerState WernerState::from_parameter(double werner_param)
{
  if (!(werner_param >= -1e-12 && werner_param <= 1.0 + 1e-12)) {
    throw DomainError("WernerState: parameter outside [0, 1]");
  }
  return WernerState(std::clamp((1.0 + 3.0 * werner_param) / 4.0, kWernerFloor, 1.0));
}

double clamp_fidelity(double fidelity)
{
  static std::atomic<bool> warned{false};
  if (fidelity < kWernerFloor) {
    if (!warned.exchange(true)) {
      std::clog << "warning: fidelity " << fidelity << " below 1/4 clamped\n";
    }
    return kWernerFloor;
  }
  return std::min(fidelity, 1.0);
}

double link_attempt_prob(double length_km, double alpha_per_km)
{
  if (length_km < 0.0 || alpha_per_km < 0.0) {
    throw DomainError("link_attempt_prob: negative length or loss coefficient");
  }
  return std::exp(-alpha_per_km * length_km);
}

double per_edge_success_prob(double attempt_prob, int modes)
{
  if (attempt_prob < 0.0 || attempt_prob > 1.0 || modes < 1) {
    throw DomainError("per_edge_success_prob: need p0 in [0,1] and S >= 1");
  }
  // -expm1(S * log1p(-p0)) keeps precision when p0 is tiny.
  if (attempt_prob == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(modes) * std::log1p(-attempt_prob));
}

double decohere(double fidelity, std::int64_t slots, double slot_duration, double t2)
{
  if (!(t2 > 0.0)) throw DomainError("decohere: T2 must be positive");
  if (slots < 0) throw DomainError("decohere: negative elapsed slots");
  require_fidelity(fidelity, "decohere");
  if (slots == 0) return fidelity;
  const double decay = std::exp(-static_cast<double>(slots) * slot_duration / t2);
  return clamp_fidelity(kWernerFloor + (fidelity - kWernerFloor) * decay);
}

double swap_compose(std::span<const double> fidelities)
{
  if (fidelities.empty()) throw DomainError("swap_compose: empty path");
  if (fidelities.size() == 1) {
    require_fidelity(fidelities.front(), "swap_compose");
    return fidelities.front();
  }
  double p = 1.0;
  for (double f : fidelities) {
    require_fidelity(f, "swap_compose");
    p *= (4.0 * f - 1.0) / 3.0;
  }
  return clamp_fidelity((1.0 + 3.0 * p) / 4.0);
}

PurificationOutcome purify(double f1, double f2, const PurificationModel& model)
{
  require_fidelity(f1, "purify");
  require_fidelity(f2, "purify");
  switch (model.variant) {
    case PurificationVariant::Simplified:
      return {model.p_pur, std::min(1.0, std::max(f1, f2) + model.delta_f)};
    case PurificationVariant::Bbpssw: {
      const double e1 = (1.0 - f1) / 3.0;
      const double e2 = (1.0 - f2) / 3.0;
      // Outcomes agree when both inputs carry the same bit-flip parity.
      const double success = (f1 + e1) * (f2 + e2) + (2.0 * e1) * (2.0 * e2);
      const double target = f1 * f2 + e1 * e2;
      return {success, success > 0.0 ? target / success : kWernerFloor};
    }
    case PurificationVariant::Unset:
      break;
  }
  throw DomainError("purify: purification variant not set");
}

double path_success_prob(std::span<const double> link_probs, double bsm_success,
                         double end_fidelity, double f_min)
{
  if (link_probs.empty()) throw DomainError("path_success_prob: empty path");
  if (end_fidelity < f_min) return 0.0;
  double p = std::pow(bsm_success, static_cast<double>(link_probs.size() - 1));
  for (double pl : link_probs) p *= pl;
  return p;
}

double parallel_success_prob(std::span<const double> path_probs)
{
  double miss = 1.0;
  for (double p : path_probs) {
    if (p < 0.0 || p > 1.0) throw DomainError("parallel_success_prob: probability out of range");
    miss *= 1.0 - p;
  }
  return 1.0 - miss;
}

} // namespace qfa
