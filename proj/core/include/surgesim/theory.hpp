#pragma once

#include <optional>
#include <string>
#include <vector>

namespace surge {

// Parameters of the deterministic two-zone fluid model. Rates are per time
// step and per zone; demands are continuous, nonnegative reals.
struct TheoryParams {
  double lambda = 0.0;       // exogenous rider arrivals per zone per step
  double mu = 0.0;           // driver supply per zone per step, mu > lambda
  double d0_surge = 0.0;     // initial unmet demand inside the surge zone
  double d0_nonsurge = 0.0;  // initial unmet demand outside
  double k = 0.0;            // move-rate multiplier of the linear relocation rule
  int horizon = 1;           // maximum number of steps to simulate
  double tol = 1e-9;         // zero-detection tolerance

  // Throws std::invalid_argument naming the violated rule.
  void validate() const;

  // 10x the total-demand clearing guarantee ceil((D0 + d0) / (mu - lambda)).
  static int default_horizon(double d0_surge, double d0_nonsurge, double lambda,
                             double mu);
};

// Unmet demands at the end of time step t. Both clamped at zero.
struct DemandState {
  int t = 0;
  double d_s = 0.0;
  double d_ns = 0.0;

  bool operator==(const DemandState&) const = default;
};

enum class SurgeType { localized, spill_over };

const char* to_string(SurgeType type);
std::optional<SurgeType> surge_type_from_string(const std::string& name);

struct Trajectory {
  TheoryParams params;
  std::vector<DemandState> states;  // states[0] holds the boundary conditions
  bool converged = false;
};

// Fraction of waiting surge riders relocating per step:
// f(x) = clamp(k * x / mu, 0, 1), non-decreasing, zero for x <= 0.
double move_fraction(double differential, const TheoryParams& params);

// One step of the coupled recursion. With phi = f(d_s - d_ns) * d_s:
//   d_s'  = max(0, d_s  + (lambda - mu) - phi)
//   d_ns' = max(0, d_ns + (lambda - mu) + phi)
DemandState step(const DemandState& state, const TheoryParams& params);

// Iterates step() from the boundary conditions until both demands are <= tol
// or the horizon is exhausted (the latter reported via converged = false).
Trajectory simulate(const TheoryParams& params);

struct ConvergenceTimes {
  int tau_s = 0;
  int tau_n = 0;

  bool operator==(const ConvergenceTimes&) const = default;
};

// First state indices with d_s <= tol and d_ns <= tol respectively.
// Throws std::runtime_error when the trajectory did not converge.
ConvergenceTimes convergence_times(const Trajectory& traj);

struct ClearingSteps {
  int steps_s = 0;
  int steps_n = 0;

  bool operator==(const ClearingSteps&) const = default;
};

// Step counts in the one-based plotting convention: the initial state counts
// as the first step and a zone has cleared once fewer than `unit` riders
// remain. clearing_steps == convergence_times + 1 except when a demand decays
// through the (0, unit) band one step before hitting zero.
ClearingSteps clearing_steps(const Trajectory& traj, double unit = 1.0);

// First t with f(d_s - d_ns) * d_s <= mu - lambda. Zero exactly when the
// surge is localized; otherwise the time of the single d_ns peak.
int peak_time(const Trajectory& traj);

struct IntBounds {
  int lower = 0;
  int upper = 0;

  bool contains(int value) const { return lower <= value && value <= upper; }
  bool operator==(const IntBounds&) const = default;
};

// floor(D0 / ((mu - lambda) + D0 * f(D0)))  <=  tau_s  <=  ceil(D0 / (mu - lambda))
IntBounds tau_s_bounds(const TheoryParams& params);

// floor(d0 / (mu - lambda))  <=  tau_n  <=  ceil((D0 + d0) / (mu - lambda))
IntBounds tau_n_bounds(const TheoryParams& params);

// Localized iff D0 * f(D0 - d0) <= mu - lambda: the initial relocation mass
// can be absorbed by the non-surge excess supply.
SurgeType classify_surge(const TheoryParams& params);

// First t with d_ns(t) > d_s(t), if the trajectory ever inverts.
std::optional<int> detect_inversion(const Trajectory& traj);

// Theoretical windows next to the observed values; see analysis.hpp for the
// audit that assembles it.
struct BoundsReport {
  IntBounds tau_s_bounds;
  IntBounds tau_n_bounds;
  int tau_s_observed = 0;
  int tau_n_observed = 0;
  int peak_tau_observed = 0;
  SurgeType surge_type = SurgeType::localized;
  std::optional<int> inversion_time;

  bool tau_s_within() const { return tau_s_bounds.contains(tau_s_observed); }
  bool tau_n_within() const { return tau_n_bounds.contains(tau_n_observed); }
  bool within_bounds() const { return tau_s_within() && tau_n_within(); }

  bool operator==(const BoundsReport&) const = default;
};

}  // namespace surge
