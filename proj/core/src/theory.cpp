#include "surgesim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace surge {

void TheoryParams::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("TheoryParams: requires lambda >= 0");
  if (!(lambda < mu)) throw std::invalid_argument("TheoryParams: requires lambda < mu");
  if (!(d0_nonsurge >= 0.0))
    throw std::invalid_argument("TheoryParams: requires d0_nonsurge >= 0");
  if (!(d0_surge >= d0_nonsurge))
    throw std::invalid_argument("TheoryParams: requires d0_surge >= d0_nonsurge");
  if (!(k >= 0.0)) throw std::invalid_argument("TheoryParams: requires k >= 0");
  if (horizon < 1) throw std::invalid_argument("TheoryParams: requires horizon >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("TheoryParams: requires tol >= 0");
}

int TheoryParams::default_horizon(double d0_surge, double d0_nonsurge, double lambda,
                                  double mu) {
  if (!(mu > lambda)) return 1;  // validation rejects such params anyway
  const double clearing = std::ceil((d0_surge + d0_nonsurge) / (mu - lambda));
  const double steps = std::clamp(10.0 * clearing, 1.0, 1e9);
  return static_cast<int>(steps);
}

const char* to_string(SurgeType type) {
  return type == SurgeType::localized ? "localized" : "spill_over";
}

std::optional<SurgeType> surge_type_from_string(const std::string& name) {
  if (name == "localized") return SurgeType::localized;
  if (name == "spill_over") return SurgeType::spill_over;
  return std::nullopt;
}

double move_fraction(double differential, const TheoryParams& params) {
  return std::min(1.0, std::max(0.0, params.k * differential / params.mu));
}

DemandState step(const DemandState& state, const TheoryParams& params) {
  const double phi = move_fraction(state.d_s - state.d_ns, params) * state.d_s;
  const double net = params.lambda - params.mu;
  return DemandState{state.t + 1, std::max(0.0, state.d_s + net - phi),
                     std::max(0.0, state.d_ns + net + phi)};
}

Trajectory simulate(const TheoryParams& params) {
  params.validate();
  Trajectory traj{params, {}, false};
  DemandState s{0, params.d0_surge, params.d0_nonsurge};
  traj.states.push_back(s);
  while (!(s.d_s <= params.tol && s.d_ns <= params.tol) && s.t < params.horizon) {
    s = step(s, params);
    traj.states.push_back(s);
  }
  traj.converged = s.d_s <= params.tol && s.d_ns <= params.tol;
  return traj;
}

namespace {

int first_index_at_or_below(const Trajectory& traj, double threshold, bool surge_zone) {
  for (const DemandState& s : traj.states) {
    const double d = surge_zone ? s.d_s : s.d_ns;
    if (d <= threshold) return s.t;
  }
  return -1;
}

}  // namespace

ConvergenceTimes convergence_times(const Trajectory& traj) {
  if (!traj.converged)
    throw std::runtime_error(
        "convergence_times: trajectory did not converge; horizon too small");
  return ConvergenceTimes{first_index_at_or_below(traj, traj.params.tol, true),
                          first_index_at_or_below(traj, traj.params.tol, false)};
}

ClearingSteps clearing_steps(const Trajectory& traj, double unit) {
  if (!traj.converged)
    throw std::runtime_error(
        "clearing_steps: trajectory did not converge; horizon too small");
  int s = -1;
  int n = -1;
  for (const DemandState& st : traj.states) {
    if (s < 0 && st.d_s < unit) s = st.t;
    if (n < 0 && st.d_ns < unit) n = st.t;
  }
  if (s < 0 || n < 0)
    throw std::invalid_argument("clearing_steps: requires unit > tol");
  return ClearingSteps{s + 1, n + 1};
}

int peak_time(const Trajectory& traj) {
  const TheoryParams& p = traj.params;
  for (const DemandState& s : traj.states) {
    const double outflow = move_fraction(s.d_s - s.d_ns, p) * s.d_s;
    if (outflow <= p.mu - p.lambda) return s.t;
  }
  throw std::logic_error("peak_time: no qualifying step in a converged trajectory");
}

IntBounds tau_s_bounds(const TheoryParams& params) {
  const double excess = params.mu - params.lambda;
  const double d0 = params.d0_surge;
  const double fastest = excess + d0 * move_fraction(d0, params);
  return IntBounds{static_cast<int>(std::floor(d0 / fastest)),
                   static_cast<int>(std::ceil(d0 / excess))};
}

IntBounds tau_n_bounds(const TheoryParams& params) {
  const double excess = params.mu - params.lambda;
  return IntBounds{
      static_cast<int>(std::floor(params.d0_nonsurge / excess)),
      static_cast<int>(std::ceil((params.d0_surge + params.d0_nonsurge) / excess))};
}

SurgeType classify_surge(const TheoryParams& params) {
  const double outflow =
      params.d0_surge * move_fraction(params.d0_surge - params.d0_nonsurge, params);
  return outflow <= params.mu - params.lambda ? SurgeType::localized
                                              : SurgeType::spill_over;
}

std::optional<int> detect_inversion(const Trajectory& traj) {
  for (const DemandState& s : traj.states)
    if (s.d_ns > s.d_s) return s.t;
  return std::nullopt;
}

}  // namespace surge
