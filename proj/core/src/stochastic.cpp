#include "surgesim/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace surge {

const char* to_string(ArrivalKind kind) {
  return kind == ArrivalKind::deterministic ? "deterministic" : "poisson";
}

std::optional<ArrivalKind> arrival_kind_from_string(const std::string& name) {
  if (name == "deterministic") return ArrivalKind::deterministic;
  if (name == "poisson") return ArrivalKind::poisson;
  return std::nullopt;
}

std::int64_t ArrivalProcess::sample(RandomStream& rng) const {
  if (kind == ArrivalKind::deterministic) return std::llround(mean);
  return rng.poisson(mean);
}

StochasticParams StochasticParams::make(const TheoryParams& base, ArrivalKind demand,
                                        ArrivalKind supply, std::uint64_t seed) {
  return StochasticParams{base, ArrivalProcess{demand, base.lambda},
                          ArrivalProcess{supply, base.mu}, seed};
}

void StochasticParams::validate() const {
  base.validate();
  if (demand_process.mean != base.lambda)
    throw std::invalid_argument(
        "StochasticParams: requires demand_process.mean == lambda");
  if (supply_process.mean != base.mu)
    throw std::invalid_argument("StochasticParams: requires supply_process.mean == mu");
}

Trajectory simulate_stochastic(const StochasticParams& params) {
  params.validate();
  const TheoryParams& base = params.base;

  RandomStream demand_s(derive_stream_seed(params.seed, 0));
  RandomStream demand_ns(derive_stream_seed(params.seed, 1));
  RandomStream supply_s(derive_stream_seed(params.seed, 2));
  RandomStream supply_ns(derive_stream_seed(params.seed, 3));

  Trajectory traj{base, {}, false};
  DemandState s{0, base.d0_surge, base.d0_nonsurge};
  traj.states.push_back(s);
  while (!(s.d_s <= base.tol && s.d_ns <= base.tol) && s.t < base.horizon) {
    const auto lam_s = static_cast<double>(params.demand_process.sample(demand_s));
    const auto lam_ns = static_cast<double>(params.demand_process.sample(demand_ns));
    const auto mu_s = static_cast<double>(params.supply_process.sample(supply_s));
    const auto mu_ns = static_cast<double>(params.supply_process.sample(supply_ns));
    // the rider behavior f keeps the mean supply rate as its scale
    const double phi = move_fraction(s.d_s - s.d_ns, base) * s.d_s;
    s = DemandState{s.t + 1, std::max(0.0, s.d_s + (lam_s - mu_s) - phi),
                    std::max(0.0, s.d_ns + (lam_ns - mu_ns) + phi)};
    traj.states.push_back(s);
  }
  traj.converged = s.d_s <= base.tol && s.d_ns <= base.tol;
  return traj;
}

}  // namespace surge
