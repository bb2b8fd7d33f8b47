#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "surgesim/stochastic.hpp"

using namespace surge;

namespace {

TheoryParams fig2_base() {
  return TheoryParams{30, 50, 1000, 200, 0.005, 600, 1e-9};
}

}  // namespace

TEST_CASE("arrival process sampling") {
  RandomStream rng(1);
  CHECK(ArrivalProcess{ArrivalKind::deterministic, 30.0}.sample(rng) == 30);
  CHECK(ArrivalProcess{ArrivalKind::deterministic, 29.6}.sample(rng) == 30);
  CHECK(ArrivalProcess{ArrivalKind::poisson, 0.0}.sample(rng) == 0);
}

TEST_CASE("validate requires process means to match the base rates") {
  StochasticParams params =
      StochasticParams::make(fig2_base(), ArrivalKind::poisson, ArrivalKind::poisson, 1);
  CHECK_NOTHROW(params.validate());
  params.demand_process.mean = 31.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("deterministic processes reduce to the core recursion exactly") {
  const StochasticParams params = StochasticParams::make(
      fig2_base(), ArrivalKind::deterministic, ArrivalKind::deterministic, 99);
  const Trajectory stochastic = simulate_stochastic(params);
  const Trajectory deterministic = simulate(fig2_base());
  REQUIRE(stochastic.states.size() == deterministic.states.size());
  for (std::size_t i = 0; i < stochastic.states.size(); ++i)
    CHECK(stochastic.states[i] == deterministic.states[i]);
  CHECK(stochastic.converged == deterministic.converged);
}

TEST_CASE("equal seeds give bit-identical trajectories, different seeds differ") {
  const StochasticParams params =
      StochasticParams::make(fig2_base(), ArrivalKind::poisson, ArrivalKind::poisson, 7);
  const Trajectory a = simulate_stochastic(params);
  const Trajectory b = simulate_stochastic(params);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);

  StochasticParams other = params;
  other.seed = 8;
  const Trajectory c = simulate_stochastic(other);
  bool any_diff = c.states.size() != a.states.size();
  for (std::size_t i = 1; !any_diff && i < std::min(a.states.size(), c.states.size());
       ++i)
    any_diff = !(a.states[i] == c.states[i]);
  CHECK(any_diff);
}

TEST_CASE("demands never go negative under supply spikes") {
  TheoryParams base = fig2_base();
  base.d0_surge = 40;  // small initial demand, mean supply near it
  base.d0_nonsurge = 5;
  const StochasticParams params =
      StochasticParams::make(base, ArrivalKind::poisson, ArrivalKind::poisson, 3);
  const Trajectory traj = simulate_stochastic(params);
  for (const DemandState& s : traj.states) {
    CHECK(s.d_s >= 0.0);
    CHECK(s.d_ns >= 0.0);
  }
}

TEST_CASE("poisson runs clear near the deterministic clearing time") {
  const Trajectory det = simulate(fig2_base());
  const int det_steps = clearing_steps(det).steps_s;
  int converged = 0;
  double total_steps = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const StochasticParams params = StochasticParams::make(
        fig2_base(), ArrivalKind::poisson, ArrivalKind::poisson, seed);
    const Trajectory traj = simulate_stochastic(params);
    if (traj.converged) {
      ++converged;
      total_steps += clearing_steps(traj).steps_s;
    }
  }
  REQUIRE(converged == 30);
  const double mean_steps = total_steps / converged;
  CHECK(std::abs(mean_steps - det_steps) <= 0.2 * det_steps);
}
