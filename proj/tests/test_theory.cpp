#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "surgesim/theory.hpp"

using namespace surge;

namespace {

TheoryParams params(double D0, double d0, double lambda, double mu, double k,
                    int horizon = 0) {
  TheoryParams p{lambda, mu, D0, d0, k,
                 horizon > 0 ? horizon : TheoryParams::default_horizon(D0, d0, lambda, mu),
                 1e-9};
  return p;
}

const TheoryParams kFig2 = params(1000, 200, 30, 50, 0.005, 65);
const TheoryParams kFig3 = params(1000, 200, 30, 50, 0.001, 65);
const TheoryParams kFig4 = params(1000, 300, 30, 50, 0.05, 65);

// Randomized valid parameter draws for the property suite. k is capped at
// mu/D0 so the move fraction never clamps at 1.
struct ParamGen {
  std::mt19937_64 rng{20240817};

  TheoryParams next() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double d0_s = std::pow(10.0, 1.0 + 4.0 * unit(rng));  // [10, 1e5]
    const double d0_ns = d0_s * unit(rng);
    const double excess = 1.0 + 99.0 * unit(rng);
    const double lambda = 100.0 * unit(rng);
    const double mu = lambda + excess;
    const double k = unit(rng) * mu / d0_s;
    return params(d0_s, d0_ns, lambda, mu, k);
  }
};

}  // namespace

TEST_CASE("validate names the violated rule") {
  CHECK_THROWS_WITH_AS(params(1000, 200, 30, 30, 0.005).validate(),
                       "TheoryParams: requires lambda < mu", std::invalid_argument);
  CHECK_THROWS_AS(params(100, 200, 30, 50, 0.005).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(1000, -1, 30, 50, 0.005).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(1000, 200, 30, 50, -0.1).validate(), std::invalid_argument);
  CHECK_NOTHROW(kFig2.validate());
}

TEST_CASE("move_fraction") {
  CHECK(move_fraction(-100.0, kFig2) == 0.0);
  CHECK(move_fraction(800.0, kFig2) == 0.08);
  CHECK(move_fraction(1e9, kFig2) == 1.0);

  // non-decreasing in the differential
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-2000.0, 2000.0);
  for (int i = 0; i < 200; ++i) {
    double a = d(rng), b = d(rng);
    if (a > b) std::swap(a, b);
    CHECK(move_fraction(a, kFig2) <= move_fraction(b, kFig2));
  }
}

TEST_CASE("step hand-computed examples") {
  const DemandState zero{0, 0.0, 0.0};
  const DemandState after_zero = step(zero, params(0, 0, 30, 50, 0.005));
  CHECK(after_zero.d_s == 0.0);
  CHECK(after_zero.d_ns == 0.0);
  CHECK(after_zero.t == 1);

  const DemandState s1 = step(DemandState{0, 1000.0, 200.0}, kFig2);
  CHECK(s1.d_s == 900.0);   // phi = 0.08 * 1000
  CHECK(s1.d_ns == 260.0);

  const DemandState s2 = step(DemandState{0, 1000.0, 300.0}, kFig4);
  CHECK(s2.d_s == 280.0);   // phi = 0.7 * 1000
  CHECK(s2.d_ns == 980.0);
}

TEST_CASE("simulate reproduces the deterministic reference runs") {
  const Trajectory fig2 = simulate(kFig2);
  REQUIRE(fig2.converged);
  CHECK(fig2.states.front() == DemandState{0, 1000.0, 200.0});
  CHECK(fig2.states[1] == DemandState{1, 900.0, 260.0});
  CHECK(convergence_times(fig2) == ConvergenceTimes{32, 29});
  CHECK(clearing_steps(fig2) == ClearingSteps{33, 30});
  CHECK(peak_time(fig2) == 6);

  const Trajectory fig3 = simulate(kFig3);
  REQUIRE(fig3.converged);
  CHECK(convergence_times(fig3) == ConvergenceTimes{41, 19});
  CHECK(clearing_steps(fig3) == ClearingSteps{41, 20});
  CHECK(peak_time(fig3) == 0);

  const Trajectory fig4 = simulate(kFig4);
  REQUIRE(fig4.converged);
  CHECK(convergence_times(fig4) == ConvergenceTimes{15, 50});
  CHECK(clearing_steps(fig4) == ClearingSteps{16, 51});
  CHECK(peak_time(fig4) == 1);
}

TEST_CASE("simulate: all-zero boundary is absorbing") {
  const Trajectory traj = simulate(params(0, 0, 30, 50, 0.005));
  REQUIRE(traj.converged);
  CHECK(traj.states.size() == 1);
  CHECK(convergence_times(traj) == ConvergenceTimes{0, 0});
  CHECK(peak_time(traj) == 0);
  CHECK(!detect_inversion(traj));
}

TEST_CASE("convergence_times rejects non-converged trajectories") {
  TheoryParams p = kFig2;
  p.horizon = 5;
  const Trajectory traj = simulate(p);
  CHECK(!traj.converged);
  CHECK_THROWS_AS(convergence_times(traj), std::runtime_error);
  CHECK_THROWS_AS(clearing_steps(traj), std::runtime_error);
}

TEST_CASE("peak time equals the argmax of d_ns") {
  for (const TheoryParams& p : {kFig2, kFig4}) {
    const Trajectory traj = simulate(p);
    const int tau = peak_time(traj);
    const auto argmax = std::max_element(
        traj.states.begin(), traj.states.end(),
        [](const DemandState& a, const DemandState& b) { return a.d_ns < b.d_ns; });
    CHECK(traj.states[tau].d_ns == argmax->d_ns);
  }
}

TEST_CASE("tau_s_bounds") {
  CHECK(tau_s_bounds(kFig2) == IntBounds{8, 50});  // f(D0) = 0.1, floor(1000/120)
  CHECK(tau_s_bounds(params(0, 0, 30, 50, 0.005)) == IntBounds{0, 0});
  const IntBounds no_walk = tau_s_bounds(params(1000, 200, 30, 50, 0.0));
  CHECK(no_walk == IntBounds{50, 50});
}

TEST_CASE("tau_n_bounds") {
  CHECK(tau_n_bounds(kFig2) == IntBounds{10, 60});
  CHECK(tau_n_bounds(params(0, 0, 30, 50, 0.005)) == IntBounds{0, 0});
  const Trajectory fig2 = simulate(kFig2);
  const ConvergenceTimes times = convergence_times(fig2);
  CHECK(tau_n_bounds(kFig2).contains(times.tau_n));
  CHECK(tau_n_bounds(kFig2).contains(clearing_steps(fig2).steps_n));
}

TEST_CASE("classify_surge") {
  CHECK(classify_surge(kFig2) == SurgeType::spill_over);  // 1000 * 0.08 = 80 > 20
  CHECK(classify_surge(kFig3) == SurgeType::localized);   // 1000 * 0.016 = 16 <= 20
  // exact boundary: D0 * f(D0 - d0) == mu - lambda stays localized
  const TheoryParams boundary = params(1000, 0, 30, 50, 0.001);
  CHECK(boundary.d0_surge * move_fraction(1000.0, boundary) == 20.0);
  CHECK(classify_surge(boundary) == SurgeType::localized);
}

TEST_CASE("detect_inversion") {
  const Trajectory fig4 = simulate(kFig4);
  REQUIRE(detect_inversion(fig4));
  CHECK(*detect_inversion(fig4) == 1);
  CHECK(!detect_inversion(simulate(kFig3)));

  // once inverted, the ordering persists until both demands are gone
  const int inv = *detect_inversion(fig4);
  for (const DemandState& s : fig4.states)
    if (s.t >= inv) CHECK((s.d_ns > s.d_s || s.d_ns <= fig4.params.tol));
}

TEST_CASE("k=0 reduction: independent linear drains") {
  const TheoryParams p = params(1000, 200, 30, 50, 0.0);
  const Trajectory traj = simulate(p);
  REQUIRE(traj.converged);
  const ConvergenceTimes times = convergence_times(traj);
  CHECK(times.tau_s == 50);  // ceil(D0 / (mu - lambda)) exactly
  CHECK(times.tau_n == 10);
  for (const DemandState& s : traj.states) {
    CHECK(s.d_s == std::max(0.0, 1000.0 - 20.0 * s.t));
    CHECK(s.d_ns == std::max(0.0, 200.0 - 20.0 * s.t));
  }
}

TEST_CASE("property suite over randomized valid parameters") {
  ParamGen gen;
  int spill_count = 0;
  for (int draw = 0; draw < 300; ++draw) {
    const TheoryParams p = gen.next();
    CAPTURE(p.d0_surge);
    CAPTURE(p.d0_nonsurge);
    CAPTURE(p.lambda);
    CAPTURE(p.mu);
    CAPTURE(p.k);
    const Trajectory traj = simulate(p);
    REQUIRE(traj.converged);
    const auto& st = traj.states;
    const int tau = peak_time(traj);
    const double excess = p.mu - p.lambda;

    // states are consecutively indexed from the boundary conditions
    CHECK(st.front().t == 0);
    for (std::size_t i = 1; i < st.size(); ++i) CHECK(st[i].t == st[i - 1].t + 1);
    // monotone surge demand, absorption at zero
    for (std::size_t i = 1; i < st.size(); ++i) {
      CHECK(st[i].d_s <= st[i - 1].d_s);
      if (st[i - 1].d_s == 0.0) CHECK(st[i].d_s == 0.0);
    }
    // single peak at the formula's tau; fp wobble bounded by tol
    for (std::size_t i = 1; i < st.size(); ++i) {
      if (st[i].t <= tau)
        CHECK(st[i].d_ns >= st[i - 1].d_ns);
      else
        CHECK(st[i].d_ns <= st[i - 1].d_ns + p.tol);
    }
    // bound containment
    const ConvergenceTimes times = convergence_times(traj);
    CHECK(tau_s_bounds(p).contains(times.tau_s));
    CHECK(tau_n_bounds(p).contains(times.tau_n));
    // total demand clears within the guaranteed window, losing 2*(mu-lambda)
    // per step while both zones are busy
    const double clearing_bound =
        std::ceil((p.d0_surge + p.d0_nonsurge) / excess);
    CHECK(st.back().t <= clearing_bound);
    for (std::size_t i = 1; i < st.size(); ++i) {
      if (st[i].d_s > 0.0 && st[i].d_ns > 0.0) {
        const double before = st[i - 1].d_s + st[i - 1].d_ns;
        const double after = st[i].d_s + st[i].d_ns;
        CHECK(std::abs(before - after - 2.0 * excess) <=
              1e-9 * std::max(1.0, before));
      }
    }
    // classifier equivalence (Claim 3.5 as an executable statement)
    const bool localized = classify_surge(p) == SurgeType::localized;
    CHECK(localized == (tau == 0));
    if (!localized) ++spill_count;
  }
  CHECK(spill_count > 20);  // the draw covers both regimes
}
