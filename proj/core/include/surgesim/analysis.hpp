#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surgesim/market.hpp"
#include "surgesim/theory.hpp"

namespace surge {

// ---------------------------------------------------------------------------
// Theorem-bound audit

// Observed convergence/peak/inversion/type of a converged trajectory next to
// the theoretical windows. Throws on non-converged input.
BoundsReport audit_bounds(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Fitting the fluid model's k to an agent-market run

struct FitResult {
  double k_star = 0.0;
  double objective = 0.0;
  std::vector<std::pair<double, double>> grid;  // evaluated (k, objective)

  bool operator==(const FitResult&) const = default;
};

// Least squares between the fluid trajectories at candidate k and the given
// demand curves, both zero-padded to the common horizon. Uniform grid first,
// then golden-section refinement around the grid minimum.
FitResult fit_k_curves(const std::vector<double>& d_s, const std::vector<double>& d_ns,
                       const TheoryParams& base, std::pair<double, double> k_range,
                       int grid_size);

// Convenience wrapper over a market run's recorded demand curves.
// Throws std::runtime_error when the run did not converge.
FitResult fit_k(const MarketRun& run, const TheoryParams& base,
                std::pair<double, double> k_range, int grid_size);

// ---------------------------------------------------------------------------
// Strategic-vs-benchmark price-gap comparison

// Average of delta_p over steps 1..N (the t = 0 snapshot carries no gap).
double mean_delta_p(const MarketRun& run);

// 100 * (sa - nsb) / nsb, with the identical-run case pinned to zero.
double rel_diff_pct(double sa_mean, double nsb_mean);

// One paired run per seed over a fixed horizon; returns the per-seed relative
// difference of time-averaged price gaps.
std::vector<double> paired_rel_diffs(const AgentParams& strategic,
                                     const AgentParams& benchmark, int horizon,
                                     const std::vector<std::uint64_t>& seeds);

struct HeatmapCell {
  double d_mean = 0.0;
  double d_std = 0.0;
  double rel_diff_pct = 0.0;        // mean over paired seeds
  double worst_rel_diff_pct = 0.0;  // least-negative seed

  bool operator==(const HeatmapCell&) const = default;
};

struct HeatmapSpec {
  AgentParams base;                 // strategic flag ignored; both variants run
  std::vector<double> d_mean_grid;
  std::vector<double> d_std_grid;
  int horizon = 500;
  int pair_seeds = 5;
};

struct HeatmapResult {
  std::vector<double> d_mean_grid;
  std::vector<double> d_std_grid;
  std::vector<HeatmapCell> cells;  // row-major over (d_mean, d_std)

  const HeatmapCell& at(std::size_t mean_idx, std::size_t std_idx) const {
    return cells[mean_idx * d_std_grid.size() + std_idx];
  }
};

HeatmapResult heatmap(const HeatmapSpec& spec);

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepField {
  lambda,
  mu,
  d0_surge,
  d0_nonsurge,
  k,
  cost_mean,
  cost_std,
  wtp_mean,
  wtp_std,
};

std::optional<SweepField> sweep_field_from_name(const std::string& name);
const char* to_string(SweepField field);

struct TheorySweepRow {
  double value = 0.0;
  std::optional<BoundsReport> report;     // absent when this cell failed
  std::optional<ClearingSteps> clearing;
  std::string error;
};

// Deterministic, ordered; invalid instantiations are reported per cell and the
// sweep continues.
std::vector<TheorySweepRow> sweep_theory(const TheoryParams& base, SweepField field,
                                         const std::vector<double>& values);

struct AgentSweepRow {
  double value = 0.0;
  double mean_convergence_t = 0.0;
  double mean_delta_p = 0.0;
  bool all_converged = false;
  std::string error;
};

std::vector<AgentSweepRow> sweep_agent(const AgentParams& base, SweepField field,
                                       const std::vector<double>& values,
                                       int seeds_per_value);

}  // namespace surge
