#include "surgesim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace surge {

BoundsReport audit_bounds(const Trajectory& traj) {
  const ConvergenceTimes times = convergence_times(traj);
  BoundsReport report;
  report.tau_s_bounds = tau_s_bounds(traj.params);
  report.tau_n_bounds = tau_n_bounds(traj.params);
  report.tau_s_observed = times.tau_s;
  report.tau_n_observed = times.tau_n;
  report.peak_tau_observed = peak_time(traj);
  report.surge_type = classify_surge(traj.params);
  report.inversion_time = detect_inversion(traj);
  return report;
}

namespace {

double curve_objective(const std::vector<double>& d_s, const std::vector<double>& d_ns,
                       const TheoryParams& candidate) {
  const Trajectory traj = simulate(candidate);
  const std::size_t horizon =
      std::max(d_s.size(), traj.states.size());  // zero-pad both to the longer one
  double total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double model_s = t < traj.states.size() ? traj.states[t].d_s : 0.0;
    const double model_ns = t < traj.states.size() ? traj.states[t].d_ns : 0.0;
    const double data_s = t < d_s.size() ? d_s[t] : 0.0;
    const double data_ns = t < d_ns.size() ? d_ns[t] : 0.0;
    total += (model_s - data_s) * (model_s - data_s) +
             (model_ns - data_ns) * (model_ns - data_ns);
  }
  return total;
}

}  // namespace

FitResult fit_k_curves(const std::vector<double>& d_s, const std::vector<double>& d_ns,
                       const TheoryParams& base, std::pair<double, double> k_range,
                       int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("fit_k: requires grid_size >= 2");
  if (!(k_range.first >= 0.0) || !(k_range.second > k_range.first))
    throw std::invalid_argument("fit_k: requires 0 <= k_min < k_max");
  if (d_s.size() != d_ns.size() || d_s.empty())
    throw std::invalid_argument("fit_k: requires equally sized, non-empty curves");

  TheoryParams candidate = base;
  candidate.horizon = std::max<int>(base.horizon, static_cast<int>(d_s.size()));
  const auto objective_at = [&](double k) {
    candidate.k = k;
    return curve_objective(d_s, d_ns, candidate);
  };

  FitResult result;
  result.grid.reserve(static_cast<std::size_t>(grid_size));
  const double span = k_range.second - k_range.first;
  std::size_t best = 0;
  for (int i = 0; i < grid_size; ++i) {
    const double k = k_range.first + span * i / (grid_size - 1);
    result.grid.emplace_back(k, objective_at(k));
    if (result.grid[i].second < result.grid[best].second) best = i;
  }

  // golden-section refinement inside the winning cell's neighborhood
  double lo = result.grid[best == 0 ? 0 : best - 1].first;
  double hi = result.grid[std::min<std::size_t>(best + 1, result.grid.size() - 1)].first;
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = objective_at(x1);
  double f2 = objective_at(x2);
  for (int iter = 0; iter < 80 && hi - lo > 1e-12; ++iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = objective_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = objective_at(x2);
    }
  }
  const double k_star = 0.5 * (lo + hi);
  const double at_star = objective_at(k_star);
  if (at_star <= result.grid[best].second) {
    result.k_star = k_star;
    result.objective = at_star;
  } else {
    result.k_star = result.grid[best].first;
    result.objective = result.grid[best].second;
  }
  return result;
}

FitResult fit_k(const MarketRun& run, const TheoryParams& base,
                std::pair<double, double> k_range, int grid_size) {
  if (!run.converged)
    throw std::runtime_error("fit_k: market run did not converge; horizon too small");
  std::vector<double> d_s, d_ns;
  d_s.reserve(run.records.size());
  d_ns.reserve(run.records.size());
  for (const MarketStepRecord& rec : run.records) {
    d_s.push_back(static_cast<double>(rec.d_s));
    d_ns.push_back(static_cast<double>(rec.d_ns));
  }
  return fit_k_curves(d_s, d_ns, base, k_range, grid_size);
}

double mean_delta_p(const MarketRun& run) {
  if (run.records.size() <= 1) return 0.0;
  double total = 0.0;
  for (std::size_t i = 1; i < run.records.size(); ++i) total += run.records[i].delta_p;
  return total / static_cast<double>(run.records.size() - 1);
}

double rel_diff_pct(double sa_mean, double nsb_mean) {
  if (sa_mean == nsb_mean) return 0.0;
  return 100.0 * (sa_mean - nsb_mean) / nsb_mean;
}

std::vector<double> paired_rel_diffs(const AgentParams& strategic,
                                     const AgentParams& benchmark, int horizon,
                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<double> diffs;
  diffs.reserve(seeds.size());
  for (const std::uint64_t seed : seeds) {
    AgentParams sa = strategic;
    sa.horizon = horizon;
    sa.seed = seed;
    AgentParams nsb = benchmark;
    nsb.horizon = horizon;
    nsb.seed = seed;
    const MarketRun sa_run = simulate_market(sa, /*stop_when_cleared=*/false);
    const MarketRun nsb_run = simulate_market(nsb, /*stop_when_cleared=*/false);
    diffs.push_back(rel_diff_pct(mean_delta_p(sa_run), mean_delta_p(nsb_run)));
  }
  return diffs;
}

HeatmapResult heatmap(const HeatmapSpec& spec) {
  if (spec.d_mean_grid.empty() || spec.d_std_grid.empty())
    throw std::invalid_argument("heatmap: requires non-empty grids");
  if (spec.pair_seeds < 1)
    throw std::invalid_argument("heatmap: requires pair_seeds >= 1");

  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(spec.pair_seeds));
  for (int i = 0; i < spec.pair_seeds; ++i)
    seeds.push_back(spec.base.seed + static_cast<std::uint64_t>(i));

  HeatmapResult result{spec.d_mean_grid, spec.d_std_grid, {}};
  result.cells.reserve(spec.d_mean_grid.size() * spec.d_std_grid.size());
  for (const double mean : spec.d_mean_grid) {
    for (const double stddev : spec.d_std_grid) {
      AgentParams sa = spec.base;
      sa.cost_dist = TruncatedNormalSpec{mean, stddev};
      sa.strategic = true;
      AgentParams nsb = sa;
      nsb.strategic = false;
      const std::vector<double> diffs = paired_rel_diffs(sa, nsb, spec.horizon, seeds);
      HeatmapCell cell{mean, stddev, 0.0, diffs.front()};
      for (const double d : diffs) {
        cell.rel_diff_pct += d;
        cell.worst_rel_diff_pct = std::max(cell.worst_rel_diff_pct, d);
      }
      cell.rel_diff_pct /= static_cast<double>(diffs.size());
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::optional<SweepField> sweep_field_from_name(const std::string& name) {
  if (name == "lambda") return SweepField::lambda;
  if (name == "mu") return SweepField::mu;
  if (name == "D0") return SweepField::d0_surge;
  if (name == "d0") return SweepField::d0_nonsurge;
  if (name == "k") return SweepField::k;
  if (name == "D_mean") return SweepField::cost_mean;
  if (name == "D_std") return SweepField::cost_std;
  if (name == "wtp_mean") return SweepField::wtp_mean;
  if (name == "wtp_std") return SweepField::wtp_std;
  return std::nullopt;
}

const char* to_string(SweepField field) {
  switch (field) {
    case SweepField::lambda: return "lambda";
    case SweepField::mu: return "mu";
    case SweepField::d0_surge: return "D0";
    case SweepField::d0_nonsurge: return "d0";
    case SweepField::k: return "k";
    case SweepField::cost_mean: return "D_mean";
    case SweepField::cost_std: return "D_std";
    case SweepField::wtp_mean: return "wtp_mean";
    case SweepField::wtp_std: return "wtp_std";
  }
  return "?";
}

namespace {

void apply_field(TheoryParams& params, SweepField field, double value) {
  switch (field) {
    case SweepField::lambda: params.lambda = value; return;
    case SweepField::mu: params.mu = value; return;
    case SweepField::d0_surge: params.d0_surge = value; return;
    case SweepField::d0_nonsurge: params.d0_nonsurge = value; return;
    case SweepField::k: params.k = value; return;
    default:
      throw std::invalid_argument(std::string("sweep: field ") + to_string(field) +
                                  " does not apply to the theory model");
  }
}

void apply_field(AgentParams& params, SweepField field, double value) {
  switch (field) {
    case SweepField::lambda: params.lambda = value; return;
    case SweepField::mu: params.mu = value; return;
    case SweepField::d0_surge: params.d0_surge = std::llround(value); return;
    case SweepField::d0_nonsurge: params.d0_nonsurge = std::llround(value); return;
    case SweepField::cost_mean: params.cost_dist.mean = value; return;
    case SweepField::cost_std: params.cost_dist.stddev = value; return;
    case SweepField::wtp_mean: params.wtp_dist.mean = value; return;
    case SweepField::wtp_std: params.wtp_dist.stddev = value; return;
    default:
      throw std::invalid_argument(std::string("sweep: field ") + to_string(field) +
                                  " does not apply to the agent model");
  }
}

}  // namespace

std::vector<TheorySweepRow> sweep_theory(const TheoryParams& base, SweepField field,
                                         const std::vector<double>& values) {
  std::vector<TheorySweepRow> rows;
  rows.reserve(values.size());
  for (const double value : values) {
    TheorySweepRow row;
    row.value = value;
    try {
      TheoryParams params = base;
      apply_field(params, field, value);
      params.horizon = std::max(
          params.horizon, TheoryParams::default_horizon(params.d0_surge,
                                                        params.d0_nonsurge,
                                                        params.lambda, params.mu));
      const Trajectory traj = simulate(params);
      row.report = audit_bounds(traj);
      row.clearing = clearing_steps(traj);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AgentSweepRow> sweep_agent(const AgentParams& base, SweepField field,
                                       const std::vector<double>& values,
                                       int seeds_per_value) {
  if (seeds_per_value < 1)
    throw std::invalid_argument("sweep_agent: requires seeds_per_value >= 1");
  std::vector<AgentSweepRow> rows;
  rows.reserve(values.size());
  for (const double value : values) {
    AgentSweepRow row;
    row.value = value;
    try {
      AgentParams params = base;
      apply_field(params, field, value);
      params.validate();
      double total_t = 0.0;
      double total_gap = 0.0;
      bool all_converged = true;
      for (int i = 0; i < seeds_per_value; ++i) {
        params.seed = base.seed + static_cast<std::uint64_t>(i);
        const MarketRun run = simulate_market(params);
        all_converged = all_converged && run.converged;
        total_t += run.convergence_t;
        total_gap += mean_delta_p(run);
      }
      row.mean_convergence_t = total_t / seeds_per_value;
      row.mean_delta_p = total_gap / seeds_per_value;
      row.all_converged = all_converged;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace surge
