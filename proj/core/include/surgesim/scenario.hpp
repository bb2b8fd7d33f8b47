#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surgesim/analysis.hpp"
#include "surgesim/market.hpp"
#include "surgesim/stochastic.hpp"
#include "surgesim/theory.hpp"

namespace surge {

enum class ScenarioModel { theory, stochastic, agent, agent_nsb };

const char* to_string(ScenarioModel model);

// Embedded acceptance numbers; every member is optional and only present
// members are checked. Windows are inclusive [lo, hi] pairs.
struct Expectations {
  std::optional<bool> converged;
  std::optional<int> tau_s;
  std::optional<int> tau_n;
  std::optional<int> clear_steps_s;
  std::optional<int> clear_steps_n;
  std::optional<std::pair<double, double>> clear_steps_s_window;
  std::optional<std::pair<double, double>> clear_steps_n_window;
  std::optional<std::string> surge_type;
  std::optional<int> peak_t;
  std::optional<int> inversion_t;
  std::optional<bool> no_inversion;
  std::optional<std::pair<double, double>> mean_clear_steps_s_window;
  std::optional<bool> all_converge;
  std::optional<std::pair<double, double>> convergence_t_window;
  std::optional<std::pair<double, double>> mean_convergence_t_window;
  std::optional<std::pair<double, double>> k_star_window;
  std::optional<double> cell_d_mean;
  std::optional<double> cell_d_std;
  std::optional<std::pair<double, double>> cell_rel_diff_window;
  std::optional<bool> all_cells_nonpositive;
  std::optional<bool> improvement_strongest_at_low_d_mean;
  std::optional<std::vector<std::string>> surge_types;
  std::optional<std::string> tau_s_monotone;  // "increasing" | "decreasing"
  std::optional<std::string> tau_n_monotone;
  std::optional<std::string> mean_convergence_t_monotone;
  std::optional<double> convergence_t_spread_max_pct;

  bool operator==(const Expectations&) const = default;
};

// One scenario file: a flat key/value document whose field names mirror the
// model symbols (D0, d0, lambda, mu, k, T, ...) plus optional sweep/fit/
// heatmap sections and an optional "expect" block.
struct Scenario {
  std::string name;
  ScenarioModel model = ScenarioModel::theory;

  double d0_surge = 0.0;     // key "D0"
  double d0_nonsurge = 0.0;  // key "d0"
  double lambda = 0.0;
  double mu = 0.0;
  double k = 0.0;
  int horizon = 0;  // key "T"; 0 means "use the default horizon"
  double tol = 1e-9;

  std::uint64_t seed = 1;
  int seed_count = 1;
  ArrivalKind demand_process = ArrivalKind::poisson;
  ArrivalKind supply_process = ArrivalKind::poisson;

  double cost_mean = 8.0;  // key "D_mean"
  double cost_std = 8.0;   // key "D_std"
  double wtp_mean = 7.0;
  double wtp_std = 2.0;
  double beta = 0.25;
  double base_price = 1.0;
  double cap = 10.0;

  std::string vary;            // sweep parameter name
  std::vector<double> values;  // sweep values

  double k_min = 0.0;  // fit-k search range
  double k_max = 0.0;
  int k_grid = 60;

  std::vector<double> d_mean_grid;  // heatmap grids
  std::vector<double> d_std_grid;
  int pair_seeds = 5;

  Expectations expect;

  bool is_sweep() const { return !vary.empty(); }
  bool is_fit() const { return k_max > 0.0; }
  bool is_heatmap() const { return !d_mean_grid.empty(); }

  int effective_horizon() const;
  TheoryParams theory_params() const;
  StochasticParams stochastic_params() const;
  AgentParams agent_params() const;

  bool operator==(const Scenario&) const = default;
};

enum class ScenarioCommand { run, sweep, fit, heatmap };

ScenarioCommand infer_command(const Scenario& scenario);

struct ParseOutcome {
  std::optional<Scenario> scenario;
  std::vector<std::string> errors;

  bool ok() const { return scenario.has_value() && errors.empty(); }
};

// Strict parse: unknown fields are rejected, required fields per model are
// enforced, and every module invariant is checked with the violated rule named.
ParseOutcome parse_scenario(const std::string& text);
ParseOutcome load_scenario(const std::string& path);

// ---------------------------------------------------------------------------
// Run artifacts

struct ArtifactRow {
  int t = 0;
  double d_s = 0.0;
  double d_ns = 0.0;
  std::optional<double> p_s;
  std::optional<double> p_ns;
  std::optional<double> delta_p;
  std::optional<std::int64_t> moved;
  std::optional<std::int64_t> matched_s;
  std::optional<std::int64_t> matched_ns;
  std::optional<std::int64_t> r_s;
  std::optional<std::int64_t> r_ns;

  bool operator==(const ArtifactRow&) const = default;
};

struct MultiSeedSummary {
  int runs = 0;
  int converged_runs = 0;
  std::optional<double> mean_clear_steps_s;
  std::optional<double> mean_clear_steps_n;
  std::optional<double> mean_convergence_t;

  bool operator==(const MultiSeedSummary&) const = default;
};

struct RunMetadata {
  std::string tool = "surgesim";
  std::string version;
  std::uint64_t seed = 0;
  std::string timestamp;  // ISO 8601 UTC

  bool operator==(const RunMetadata&) const = default;
};

struct RunArtifact {
  Scenario scenario;
  std::vector<ArtifactRow> rows;  // sorted by t
  std::optional<BoundsReport> bounds;
  std::optional<ClearingSteps> clearing;
  bool converged = false;
  std::optional<int> convergence_t;
  std::optional<MultiSeedSummary> multi;
  RunMetadata meta;

  bool operator==(const RunArtifact&) const = default;
};

// Dispatches on scenario.model. With seed_count > 1 the artifact carries the
// first seed's rows plus a cross-seed summary; run seeds are seed, seed+1, ...
RunArtifact run_scenario(const Scenario& scenario);

// CSV columns, exactly: t,d_s,d_ns,p_s,p_ns,delta_p,moved,matched_s,
// matched_ns,r_s,r_ns. Price/match columns stay empty for theory-family runs.
// Floating values are printed with 17 significant digits.
std::string emit_csv(const RunArtifact& artifact);
std::string emit_json(const RunArtifact& artifact);
RunArtifact artifact_from_json(const std::string& text);

// Failure descriptions for every expectation the artifact misses; empty means
// the scenario passes.
std::vector<std::string> check_expectations(const RunArtifact& artifact);

// ---------------------------------------------------------------------------
// Sweep / fit / heatmap reports

struct SweepReport {
  Scenario scenario;
  std::vector<TheorySweepRow> theory_rows;
  std::vector<AgentSweepRow> agent_rows;
};

SweepReport run_sweep(const Scenario& scenario);
std::string sweep_csv(const SweepReport& report);
std::string sweep_json(const SweepReport& report);
std::vector<std::string> check_sweep_expectations(const SweepReport& report);

struct FitReport {
  Scenario scenario;
  std::vector<double> per_seed_k;
  double mean_k = 0.0;
  FitResult first;  // full grid of the first seed
};

FitReport run_fit(const Scenario& scenario);
std::string fit_csv(const FitReport& report);
std::string fit_json(const FitReport& report);
std::vector<std::string> check_fit_expectations(const FitReport& report);

struct HeatmapReport {
  Scenario scenario;
  HeatmapResult result;
};

HeatmapReport run_heatmap(const Scenario& scenario);
std::string heatmap_csv(const HeatmapReport& report);
std::string heatmap_json(const HeatmapReport& report);
std::vector<std::string> check_heatmap_expectations(const HeatmapReport& report);

}  // namespace surge
