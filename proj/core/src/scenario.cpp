#include "surgesim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "surgesim/version.hpp"

namespace surge {

using nlohmann::json;

const char* to_string(ScenarioModel model) {
  switch (model) {
    case ScenarioModel::theory: return "theory";
    case ScenarioModel::stochastic: return "stochastic";
    case ScenarioModel::agent: return "agent";
    case ScenarioModel::agent_nsb: return "agent_nsb";
  }
  return "?";
}

namespace {

std::optional<ScenarioModel> model_from_string(const std::string& name) {
  if (name == "theory") return ScenarioModel::theory;
  if (name == "stochastic") return ScenarioModel::stochastic;
  if (name == "agent") return ScenarioModel::agent;
  if (name == "agent_nsb") return ScenarioModel::agent_nsb;
  return std::nullopt;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int Scenario::effective_horizon() const {
  if (horizon > 0) return horizon;
  if (is_heatmap()) return 500;
  return TheoryParams::default_horizon(d0_surge, d0_nonsurge, lambda, mu);
}

TheoryParams Scenario::theory_params() const {
  return TheoryParams{lambda, mu, d0_surge, d0_nonsurge, k, effective_horizon(), tol};
}

StochasticParams Scenario::stochastic_params() const {
  return StochasticParams::make(theory_params(), demand_process, supply_process, seed);
}

AgentParams Scenario::agent_params() const {
  AgentParams p;
  p.lambda = lambda;
  p.mu = mu;
  p.d0_surge = std::llround(d0_surge);
  p.d0_nonsurge = std::llround(d0_nonsurge);
  p.horizon = effective_horizon();
  p.seed = seed;
  p.cost_dist = TruncatedNormalSpec{cost_mean, cost_std};
  p.wtp_dist = TruncatedNormalSpec{wtp_mean, wtp_std};
  p.pricing = PricingConfig{beta, base_price, cap};
  p.strategic = model != ScenarioModel::agent_nsb;
  return p;
}

ScenarioCommand infer_command(const Scenario& scenario) {
  if (scenario.is_sweep()) return ScenarioCommand::sweep;
  if (scenario.is_heatmap()) return ScenarioCommand::heatmap;
  if (scenario.is_fit()) return ScenarioCommand::fit;
  return ScenarioCommand::run;
}

// ---------------------------------------------------------------------------
// Strict scenario parsing

namespace {

class FieldReader {
 public:
  FieldReader(const json& doc, std::vector<std::string>& errors)
      : doc_(doc), errors_(errors) {}

  bool has(const char* key) const { return doc_.contains(key); }

  void number(const char* key, double& out, bool required = false) {
    if (!doc_.contains(key)) {
      if (required) errors_.push_back(std::string("missing required field \"") + key + "\"");
      return;
    }
    if (!doc_[key].is_number()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a number");
      return;
    }
    out = doc_[key].get<double>();
  }

  void integer(const char* key, int& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_number_integer()) {
      errors_.push_back(std::string("field \"") + key + "\" must be an integer");
      return;
    }
    out = doc_[key].get<int>();
  }

  void unsigned64(const char* key, std::uint64_t& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_number_unsigned() && !doc_[key].is_number_integer()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a nonnegative integer");
      return;
    }
    if (doc_[key].is_number_integer() && doc_[key].get<std::int64_t>() < 0) {
      errors_.push_back(std::string("field \"") + key + "\" must be a nonnegative integer");
      return;
    }
    out = doc_[key].get<std::uint64_t>();
  }

  void boolean(const char* key, std::optional<bool>& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_boolean()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a boolean");
      return;
    }
    out = doc_[key].get<bool>();
  }

  void string(const char* key, std::string& out, bool required = false) {
    if (!doc_.contains(key)) {
      if (required) errors_.push_back(std::string("missing required field \"") + key + "\"");
      return;
    }
    if (!doc_[key].is_string()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a string");
      return;
    }
    out = doc_[key].get<std::string>();
  }

  void number_array(const char* key, std::vector<double>& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_array()) {
      errors_.push_back(std::string("field \"") + key + "\" must be an array of numbers");
      return;
    }
    std::vector<double> parsed;
    for (const auto& item : doc_[key]) {
      if (!item.is_number()) {
        errors_.push_back(std::string("field \"") + key + "\" must be an array of numbers");
        return;
      }
      parsed.push_back(item.get<double>());
    }
    out = std::move(parsed);
  }

  void window(const char* key, std::optional<std::pair<double, double>>& out) {
    if (!doc_.contains(key)) return;
    const auto& value = doc_[key];
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
        !value[1].is_number()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a [lo, hi] pair");
      return;
    }
    const double lo = value[0].get<double>();
    const double hi = value[1].get<double>();
    if (lo > hi) {
      errors_.push_back(std::string("field \"") + key + "\" requires lo <= hi");
      return;
    }
    out = std::make_pair(lo, hi);
  }

  void opt_int(const char* key, std::optional<int>& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_number_integer()) {
      errors_.push_back(std::string("field \"") + key + "\" must be an integer");
      return;
    }
    out = doc_[key].get<int>();
  }

  void opt_number(const char* key, std::optional<double>& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_number()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a number");
      return;
    }
    out = doc_[key].get<double>();
  }

  void opt_string(const char* key, std::optional<std::string>& out) {
    if (!doc_.contains(key)) return;
    if (!doc_[key].is_string()) {
      errors_.push_back(std::string("field \"") + key + "\" must be a string");
      return;
    }
    out = doc_[key].get<std::string>();
  }

 private:
  const json& doc_;
  std::vector<std::string>& errors_;
};

const std::set<std::string> kExpectKeys = {
    "converged", "tau_s", "tau_n", "clear_steps_s", "clear_steps_n",
    "clear_steps_s_window", "clear_steps_n_window", "surge_type", "peak_t",
    "inversion_t", "no_inversion", "mean_clear_steps_s_window", "all_converge",
    "convergence_t_window", "mean_convergence_t_window", "k_star_window",
    "cell_d_mean", "cell_d_std", "cell_rel_diff_window", "all_cells_nonpositive",
    "improvement_strongest_at_low_d_mean", "surge_types", "tau_s_monotone",
    "tau_n_monotone", "mean_convergence_t_monotone", "convergence_t_spread_max_pct"};

void parse_expect(const json& doc, Expectations& expect,
                  std::vector<std::string>& errors) {
  if (!doc.is_object()) {
    errors.push_back("field \"expect\" must be an object");
    return;
  }
  for (const auto& [key, value] : doc.items()) {
    if (!kExpectKeys.count(key)) errors.push_back("unknown field \"expect." + key + "\"");
  }
  FieldReader r(doc, errors);
  r.boolean("converged", expect.converged);
  r.opt_int("tau_s", expect.tau_s);
  r.opt_int("tau_n", expect.tau_n);
  r.opt_int("clear_steps_s", expect.clear_steps_s);
  r.opt_int("clear_steps_n", expect.clear_steps_n);
  r.window("clear_steps_s_window", expect.clear_steps_s_window);
  r.window("clear_steps_n_window", expect.clear_steps_n_window);
  r.opt_string("surge_type", expect.surge_type);
  r.opt_int("peak_t", expect.peak_t);
  r.opt_int("inversion_t", expect.inversion_t);
  r.boolean("no_inversion", expect.no_inversion);
  r.window("mean_clear_steps_s_window", expect.mean_clear_steps_s_window);
  r.boolean("all_converge", expect.all_converge);
  r.window("convergence_t_window", expect.convergence_t_window);
  r.window("mean_convergence_t_window", expect.mean_convergence_t_window);
  r.window("k_star_window", expect.k_star_window);
  r.opt_number("cell_d_mean", expect.cell_d_mean);
  r.opt_number("cell_d_std", expect.cell_d_std);
  r.window("cell_rel_diff_window", expect.cell_rel_diff_window);
  r.boolean("all_cells_nonpositive", expect.all_cells_nonpositive);
  r.boolean("improvement_strongest_at_low_d_mean",
            expect.improvement_strongest_at_low_d_mean);
  if (doc.contains("surge_types")) {
    if (!doc["surge_types"].is_array()) {
      errors.push_back("field \"expect.surge_types\" must be an array of strings");
    } else {
      std::vector<std::string> types;
      for (const auto& item : doc["surge_types"]) {
        if (!item.is_string() || !surge_type_from_string(item.get<std::string>())) {
          errors.push_back(
              "field \"expect.surge_types\" entries must be \"localized\" or "
              "\"spill_over\"");
          types.clear();
          break;
        }
        types.push_back(item.get<std::string>());
      }
      if (!types.empty()) expect.surge_types = std::move(types);
    }
  }
  r.opt_string("tau_s_monotone", expect.tau_s_monotone);
  r.opt_string("tau_n_monotone", expect.tau_n_monotone);
  r.opt_string("mean_convergence_t_monotone", expect.mean_convergence_t_monotone);
  r.opt_number("convergence_t_spread_max_pct", expect.convergence_t_spread_max_pct);

  for (const auto* key :
       {&expect.tau_s_monotone, &expect.tau_n_monotone,
        &expect.mean_convergence_t_monotone}) {
    if (*key && **key != "increasing" && **key != "decreasing")
      errors.push_back("monotone expectations must be \"increasing\" or \"decreasing\"");
  }
  if (expect.surge_type && !surge_type_from_string(*expect.surge_type))
    errors.push_back(
        "field \"expect.surge_type\" must be \"localized\" or \"spill_over\"");
}

std::set<std::string> allowed_keys(ScenarioModel model) {
  std::set<std::string> keys = {"name", "model", "D0", "d0", "lambda", "mu", "expect"};
  switch (model) {
    case ScenarioModel::theory:
      keys.insert({"k", "T", "tol", "vary", "values"});
      break;
    case ScenarioModel::stochastic:
      keys.insert({"k", "T", "tol", "seed", "seed_count", "demand_process",
                   "supply_process"});
      break;
    case ScenarioModel::agent:
    case ScenarioModel::agent_nsb:
      keys.insert({"T", "seed", "seed_count", "D_mean", "D_std", "wtp_mean", "wtp_std",
                   "beta", "base_price", "cap", "vary", "values", "k_min", "k_max",
                   "k_grid", "D_mean_grid", "D_std_grid", "pair_seeds"});
      break;
  }
  return keys;
}

}  // namespace

ParseOutcome parse_scenario(const std::string& text) {
  ParseOutcome outcome;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    outcome.errors.push_back(std::string("invalid JSON: ") + e.what());
    return outcome;
  }
  if (!doc.is_object()) {
    outcome.errors.push_back("scenario must be a JSON object");
    return outcome;
  }

  auto& errors = outcome.errors;
  Scenario s;

  std::string model_name;
  FieldReader top(doc, errors);
  top.string("model", model_name, /*required=*/true);
  const auto model = model_from_string(model_name);
  if (!model_name.empty() && !model) {
    errors.push_back("field \"model\" must be one of theory|stochastic|agent|agent_nsb");
  }
  if (!model) return outcome;
  s.model = *model;

  const std::set<std::string> allowed = allowed_keys(s.model);
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) errors.push_back("unknown field \"" + key + "\"");
  }

  top.string("name", s.name, /*required=*/true);
  top.number("D0", s.d0_surge, /*required=*/true);
  top.number("d0", s.d0_nonsurge, /*required=*/true);
  top.number("lambda", s.lambda, /*required=*/true);
  top.number("mu", s.mu, /*required=*/true);

  if (s.model == ScenarioModel::theory || s.model == ScenarioModel::stochastic) {
    top.number("k", s.k, /*required=*/true);
    top.number("tol", s.tol);
  }
  top.integer("T", s.horizon);
  if (doc.contains("T") && s.horizon < 1)
    errors.push_back("field \"T\": requires horizon >= 1");

  if (s.model != ScenarioModel::theory) {
    top.unsigned64("seed", s.seed);
    top.integer("seed_count", s.seed_count);
    if (s.seed_count < 1) errors.push_back("field \"seed_count\": requires >= 1");
  }

  if (s.model == ScenarioModel::stochastic) {
    for (auto [key, slot] : {std::pair{"demand_process", &s.demand_process},
                             std::pair{"supply_process", &s.supply_process}}) {
      std::string kind_name;
      top.string(key, kind_name);
      if (!kind_name.empty()) {
        const auto kind = arrival_kind_from_string(kind_name);
        if (!kind)
          errors.push_back(std::string("field \"") + key +
                           "\" must be \"poisson\" or \"deterministic\"");
        else
          *slot = *kind;
      }
    }
  }

  if (s.model == ScenarioModel::agent || s.model == ScenarioModel::agent_nsb) {
    top.number("D_mean", s.cost_mean, /*required=*/true);
    top.number("D_std", s.cost_std, /*required=*/true);
    top.number("wtp_mean", s.wtp_mean, /*required=*/true);
    top.number("wtp_std", s.wtp_std, /*required=*/true);
    top.number("beta", s.beta);
    top.number("base_price", s.base_price);
    top.number("cap", s.cap);

    top.number("k_min", s.k_min);
    top.number("k_max", s.k_max);
    top.integer("k_grid", s.k_grid);
    if (doc.contains("k_min") != doc.contains("k_max")) {
      errors.push_back("fit scenarios require both \"k_min\" and \"k_max\"");
    } else if (doc.contains("k_max")) {
      if (!(s.k_min >= 0.0) || !(s.k_max > s.k_min))
        errors.push_back("fit range: requires 0 <= k_min < k_max");
      if (s.k_grid < 2) errors.push_back("field \"k_grid\": requires >= 2");
    }

    top.number_array("D_mean_grid", s.d_mean_grid);
    top.number_array("D_std_grid", s.d_std_grid);
    top.integer("pair_seeds", s.pair_seeds);
    if (doc.contains("D_mean_grid") != doc.contains("D_std_grid")) {
      errors.push_back(
          "heatmap scenarios require both \"D_mean_grid\" and \"D_std_grid\"");
    } else if (doc.contains("D_mean_grid")) {
      if (s.d_mean_grid.empty() || s.d_std_grid.empty())
        errors.push_back("heatmap grids must be non-empty");
      if (s.pair_seeds < 1) errors.push_back("field \"pair_seeds\": requires >= 1");
    }
  }

  if (doc.contains("vary") || doc.contains("values")) {
    top.string("vary", s.vary);
    top.number_array("values", s.values);
    if (s.vary.empty() || s.values.empty()) {
      errors.push_back("sweep scenarios require both \"vary\" and non-empty \"values\"");
    } else {
      const auto field = sweep_field_from_name(s.vary);
      if (!field) {
        errors.push_back("field \"vary\": unknown parameter \"" + s.vary + "\"");
      } else if (s.model == ScenarioModel::theory) {
        static const std::set<SweepField> theory_fields = {
            SweepField::lambda, SweepField::mu, SweepField::d0_surge,
            SweepField::d0_nonsurge, SweepField::k};
        if (!theory_fields.count(*field))
          errors.push_back("field \"vary\": \"" + s.vary +
                           "\" does not apply to the theory model");
      } else {
        if (*field == SweepField::k)
          errors.push_back("field \"vary\": \"k\" does not apply to the agent model");
      }
    }
  }

  if (doc.contains("expect")) parse_expect(doc["expect"], s.expect, errors);

  // module-level invariants, with the violated rule named
  if (errors.empty()) {
    try {
      switch (s.model) {
        case ScenarioModel::theory:
          s.theory_params().validate();
          break;
        case ScenarioModel::stochastic:
          s.stochastic_params().validate();
          break;
        case ScenarioModel::agent:
        case ScenarioModel::agent_nsb:
          s.agent_params().validate();
          break;
      }
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }

  if (!errors.empty()) return outcome;
  outcome.scenario = std::move(s);
  return outcome;
}

ParseOutcome load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseOutcome outcome;
    outcome.errors.push_back("cannot open scenario file: " + path);
    return outcome;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

// ---------------------------------------------------------------------------
// Running scenarios

namespace {

ArtifactRow row_from_state(const DemandState& s) {
  ArtifactRow row;
  row.t = s.t;
  row.d_s = s.d_s;
  row.d_ns = s.d_ns;
  return row;
}

ArtifactRow row_from_record(const MarketStepRecord& rec) {
  ArtifactRow row;
  row.t = rec.t;
  row.d_s = static_cast<double>(rec.d_s);
  row.d_ns = static_cast<double>(rec.d_ns);
  row.p_s = rec.p_s;
  row.p_ns = rec.p_ns;
  row.delta_p = rec.delta_p;
  row.moved = rec.moved;
  row.matched_s = rec.matched_s;
  row.matched_ns = rec.matched_ns;
  row.r_s = rec.r_s;
  row.r_ns = rec.r_ns;
  return row;
}

void fill_trajectory(RunArtifact& artifact, const Trajectory& traj) {
  artifact.rows.reserve(traj.states.size());
  for (const DemandState& s : traj.states) artifact.rows.push_back(row_from_state(s));
  artifact.converged = traj.converged;
  if (traj.converged) {
    artifact.bounds = audit_bounds(traj);
    artifact.clearing = clearing_steps(traj);
  }
}

}  // namespace

RunArtifact run_scenario(const Scenario& scenario) {
  RunArtifact artifact;
  artifact.scenario = scenario;
  artifact.meta.version = kVersion;
  artifact.meta.seed = scenario.seed;
  artifact.meta.timestamp = utc_timestamp();

  switch (scenario.model) {
    case ScenarioModel::theory: {
      fill_trajectory(artifact, simulate(scenario.theory_params()));
      break;
    }
    case ScenarioModel::stochastic: {
      MultiSeedSummary multi;
      multi.runs = scenario.seed_count;
      double steps_s = 0.0;
      double steps_n = 0.0;
      for (int i = 0; i < scenario.seed_count; ++i) {
        StochasticParams params = scenario.stochastic_params();
        params.seed = scenario.seed + static_cast<std::uint64_t>(i);
        const Trajectory traj = simulate_stochastic(params);
        if (i == 0) fill_trajectory(artifact, traj);
        if (traj.converged) {
          ++multi.converged_runs;
          const ClearingSteps steps = clearing_steps(traj);
          steps_s += steps.steps_s;
          steps_n += steps.steps_n;
        }
      }
      if (multi.converged_runs > 0) {
        multi.mean_clear_steps_s = steps_s / multi.converged_runs;
        multi.mean_clear_steps_n = steps_n / multi.converged_runs;
      }
      if (scenario.seed_count > 1) artifact.multi = multi;
      break;
    }
    case ScenarioModel::agent:
    case ScenarioModel::agent_nsb: {
      MultiSeedSummary multi;
      multi.runs = scenario.seed_count;
      double total_t = 0.0;
      for (int i = 0; i < scenario.seed_count; ++i) {
        AgentParams params = scenario.agent_params();
        params.seed = scenario.seed + static_cast<std::uint64_t>(i);
        const MarketRun run = simulate_market(params);
        if (i == 0) {
          artifact.rows.reserve(run.records.size());
          for (const MarketStepRecord& rec : run.records)
            artifact.rows.push_back(row_from_record(rec));
          artifact.converged = run.converged;
          if (run.converged) artifact.convergence_t = run.convergence_t;
        }
        if (run.converged) {
          ++multi.converged_runs;
          total_t += run.convergence_t;
        }
      }
      if (multi.converged_runs > 0)
        multi.mean_convergence_t = total_t / multi.converged_runs;
      if (scenario.seed_count > 1) artifact.multi = multi;
      break;
    }
  }
  return artifact;
}

// ---------------------------------------------------------------------------
// Emission

std::string emit_csv(const RunArtifact& artifact) {
  std::string out =
      "t,d_s,d_ns,p_s,p_ns,delta_p,moved,matched_s,matched_ns,r_s,r_ns\n";
  const auto opt_d = [](const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string();
  };
  const auto opt_i = [](const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  for (const ArtifactRow& row : artifact.rows) {
    out += std::to_string(row.t);
    out += ',';
    out += fmt_double(row.d_s);
    out += ',';
    out += fmt_double(row.d_ns);
    out += ',';
    out += opt_d(row.p_s);
    out += ',';
    out += opt_d(row.p_ns);
    out += ',';
    out += opt_d(row.delta_p);
    out += ',';
    out += opt_i(row.moved);
    out += ',';
    out += opt_i(row.matched_s);
    out += ',';
    out += opt_i(row.matched_ns);
    out += ',';
    out += opt_i(row.r_s);
    out += ',';
    out += opt_i(row.r_ns);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

void put_window(json& j, const char* key,
                const std::optional<std::pair<double, double>>& value) {
  if (value) j[key] = json::array({value->first, value->second});
}

json expect_to_json(const Expectations& e) {
  json j = json::object();
  put_opt(j, "converged", e.converged);
  put_opt(j, "tau_s", e.tau_s);
  put_opt(j, "tau_n", e.tau_n);
  put_opt(j, "clear_steps_s", e.clear_steps_s);
  put_opt(j, "clear_steps_n", e.clear_steps_n);
  put_window(j, "clear_steps_s_window", e.clear_steps_s_window);
  put_window(j, "clear_steps_n_window", e.clear_steps_n_window);
  put_opt(j, "surge_type", e.surge_type);
  put_opt(j, "peak_t", e.peak_t);
  put_opt(j, "inversion_t", e.inversion_t);
  put_opt(j, "no_inversion", e.no_inversion);
  put_window(j, "mean_clear_steps_s_window", e.mean_clear_steps_s_window);
  put_opt(j, "all_converge", e.all_converge);
  put_window(j, "convergence_t_window", e.convergence_t_window);
  put_window(j, "mean_convergence_t_window", e.mean_convergence_t_window);
  put_window(j, "k_star_window", e.k_star_window);
  put_opt(j, "cell_d_mean", e.cell_d_mean);
  put_opt(j, "cell_d_std", e.cell_d_std);
  put_window(j, "cell_rel_diff_window", e.cell_rel_diff_window);
  put_opt(j, "all_cells_nonpositive", e.all_cells_nonpositive);
  put_opt(j, "improvement_strongest_at_low_d_mean",
          e.improvement_strongest_at_low_d_mean);
  put_opt(j, "surge_types", e.surge_types);
  put_opt(j, "tau_s_monotone", e.tau_s_monotone);
  put_opt(j, "tau_n_monotone", e.tau_n_monotone);
  put_opt(j, "mean_convergence_t_monotone", e.mean_convergence_t_monotone);
  put_opt(j, "convergence_t_spread_max_pct", e.convergence_t_spread_max_pct);
  return j;
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

void read_window(const json& j, const char* key,
                 std::optional<std::pair<double, double>>& out) {
  if (j.contains(key))
    out = std::make_pair(j[key][0].get<double>(), j[key][1].get<double>());
}

Expectations expect_from_json(const json& j) {
  Expectations e;
  read_opt(j, "converged", e.converged);
  read_opt(j, "tau_s", e.tau_s);
  read_opt(j, "tau_n", e.tau_n);
  read_opt(j, "clear_steps_s", e.clear_steps_s);
  read_opt(j, "clear_steps_n", e.clear_steps_n);
  read_window(j, "clear_steps_s_window", e.clear_steps_s_window);
  read_window(j, "clear_steps_n_window", e.clear_steps_n_window);
  read_opt(j, "surge_type", e.surge_type);
  read_opt(j, "peak_t", e.peak_t);
  read_opt(j, "inversion_t", e.inversion_t);
  read_opt(j, "no_inversion", e.no_inversion);
  read_window(j, "mean_clear_steps_s_window", e.mean_clear_steps_s_window);
  read_opt(j, "all_converge", e.all_converge);
  read_window(j, "convergence_t_window", e.convergence_t_window);
  read_window(j, "mean_convergence_t_window", e.mean_convergence_t_window);
  read_window(j, "k_star_window", e.k_star_window);
  read_opt(j, "cell_d_mean", e.cell_d_mean);
  read_opt(j, "cell_d_std", e.cell_d_std);
  read_window(j, "cell_rel_diff_window", e.cell_rel_diff_window);
  read_opt(j, "all_cells_nonpositive", e.all_cells_nonpositive);
  read_opt(j, "improvement_strongest_at_low_d_mean",
           e.improvement_strongest_at_low_d_mean);
  read_opt(j, "surge_types", e.surge_types);
  read_opt(j, "tau_s_monotone", e.tau_s_monotone);
  read_opt(j, "tau_n_monotone", e.tau_n_monotone);
  read_opt(j, "mean_convergence_t_monotone", e.mean_convergence_t_monotone);
  read_opt(j, "convergence_t_spread_max_pct", e.convergence_t_spread_max_pct);
  return e;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["model"] = to_string(s.model);
  j["D0"] = s.d0_surge;
  j["d0"] = s.d0_nonsurge;
  j["lambda"] = s.lambda;
  j["mu"] = s.mu;
  j["k"] = s.k;
  j["T"] = s.horizon;
  j["tol"] = s.tol;
  j["seed"] = s.seed;
  j["seed_count"] = s.seed_count;
  j["demand_process"] = to_string(s.demand_process);
  j["supply_process"] = to_string(s.supply_process);
  j["D_mean"] = s.cost_mean;
  j["D_std"] = s.cost_std;
  j["wtp_mean"] = s.wtp_mean;
  j["wtp_std"] = s.wtp_std;
  j["beta"] = s.beta;
  j["base_price"] = s.base_price;
  j["cap"] = s.cap;
  if (!s.vary.empty()) {
    j["vary"] = s.vary;
    j["values"] = s.values;
  }
  if (s.is_fit()) {
    j["k_min"] = s.k_min;
    j["k_max"] = s.k_max;
    j["k_grid"] = s.k_grid;
  }
  if (s.is_heatmap()) {
    j["D_mean_grid"] = s.d_mean_grid;
    j["D_std_grid"] = s.d_std_grid;
    j["pair_seeds"] = s.pair_seeds;
  }
  const json expect = expect_to_json(s.expect);
  if (!expect.empty()) j["expect"] = expect;
  return j;
}

// Lenient reader for artifact round-trips; the strict parser is only for
// user-authored files.
Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = j.value("name", std::string());
  if (const auto model = model_from_string(j.value("model", std::string())))
    s.model = *model;
  s.d0_surge = j.value("D0", 0.0);
  s.d0_nonsurge = j.value("d0", 0.0);
  s.lambda = j.value("lambda", 0.0);
  s.mu = j.value("mu", 0.0);
  s.k = j.value("k", 0.0);
  s.horizon = j.value("T", 0);
  s.tol = j.value("tol", 1e-9);
  s.seed = j.value("seed", std::uint64_t{1});
  s.seed_count = j.value("seed_count", 1);
  if (const auto kind =
          arrival_kind_from_string(j.value("demand_process", std::string("poisson"))))
    s.demand_process = *kind;
  if (const auto kind =
          arrival_kind_from_string(j.value("supply_process", std::string("poisson"))))
    s.supply_process = *kind;
  s.cost_mean = j.value("D_mean", 8.0);
  s.cost_std = j.value("D_std", 8.0);
  s.wtp_mean = j.value("wtp_mean", 7.0);
  s.wtp_std = j.value("wtp_std", 2.0);
  s.beta = j.value("beta", 0.25);
  s.base_price = j.value("base_price", 1.0);
  s.cap = j.value("cap", 10.0);
  s.vary = j.value("vary", std::string());
  if (j.contains("values")) s.values = j["values"].get<std::vector<double>>();
  s.k_min = j.value("k_min", 0.0);
  s.k_max = j.value("k_max", 0.0);
  s.k_grid = j.value("k_grid", 60);
  if (j.contains("D_mean_grid"))
    s.d_mean_grid = j["D_mean_grid"].get<std::vector<double>>();
  if (j.contains("D_std_grid"))
    s.d_std_grid = j["D_std_grid"].get<std::vector<double>>();
  s.pair_seeds = j.value("pair_seeds", 5);
  if (j.contains("expect")) s.expect = expect_from_json(j["expect"]);
  return s;
}

json bounds_to_json(const BoundsReport& b) {
  json j;
  j["tau_s_bounds"] = json::array({b.tau_s_bounds.lower, b.tau_s_bounds.upper});
  j["tau_n_bounds"] = json::array({b.tau_n_bounds.lower, b.tau_n_bounds.upper});
  j["tau_s_observed"] = b.tau_s_observed;
  j["tau_n_observed"] = b.tau_n_observed;
  j["peak_tau_observed"] = b.peak_tau_observed;
  j["surge_type"] = to_string(b.surge_type);
  if (b.inversion_time) j["inversion_time"] = *b.inversion_time;
  j["within_bounds"] = b.within_bounds();
  return j;
}

BoundsReport bounds_from_json(const json& j) {
  BoundsReport b;
  b.tau_s_bounds = IntBounds{j["tau_s_bounds"][0].get<int>(),
                             j["tau_s_bounds"][1].get<int>()};
  b.tau_n_bounds = IntBounds{j["tau_n_bounds"][0].get<int>(),
                             j["tau_n_bounds"][1].get<int>()};
  b.tau_s_observed = j["tau_s_observed"].get<int>();
  b.tau_n_observed = j["tau_n_observed"].get<int>();
  b.peak_tau_observed = j["peak_tau_observed"].get<int>();
  if (const auto type = surge_type_from_string(j["surge_type"].get<std::string>()))
    b.surge_type = *type;
  if (j.contains("inversion_time")) b.inversion_time = j["inversion_time"].get<int>();
  return b;
}

json row_to_json(const ArtifactRow& row) {
  json j;
  j["t"] = row.t;
  j["d_s"] = row.d_s;
  j["d_ns"] = row.d_ns;
  put_opt(j, "p_s", row.p_s);
  put_opt(j, "p_ns", row.p_ns);
  put_opt(j, "delta_p", row.delta_p);
  put_opt(j, "moved", row.moved);
  put_opt(j, "matched_s", row.matched_s);
  put_opt(j, "matched_ns", row.matched_ns);
  put_opt(j, "r_s", row.r_s);
  put_opt(j, "r_ns", row.r_ns);
  return j;
}

ArtifactRow row_from_json(const json& j) {
  ArtifactRow row;
  row.t = j["t"].get<int>();
  row.d_s = j["d_s"].get<double>();
  row.d_ns = j["d_ns"].get<double>();
  read_opt(j, "p_s", row.p_s);
  read_opt(j, "p_ns", row.p_ns);
  read_opt(j, "delta_p", row.delta_p);
  read_opt(j, "moved", row.moved);
  read_opt(j, "matched_s", row.matched_s);
  read_opt(j, "matched_ns", row.matched_ns);
  read_opt(j, "r_s", row.r_s);
  read_opt(j, "r_ns", row.r_ns);
  return row;
}

}  // namespace

std::string emit_json(const RunArtifact& artifact) {
  json j;
  j["scenario"] = scenario_to_json(artifact.scenario);
  j["metadata"] = {{"tool", artifact.meta.tool},
                   {"version", artifact.meta.version},
                   {"seed", artifact.meta.seed},
                   {"timestamp", artifact.meta.timestamp}};
  j["converged"] = artifact.converged;
  put_opt(j, "convergence_t", artifact.convergence_t);
  if (artifact.bounds) j["bounds_report"] = bounds_to_json(*artifact.bounds);
  if (artifact.clearing)
    j["clearing_steps"] = {{"steps_s", artifact.clearing->steps_s},
                           {"steps_n", artifact.clearing->steps_n}};
  if (artifact.multi) {
    json m;
    m["runs"] = artifact.multi->runs;
    m["converged_runs"] = artifact.multi->converged_runs;
    put_opt(m, "mean_clear_steps_s", artifact.multi->mean_clear_steps_s);
    put_opt(m, "mean_clear_steps_n", artifact.multi->mean_clear_steps_n);
    put_opt(m, "mean_convergence_t", artifact.multi->mean_convergence_t);
    j["multi_seed"] = m;
  }
  json rows = json::array();
  for (const ArtifactRow& row : artifact.rows) rows.push_back(row_to_json(row));
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

RunArtifact artifact_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunArtifact artifact;
  artifact.scenario = scenario_from_json(j["scenario"]);
  const json& meta = j["metadata"];
  artifact.meta.tool = meta["tool"].get<std::string>();
  artifact.meta.version = meta["version"].get<std::string>();
  artifact.meta.seed = meta["seed"].get<std::uint64_t>();
  artifact.meta.timestamp = meta["timestamp"].get<std::string>();
  artifact.converged = j["converged"].get<bool>();
  read_opt(j, "convergence_t", artifact.convergence_t);
  if (j.contains("bounds_report")) artifact.bounds = bounds_from_json(j["bounds_report"]);
  if (j.contains("clearing_steps"))
    artifact.clearing = ClearingSteps{j["clearing_steps"]["steps_s"].get<int>(),
                                      j["clearing_steps"]["steps_n"].get<int>()};
  if (j.contains("multi_seed")) {
    const json& m = j["multi_seed"];
    MultiSeedSummary multi;
    multi.runs = m["runs"].get<int>();
    multi.converged_runs = m["converged_runs"].get<int>();
    read_opt(m, "mean_clear_steps_s", multi.mean_clear_steps_s);
    read_opt(m, "mean_clear_steps_n", multi.mean_clear_steps_n);
    read_opt(m, "mean_convergence_t", multi.mean_convergence_t);
    artifact.multi = multi;
  }
  for (const json& row : j["rows"]) artifact.rows.push_back(row_from_json(row));
  return artifact;
}

// ---------------------------------------------------------------------------
// Expectation checks

namespace {

template <typename T>
bool in_window(T value, const std::pair<double, double>& window) {
  return static_cast<double>(value) >= window.first &&
         static_cast<double>(value) <= window.second;
}

std::string window_str(const std::pair<double, double>& w) {
  return "[" + fmt_double(w.first) + ", " + fmt_double(w.second) + "]";
}

bool monotone_ok(const std::vector<double>& xs, const std::string& direction) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (direction == "increasing" && xs[i] < xs[i - 1]) return false;
    if (direction == "decreasing" && xs[i] > xs[i - 1]) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> check_expectations(const RunArtifact& artifact) {
  const Expectations& e = artifact.scenario.expect;
  std::vector<std::string> fails;
  const auto fail = [&](const std::string& msg) { fails.push_back(msg); };

  if (e.converged && artifact.converged != *e.converged)
    fail(std::string("expected converged=") + (*e.converged ? "true" : "false") +
         ", observed " + (artifact.converged ? "true" : "false"));

  const auto need_bounds = [&]() -> const BoundsReport* {
    if (!artifact.bounds) {
      fail("expectation needs a converged run with a bounds report");
      return nullptr;
    }
    return &*artifact.bounds;
  };
  if (e.tau_s) {
    if (const auto* b = need_bounds(); b && b->tau_s_observed != *e.tau_s)
      fail("expected tau_s=" + std::to_string(*e.tau_s) + ", observed " +
           std::to_string(b->tau_s_observed));
  }
  if (e.tau_n) {
    if (const auto* b = need_bounds(); b && b->tau_n_observed != *e.tau_n)
      fail("expected tau_n=" + std::to_string(*e.tau_n) + ", observed " +
           std::to_string(b->tau_n_observed));
  }
  if (e.clear_steps_s || e.clear_steps_n || e.clear_steps_s_window ||
      e.clear_steps_n_window) {
    if (!artifact.clearing) {
      fail("expectation needs a converged run with clearing steps");
    } else {
      const ClearingSteps& c = *artifact.clearing;
      if (e.clear_steps_s && c.steps_s != *e.clear_steps_s)
        fail("expected clear_steps_s=" + std::to_string(*e.clear_steps_s) +
             ", observed " + std::to_string(c.steps_s));
      if (e.clear_steps_n && c.steps_n != *e.clear_steps_n)
        fail("expected clear_steps_n=" + std::to_string(*e.clear_steps_n) +
             ", observed " + std::to_string(c.steps_n));
      if (e.clear_steps_s_window && !in_window(c.steps_s, *e.clear_steps_s_window))
        fail("expected clear_steps_s in " + window_str(*e.clear_steps_s_window) +
             ", observed " + std::to_string(c.steps_s));
      if (e.clear_steps_n_window && !in_window(c.steps_n, *e.clear_steps_n_window))
        fail("expected clear_steps_n in " + window_str(*e.clear_steps_n_window) +
             ", observed " + std::to_string(c.steps_n));
    }
  }
  if (e.surge_type) {
    if (const auto* b = need_bounds(); b && to_string(b->surge_type) != *e.surge_type)
      fail("expected surge_type=" + *e.surge_type + ", observed " +
           to_string(b->surge_type));
  }
  if (e.peak_t) {
    if (const auto* b = need_bounds(); b && b->peak_tau_observed != *e.peak_t)
      fail("expected peak_t=" + std::to_string(*e.peak_t) + ", observed " +
           std::to_string(b->peak_tau_observed));
  }
  if (e.inversion_t) {
    if (const auto* b = need_bounds()) {
      if (!b->inversion_time)
        fail("expected inversion at t=" + std::to_string(*e.inversion_t) +
             ", observed none");
      else if (*b->inversion_time != *e.inversion_t)
        fail("expected inversion at t=" + std::to_string(*e.inversion_t) +
             ", observed t=" + std::to_string(*b->inversion_time));
    }
  }
  if (e.no_inversion && *e.no_inversion) {
    if (const auto* b = need_bounds(); b && b->inversion_time)
      fail("expected no inversion, observed t=" + std::to_string(*b->inversion_time));
  }
  if (e.mean_clear_steps_s_window) {
    if (!artifact.multi || !artifact.multi->mean_clear_steps_s)
      fail("expectation needs a multi-seed run with clearing summaries");
    else if (!in_window(*artifact.multi->mean_clear_steps_s,
                        *e.mean_clear_steps_s_window))
      fail("expected mean clear_steps_s in " +
           window_str(*e.mean_clear_steps_s_window) + ", observed " +
           fmt_double(*artifact.multi->mean_clear_steps_s));
  }
  if (e.all_converge && *e.all_converge) {
    const bool ok = artifact.multi
                        ? artifact.multi->converged_runs == artifact.multi->runs
                        : artifact.converged;
    if (!ok) fail("expected every seed to converge");
  }
  if (e.convergence_t_window) {
    if (!artifact.convergence_t)
      fail("expectation needs a converged market run");
    else if (!in_window(*artifact.convergence_t, *e.convergence_t_window))
      fail("expected convergence_t in " + window_str(*e.convergence_t_window) +
           ", observed " + std::to_string(*artifact.convergence_t));
  }
  if (e.mean_convergence_t_window) {
    if (!artifact.multi || !artifact.multi->mean_convergence_t)
      fail("expectation needs a multi-seed market run");
    else if (!in_window(*artifact.multi->mean_convergence_t,
                        *e.mean_convergence_t_window))
      fail("expected mean convergence_t in " +
           window_str(*e.mean_convergence_t_window) + ", observed " +
           fmt_double(*artifact.multi->mean_convergence_t));
  }
  return fails;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepReport run_sweep(const Scenario& scenario) {
  const auto field = sweep_field_from_name(scenario.vary);
  if (!field) throw std::invalid_argument("sweep: unknown parameter " + scenario.vary);
  SweepReport report;
  report.scenario = scenario;
  if (scenario.model == ScenarioModel::theory) {
    report.theory_rows = sweep_theory(scenario.theory_params(), *field, scenario.values);
  } else if (scenario.model == ScenarioModel::agent ||
             scenario.model == ScenarioModel::agent_nsb) {
    report.agent_rows = sweep_agent(scenario.agent_params(), *field, scenario.values,
                                    scenario.seed_count);
  } else {
    throw std::invalid_argument("sweep: supports theory and agent scenarios");
  }
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out;
  if (!report.theory_rows.empty() || report.scenario.model == ScenarioModel::theory) {
    out =
        "value,tau_s,tau_n,clear_steps_s,clear_steps_n,peak_t,surge_type,"
        "inversion_t,tau_s_lower,tau_s_upper,tau_n_lower,tau_n_upper,error\n";
    for (const TheorySweepRow& row : report.theory_rows) {
      out += fmt_double(row.value);
      if (row.report) {
        const BoundsReport& b = *row.report;
        out += ',' + std::to_string(b.tau_s_observed);
        out += ',' + std::to_string(b.tau_n_observed);
        out += ',' + std::to_string(row.clearing ? row.clearing->steps_s : 0);
        out += ',' + std::to_string(row.clearing ? row.clearing->steps_n : 0);
        out += ',' + std::to_string(b.peak_tau_observed);
        out += std::string(",") + to_string(b.surge_type);
        out += ',';
        if (b.inversion_time) out += std::to_string(*b.inversion_time);
        out += ',' + std::to_string(b.tau_s_bounds.lower);
        out += ',' + std::to_string(b.tau_s_bounds.upper);
        out += ',' + std::to_string(b.tau_n_bounds.lower);
        out += ',' + std::to_string(b.tau_n_bounds.upper);
        out += ',';
      } else {
        out += ",,,,,,,,,,,," + row.error;
      }
      out += '\n';
    }
  } else {
    out = "value,mean_convergence_t,mean_delta_p,all_converged,error\n";
    for (const AgentSweepRow& row : report.agent_rows) {
      out += fmt_double(row.value);
      out += ',' + fmt_double(row.mean_convergence_t);
      out += ',' + fmt_double(row.mean_delta_p);
      out += std::string(",") + (row.all_converged ? "true" : "false");
      out += ',' + row.error;
      out += '\n';
    }
  }
  return out;
}

std::string sweep_json(const SweepReport& report) {
  json j;
  j["scenario"] = scenario_to_json(report.scenario);
  json rows = json::array();
  for (const TheorySweepRow& row : report.theory_rows) {
    json r;
    r["value"] = row.value;
    if (row.report) r["bounds_report"] = bounds_to_json(*row.report);
    if (row.clearing)
      r["clearing_steps"] = {{"steps_s", row.clearing->steps_s},
                             {"steps_n", row.clearing->steps_n}};
    if (!row.error.empty()) r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  for (const AgentSweepRow& row : report.agent_rows) {
    json r;
    r["value"] = row.value;
    r["mean_convergence_t"] = row.mean_convergence_t;
    r["mean_delta_p"] = row.mean_delta_p;
    r["all_converged"] = row.all_converged;
    if (!row.error.empty()) r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::vector<std::string> check_sweep_expectations(const SweepReport& report) {
  const Expectations& e = report.scenario.expect;
  std::vector<std::string> fails;

  for (const TheorySweepRow& row : report.theory_rows)
    if (!row.error.empty())
      fails.push_back("sweep value " + fmt_double(row.value) + ": " + row.error);
  for (const AgentSweepRow& row : report.agent_rows)
    if (!row.error.empty())
      fails.push_back("sweep value " + fmt_double(row.value) + ": " + row.error);
  if (!fails.empty()) return fails;

  if (e.surge_types) {
    if (e.surge_types->size() != report.theory_rows.size()) {
      fails.push_back("expected " + std::to_string(e.surge_types->size()) +
                      " surge types, sweep has " +
                      std::to_string(report.theory_rows.size()) + " rows");
    } else {
      for (std::size_t i = 0; i < report.theory_rows.size(); ++i) {
        const std::string observed =
            to_string(report.theory_rows[i].report->surge_type);
        if (observed != (*e.surge_types)[i])
          fails.push_back("value " + fmt_double(report.theory_rows[i].value) +
                          ": expected " + (*e.surge_types)[i] + ", observed " +
                          observed);
      }
    }
  }
  const auto theory_series = [&](auto getter) {
    std::vector<double> xs;
    for (const TheorySweepRow& row : report.theory_rows)
      xs.push_back(static_cast<double>(getter(*row.report)));
    return xs;
  };
  if (e.tau_s_monotone && !report.theory_rows.empty()) {
    if (!monotone_ok(theory_series([](const BoundsReport& b) { return b.tau_s_observed; }),
                     *e.tau_s_monotone))
      fails.push_back("tau_s is not " + *e.tau_s_monotone + " across the sweep");
  }
  if (e.tau_n_monotone && !report.theory_rows.empty()) {
    if (!monotone_ok(theory_series([](const BoundsReport& b) { return b.tau_n_observed; }),
                     *e.tau_n_monotone))
      fails.push_back("tau_n is not " + *e.tau_n_monotone + " across the sweep");
  }
  if (!report.agent_rows.empty()) {
    std::vector<double> taus;
    for (const AgentSweepRow& row : report.agent_rows) {
      if (!row.all_converged)
        fails.push_back("sweep value " + fmt_double(row.value) +
                        ": not every seed converged");
      taus.push_back(row.mean_convergence_t);
    }
    if (e.mean_convergence_t_monotone &&
        !monotone_ok(taus, *e.mean_convergence_t_monotone))
      fails.push_back("mean convergence_t is not " + *e.mean_convergence_t_monotone +
                      " across the sweep");
    if (e.convergence_t_spread_max_pct && !taus.empty()) {
      const auto [mn, mx] = std::minmax_element(taus.begin(), taus.end());
      const double mean = std::accumulate(taus.begin(), taus.end(), 0.0) /
                          static_cast<double>(taus.size());
      const double spread_pct = mean > 0.0 ? 100.0 * (*mx - *mn) / mean : 0.0;
      if (spread_pct > *e.convergence_t_spread_max_pct)
        fails.push_back("convergence_t spread " + fmt_double(spread_pct) +
                        "% exceeds " + fmt_double(*e.convergence_t_spread_max_pct) +
                        "%");
    }
  }
  return fails;
}

// ---------------------------------------------------------------------------
// Fit

FitReport run_fit(const Scenario& scenario) {
  if (!scenario.is_fit()) throw std::invalid_argument("fit: scenario has no k range");
  FitReport report;
  report.scenario = scenario;
  TheoryParams base = scenario.theory_params();
  base.k = 0.0;

  double total = 0.0;
  for (int i = 0; i < scenario.seed_count; ++i) {
    AgentParams params = scenario.agent_params();
    params.seed = scenario.seed + static_cast<std::uint64_t>(i);
    const MarketRun run = simulate_market(params);
    const FitResult fit =
        fit_k(run, base, {scenario.k_min, scenario.k_max}, scenario.k_grid);
    if (i == 0) report.first = fit;
    report.per_seed_k.push_back(fit.k_star);
    total += fit.k_star;
  }
  report.mean_k = total / static_cast<double>(scenario.seed_count);
  return report;
}

std::string fit_csv(const FitReport& report) {
  std::string out = "seed,k_star\n";
  for (std::size_t i = 0; i < report.per_seed_k.size(); ++i) {
    out += std::to_string(report.scenario.seed + i);
    out += ',' + fmt_double(report.per_seed_k[i]);
    out += '\n';
  }
  out += "mean," + fmt_double(report.mean_k) + '\n';
  return out;
}

std::string fit_json(const FitReport& report) {
  json j;
  j["scenario"] = scenario_to_json(report.scenario);
  j["per_seed_k"] = report.per_seed_k;
  j["mean_k"] = report.mean_k;
  j["k_star"] = report.first.k_star;
  j["objective"] = report.first.objective;
  json grid = json::array();
  for (const auto& [k, objective] : report.first.grid)
    grid.push_back(json::array({k, objective}));
  j["grid"] = std::move(grid);
  return j.dump(2) + "\n";
}

std::vector<std::string> check_fit_expectations(const FitReport& report) {
  const Expectations& e = report.scenario.expect;
  std::vector<std::string> fails;
  if (e.k_star_window && !in_window(report.mean_k, *e.k_star_window))
    fails.push_back("expected mean k* in " + window_str(*e.k_star_window) +
                    ", observed " + fmt_double(report.mean_k));
  return fails;
}

// ---------------------------------------------------------------------------
// Heatmap

HeatmapReport run_heatmap(const Scenario& scenario) {
  if (!scenario.is_heatmap())
    throw std::invalid_argument("heatmap: scenario has no grids");
  HeatmapSpec spec;
  spec.base = scenario.agent_params();
  spec.d_mean_grid = scenario.d_mean_grid;
  spec.d_std_grid = scenario.d_std_grid;
  spec.horizon = scenario.effective_horizon();
  spec.pair_seeds = scenario.pair_seeds;
  return HeatmapReport{scenario, heatmap(spec)};
}

std::string heatmap_csv(const HeatmapReport& report) {
  std::string out = "D_mean,D_std,rel_diff_pct,worst_rel_diff_pct\n";
  for (const HeatmapCell& cell : report.result.cells) {
    out += fmt_double(cell.d_mean);
    out += ',' + fmt_double(cell.d_std);
    out += ',' + fmt_double(cell.rel_diff_pct);
    out += ',' + fmt_double(cell.worst_rel_diff_pct);
    out += '\n';
  }
  return out;
}

std::string heatmap_json(const HeatmapReport& report) {
  json j;
  j["scenario"] = scenario_to_json(report.scenario);
  j["D_mean_grid"] = report.result.d_mean_grid;
  j["D_std_grid"] = report.result.d_std_grid;
  json cells = json::array();
  for (const HeatmapCell& cell : report.result.cells)
    cells.push_back({{"D_mean", cell.d_mean},
                     {"D_std", cell.d_std},
                     {"rel_diff_pct", cell.rel_diff_pct},
                     {"worst_rel_diff_pct", cell.worst_rel_diff_pct}});
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::vector<std::string> check_heatmap_expectations(const HeatmapReport& report) {
  const Expectations& e = report.scenario.expect;
  const HeatmapResult& result = report.result;
  std::vector<std::string> fails;

  if (e.cell_rel_diff_window) {
    if (!e.cell_d_mean || !e.cell_d_std) {
      fails.push_back("cell_rel_diff_window needs cell_d_mean and cell_d_std");
    } else {
      const HeatmapCell* found = nullptr;
      for (const HeatmapCell& cell : result.cells)
        if (cell.d_mean == *e.cell_d_mean && cell.d_std == *e.cell_d_std) found = &cell;
      if (!found)
        fails.push_back("no heatmap cell at (" + fmt_double(*e.cell_d_mean) + ", " +
                        fmt_double(*e.cell_d_std) + ")");
      else if (!in_window(found->rel_diff_pct, *e.cell_rel_diff_window))
        fails.push_back("expected cell rel diff in " +
                        window_str(*e.cell_rel_diff_window) + ", observed " +
                        fmt_double(found->rel_diff_pct));
    }
  }
  if (e.all_cells_nonpositive && *e.all_cells_nonpositive) {
    for (const HeatmapCell& cell : result.cells)
      if (cell.rel_diff_pct > 0.0)
        fails.push_back("cell (" + fmt_double(cell.d_mean) + ", " +
                        fmt_double(cell.d_std) + ") has positive rel diff " +
                        fmt_double(cell.rel_diff_pct));
  }
  if (e.improvement_strongest_at_low_d_mean && *e.improvement_strongest_at_low_d_mean) {
    // along the lowest D_std column, improvement magnitude shrinks as the cost
    // mean grows: rel_diff_pct is non-decreasing (toward zero) in D_mean
    const std::size_t std_idx = static_cast<std::size_t>(
        std::min_element(result.d_std_grid.begin(), result.d_std_grid.end()) -
        result.d_std_grid.begin());
    for (std::size_t i = 1; i < result.d_mean_grid.size(); ++i) {
      const double prev = result.at(i - 1, std_idx).rel_diff_pct;
      const double cur = result.at(i, std_idx).rel_diff_pct;
      if (cur < prev)
        fails.push_back("improvement ordering violated at D_mean=" +
                        fmt_double(result.d_mean_grid[i]) + " (D_std=" +
                        fmt_double(result.d_std_grid[std_idx]) + "): " +
                        fmt_double(cur) + " < " + fmt_double(prev));
    }
  }
  return fails;
}

}  // namespace surge
