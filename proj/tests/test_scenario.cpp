#include <cstdlib>
#include <string>

#include "doctest.h"
#include "surgesim/scenario.hpp"

using namespace surge;

namespace {

const char* kFig2Json = R"({
  "name": "fig2",
  "model": "theory",
  "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005, "T": 65
})";

std::string agent_json(const char* extra = "") {
  return std::string(R"({
    "name": "agent",
    "model": "agent",
    "D0": 2000, "d0": 250, "lambda": 30, "mu": 45,
    "D_mean": 8, "D_std": 8, "wtp_mean": 7, "wtp_std": 2,
    "beta": 0.3, "seed": 1)") +
         extra + "\n}";
}

bool has_error(const ParseOutcome& outcome, const std::string& needle) {
  for (const std::string& err : outcome.errors)
    if (err.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("parse_scenario reads the reference file") {
  const ParseOutcome outcome = parse_scenario(kFig2Json);
  REQUIRE(outcome.ok());
  const Scenario& s = *outcome.scenario;
  CHECK(s.model == ScenarioModel::theory);
  CHECK(s.d0_surge == 1000.0);
  CHECK(s.d0_nonsurge == 200.0);
  CHECK(s.lambda == 30.0);
  CHECK(s.mu == 50.0);
  CHECK(s.k == 0.005);
  CHECK(s.horizon == 65);
  CHECK(infer_command(s) == ScenarioCommand::run);
}

TEST_CASE("parse errors name the rule or the field") {
  CHECK(has_error(parse_scenario(R"({"name":"x","model":"theory","D0":1000,
        "d0":200,"lambda":30,"mu":30,"k":0.005})"),
                  "requires lambda < mu"));
  CHECK(has_error(parse_scenario(R"({"name":"x","model":"theory","D0":1000,
        "d0":200,"lambda":30,"mu":50,"k":0.005,"kk":1})"),
                  "unknown field \"kk\""));
  CHECK(has_error(parse_scenario(R"({"name":"x","model":"theory","D0":1000,
        "d0":200,"lambda":30,"mu":50})"),
                  "missing required field \"k\""));
  CHECK(has_error(parse_scenario("{"), "invalid JSON"));
  CHECK(has_error(parse_scenario(R"({"name":"x","model":"nope"})"), "model"));
  // agent-only keys are rejected on theory scenarios
  CHECK(has_error(parse_scenario(R"({"name":"x","model":"theory","D0":1000,
        "d0":200,"lambda":30,"mu":50,"k":0.005,"beta":0.3})"),
                  "unknown field \"beta\""));
}

TEST_CASE("run_scenario on the reference file") {
  const ParseOutcome outcome = parse_scenario(kFig2Json);
  REQUIRE(outcome.ok());
  const RunArtifact artifact = run_scenario(*outcome.scenario);
  CHECK(artifact.converged);
  REQUIRE(artifact.bounds);
  CHECK(artifact.bounds->tau_s_observed == 32);
  CHECK(artifact.bounds->tau_n_observed == 29);
  REQUIRE(artifact.clearing);
  CHECK(artifact.clearing->steps_s == 33);
  CHECK(artifact.clearing->steps_n == 30);
  CHECK(artifact.rows.size() == 33);
  CHECK(artifact.rows[1].d_s == 900.0);
  CHECK(artifact.rows[1].d_ns == 260.0);
}

TEST_CASE("csv emission") {
  // all-zero theory run: header plus one empty-market row
  const ParseOutcome zero = parse_scenario(R"({
    "name": "zero", "model": "theory",
    "D0": 0, "d0": 0, "lambda": 30, "mu": 50, "k": 0.005, "T": 5
  })");
  REQUIRE(zero.ok());
  CHECK(emit_csv(run_scenario(*zero.scenario)) ==
        "t,d_s,d_ns,p_s,p_ns,delta_p,moved,matched_s,matched_ns,r_s,r_ns\n"
        "0,0,0,,,,,,,,\n");

  const ParseOutcome fig2 = parse_scenario(kFig2Json);
  REQUIRE(fig2.ok());
  const std::string csv = emit_csv(run_scenario(*fig2.scenario));
  CHECK(csv.find("\n1,900,260,,,,,,,,\n") != std::string::npos);
}

TEST_CASE("row sections are byte-identical across runs") {
  const ParseOutcome fig2 = parse_scenario(kFig2Json);
  REQUIRE(fig2.ok());
  CHECK(emit_csv(run_scenario(*fig2.scenario)) ==
        emit_csv(run_scenario(*fig2.scenario)));

  const ParseOutcome agent = parse_scenario(agent_json());
  REQUIRE(agent.ok());
  CHECK(emit_csv(run_scenario(*agent.scenario)) ==
        emit_csv(run_scenario(*agent.scenario)));
}

TEST_CASE("csv round-trips every value exactly") {
  // 17 significant digits reproduce the doubles bit for bit
  const ParseOutcome outcome = parse_scenario(kFig2Json);
  REQUIRE(outcome.ok());
  const RunArtifact artifact = run_scenario(*outcome.scenario);
  const std::string csv = emit_csv(artifact);

  std::size_t pos = csv.find('\n') + 1;  // skip the header
  for (const ArtifactRow& row : artifact.rows) {
    const std::size_t end = csv.find('\n', pos);
    REQUIRE(end != std::string::npos);
    const std::string line = csv.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    const std::size_t c3 = line.find(',', c2 + 1);
    CHECK(std::stoi(line.substr(0, c1)) == row.t);
    CHECK(std::strtod(line.c_str() + c1 + 1, nullptr) == row.d_s);
    CHECK(std::strtod(line.c_str() + c2 + 1, nullptr) == row.d_ns);
    (void)c3;
  }
  CHECK(pos == csv.size());
}

TEST_CASE("json round-trips the artifact exactly") {
  for (const std::string& text : {std::string(kFig2Json), agent_json()}) {
    const ParseOutcome outcome = parse_scenario(text);
    REQUIRE(outcome.ok());
    const RunArtifact artifact = run_scenario(*outcome.scenario);
    const RunArtifact back = artifact_from_json(emit_json(artifact));
    CHECK(back == artifact);
  }
}

TEST_CASE("expectations pass and fail") {
  const ParseOutcome good = parse_scenario(R"({
    "name": "fig2", "model": "theory",
    "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005, "T": 65,
    "expect": {"converged": true, "tau_s": 32, "clear_steps_s": 33,
               "surge_type": "spill_over", "peak_t": 6, "no_inversion": true}
  })");
  REQUIRE(good.ok());
  CHECK(check_expectations(run_scenario(*good.scenario)).empty());

  const ParseOutcome bad = parse_scenario(R"({
    "name": "fig2", "model": "theory",
    "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005, "T": 65,
    "expect": {"tau_s": 99, "surge_type": "localized"}
  })");
  REQUIRE(bad.ok());
  CHECK(check_expectations(run_scenario(*bad.scenario)).size() == 2);

  CHECK(has_error(parse_scenario(R"({
    "name": "fig2", "model": "theory",
    "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005,
    "expect": {"tau_z": 3}
  })"),
                  "unknown field \"expect.tau_z\""));
}

TEST_CASE("stochastic scenarios carry multi-seed summaries") {
  const ParseOutcome outcome = parse_scenario(R"({
    "name": "stoch", "model": "stochastic",
    "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005, "T": 600,
    "seed": 1, "seed_count": 5
  })");
  REQUIRE(outcome.ok());
  const RunArtifact artifact = run_scenario(*outcome.scenario);
  REQUIRE(artifact.multi);
  CHECK(artifact.multi->runs == 5);
  CHECK(artifact.multi->converged_runs == 5);
  REQUIRE(artifact.multi->mean_clear_steps_s);
  CHECK(*artifact.multi->mean_clear_steps_s > 20.0);
  const RunArtifact back = artifact_from_json(emit_json(artifact));
  CHECK(back == artifact);
}

TEST_CASE("agent_nsb model maps to a non-strategic run") {
  const ParseOutcome outcome = parse_scenario(R"({
    "name": "nsb", "model": "agent_nsb",
    "D0": 2000, "d0": 250, "lambda": 30, "mu": 45,
    "D_mean": 8, "D_std": 8, "wtp_mean": 7, "wtp_std": 2, "seed": 1
  })");
  REQUIRE(outcome.ok());
  CHECK(!outcome.scenario->agent_params().strategic);
  const RunArtifact artifact = run_scenario(*outcome.scenario);
  for (const ArtifactRow& row : artifact.rows)
    if (row.moved) CHECK(*row.moved == 0);
}

TEST_CASE("sweep, fit and heatmap sections are recognized and validated") {
  const ParseOutcome sweep = parse_scenario(R"({
    "name": "s", "model": "theory",
    "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005,
    "vary": "D0", "values": [300, 500]
  })");
  REQUIRE(sweep.ok());
  CHECK(infer_command(*sweep.scenario) == ScenarioCommand::sweep);
  const SweepReport report = run_sweep(*sweep.scenario);
  CHECK(report.theory_rows.size() == 2);
  CHECK(sweep_csv(report).find("localized") != std::string::npos);

  CHECK(has_error(parse_scenario(R"({
    "name": "s", "model": "theory",
    "D0": 1000, "d0": 200, "lambda": 30, "mu": 50, "k": 0.005,
    "vary": "whatever", "values": [1]
  })"),
                  "unknown parameter"));

  const ParseOutcome fit = parse_scenario(agent_json(
      R"(, "k_min": 0.001, "k_max": 0.005, "k_grid": 10)"));
  REQUIRE(fit.ok());
  CHECK(infer_command(*fit.scenario) == ScenarioCommand::fit);

  CHECK(has_error(
      parse_scenario(agent_json(R"(, "k_min": 0.005, "k_max": 0.001)")),
      "requires 0 <= k_min < k_max"));

  const ParseOutcome heat = parse_scenario(agent_json(
      R"(, "D_mean_grid": [5, 8], "D_std_grid": [5], "pair_seeds": 1, "T": 50)"));
  REQUIRE(heat.ok());
  CHECK(infer_command(*heat.scenario) == ScenarioCommand::heatmap);
  const HeatmapReport report2 = run_heatmap(*heat.scenario);
  CHECK(report2.result.cells.size() == 2);
}
