// Command-line front end: runs scenario files against the theory, stochastic
// and agent-market models and serializes the results.
//
// Exit codes: 0 success, 1 validation error, 2 expectation failure,
// 3 non-convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surgesim/scenario.hpp"
#include "surgesim/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitExpectation = 2;
constexpr int kExitNonConvergence = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

int write_output(const std::string& text, const GlobalOptions& opts) {
  if (opts.out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream file(opts.out, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot write " << opts.out << "\n";
    return kExitValidation;
  }
  file << text;
  return kExitOk;
}

std::optional<surge::Scenario> load(const std::string& path, const GlobalOptions& opts) {
  surge::ParseOutcome outcome = surge::load_scenario(path);
  if (!outcome.ok()) {
    std::cerr << "error: " << path << " failed validation:\n";
    for (const std::string& err : outcome.errors) std::cerr << "  - " << err << "\n";
    return std::nullopt;
  }
  surge::Scenario scenario = std::move(*outcome.scenario);
  if (opts.seed) scenario.seed = *opts.seed;
  return scenario;
}

int report_expectations(const std::vector<std::string>& fails) {
  if (fails.empty()) return kExitOk;
  std::cerr << "expectation failures:\n";
  for (const std::string& f : fails) std::cerr << "  - " << f << "\n";
  return kExitExpectation;
}

int cmd_run(const std::string& path, const GlobalOptions& opts) {
  const auto scenario = load(path, opts);
  if (!scenario) return kExitValidation;
  if (surge::infer_command(*scenario) != surge::ScenarioCommand::run) {
    std::cerr << "error: scenario has sweep/fit/heatmap sections; use the matching "
                 "subcommand\n";
    return kExitValidation;
  }
  const surge::RunArtifact artifact = surge::run_scenario(*scenario);

  std::cerr << "scenario " << scenario->name << ": "
            << (artifact.converged ? "converged" : "did not converge");
  if (artifact.bounds) {
    std::cerr << "; tau_s=" << artifact.bounds->tau_s_observed
              << " tau_n=" << artifact.bounds->tau_n_observed;
    if (artifact.clearing)
      std::cerr << " (clear steps " << artifact.clearing->steps_s << "/"
                << artifact.clearing->steps_n << ")";
    std::cerr << "; type " << surge::to_string(artifact.bounds->surge_type);
  }
  if (artifact.convergence_t) std::cerr << "; convergence_t=" << *artifact.convergence_t;
  std::cerr << "\n";

  const int write_rc = write_output(
      opts.format == "json" ? surge::emit_json(artifact) : surge::emit_csv(artifact),
      opts);
  if (write_rc != kExitOk) return write_rc;

  const int expect_rc = report_expectations(surge::check_expectations(artifact));
  if (!artifact.converged && scenario->expect.converged.value_or(true))
    return kExitNonConvergence;
  return expect_rc;
}

int cmd_sweep(const std::string& path, const GlobalOptions& opts) {
  const auto scenario = load(path, opts);
  if (!scenario) return kExitValidation;
  if (!scenario->is_sweep()) {
    std::cerr << "error: scenario has no \"vary\"/\"values\" section\n";
    return kExitValidation;
  }
  const surge::SweepReport report = surge::run_sweep(*scenario);
  const int write_rc = write_output(
      opts.format == "json" ? surge::sweep_json(report) : surge::sweep_csv(report),
      opts);
  if (write_rc != kExitOk) return write_rc;
  return report_expectations(surge::check_sweep_expectations(report));
}

int cmd_fit(const std::string& path, const GlobalOptions& opts) {
  const auto scenario = load(path, opts);
  if (!scenario) return kExitValidation;
  if (!scenario->is_fit()) {
    std::cerr << "error: scenario has no \"k_min\"/\"k_max\" section\n";
    return kExitValidation;
  }
  surge::FitReport report;
  try {
    report = surge::run_fit(*scenario);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  }
  std::cerr << "fit " << scenario->name << ": mean k* = " << report.mean_k << " over "
            << report.per_seed_k.size() << " seed(s)\n";
  const int write_rc = write_output(
      opts.format == "json" ? surge::fit_json(report) : surge::fit_csv(report), opts);
  if (write_rc != kExitOk) return write_rc;
  return report_expectations(surge::check_fit_expectations(report));
}

int cmd_heatmap(const std::string& path, const GlobalOptions& opts) {
  const auto scenario = load(path, opts);
  if (!scenario) return kExitValidation;
  if (!scenario->is_heatmap()) {
    std::cerr << "error: scenario has no heatmap grids\n";
    return kExitValidation;
  }
  const surge::HeatmapReport report = surge::run_heatmap(*scenario);
  const int write_rc = write_output(
      opts.format == "json" ? surge::heatmap_json(report) : surge::heatmap_csv(report),
      opts);
  if (write_rc != kExitOk) return write_rc;
  return report_expectations(surge::check_heatmap_expectations(report));
}

int cmd_audit(const std::string& path, const GlobalOptions& opts) {
  const auto scenario = load(path, opts);
  if (!scenario) return kExitValidation;
  if (scenario->model != surge::ScenarioModel::theory &&
      scenario->model != surge::ScenarioModel::stochastic) {
    std::cerr << "error: audit applies to theory and stochastic scenarios\n";
    return kExitValidation;
  }
  const surge::RunArtifact artifact = surge::run_scenario(*scenario);
  if (!artifact.converged || !artifact.bounds) {
    std::cerr << "error: run did not converge, nothing to audit\n";
    return kExitNonConvergence;
  }
  const surge::BoundsReport& b = *artifact.bounds;
  std::string text;
  text += "tau_s=" + std::to_string(b.tau_s_observed) + " in [" +
          std::to_string(b.tau_s_bounds.lower) + ", " +
          std::to_string(b.tau_s_bounds.upper) + "]: " +
          (b.tau_s_within() ? "ok" : "VIOLATION") + "\n";
  text += "tau_n=" + std::to_string(b.tau_n_observed) + " in [" +
          std::to_string(b.tau_n_bounds.lower) + ", " +
          std::to_string(b.tau_n_bounds.upper) + "]: " +
          (b.tau_n_within() ? "ok" : "VIOLATION") + "\n";
  text += "peak_t=" + std::to_string(b.peak_tau_observed) + "\n";
  text += std::string("surge_type=") + surge::to_string(b.surge_type) + "\n";
  text += "inversion_t=" +
          (b.inversion_time ? std::to_string(*b.inversion_time) : std::string("none")) +
          "\n";
  if (opts.format == "json") {
    const int rc = write_output(surge::emit_json(artifact), opts);
    if (rc != kExitOk) return rc;
  } else {
    const int rc = write_output(text, opts);
    if (rc != kExitOk) return rc;
  }
  const int expect_rc = report_expectations(surge::check_expectations(artifact));
  if (expect_rc != kExitOk) return expect_rc;
  return b.within_bounds() ? kExitOk : kExitExpectation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-zone surge dynamics simulator"};
  app.set_version_flag("--version", surge::kVersion);
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--seed", opts.seed, "override the scenario seed")
      ->expected(1);
  app.add_option("--out", opts.out, "write output to a file instead of stdout");
  app.add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.fallthrough();

  std::string path;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("file", path, "scenario file")->required();
    return sub;
  };
  CLI::App* run = add("run", "run one scenario and emit its trajectory");
  CLI::App* sweep = add("sweep", "run a parameter sweep scenario");
  CLI::App* fit = add("fit-k", "fit the fluid model's k to agent runs");
  CLI::App* heatmap = add("heatmap", "strategic-vs-benchmark price-gap heatmap");
  CLI::App* audit = add("audit", "report observed taus against the theoretical bounds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(path, opts);
    if (sweep->parsed()) return cmd_sweep(path, opts);
    if (fit->parsed()) return cmd_fit(path, opts);
    if (heatmap->parsed()) return cmd_heatmap(path, opts);
    if (audit->parsed()) return cmd_audit(path, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
