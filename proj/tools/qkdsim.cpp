// Command-line front end: run presets or config files, analyze receivers,
// compare saved reports.
//
// Exit status: 0 success, 2 the protocol aborted, 1 any error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qkdsim/analyzer.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/errors.hpp"
#include "qkdsim/report.hpp"
#include "qkdsim/scenarios.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kAborted = 2;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw qkdsim::ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

struct RunArgs {
  std::string preset;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> rounds;
  std::string out;
  bool check = false;
};

int do_run(const RunArgs& args) {
  using namespace qkdsim;
  if (args.preset.empty() == args.config_path.empty()) {
    throw UsageError("give exactly one of a preset name or --config");
  }
  RunConfig config;
  const Scenario* scenario = nullptr;
  if (!args.config_path.empty()) {
    config = load_config(args.config_path);
  } else {
    scenario = find_scenario(args.preset);
    if (!scenario) {
      throw UsageError(fmt::format("unknown preset '{}' (see list-presets)", args.preset));
    }
    config = scenario->config;
  }
  if (args.seed) config.seed = *args.seed;
  if (args.rounds) config.rounds = *args.rounds;

  const RunReport report = run(config);
  std::cout << report_table(report);
  const std::string json = report_json(report);
  if (args.out.empty()) {
    std::cout << "\n" << json;
  } else {
    write_file(args.out, json);
  }

  if (args.check) {
    if (!scenario || scenario->expected.empty()) {
      throw UsageError("--check needs a preset with an expected signature");
    }
    const SignatureCheck check = check_signature(scenario->expected, report);
    for (const std::string& f : check.failures) std::cerr << "signature mismatch: " << f << "\n";
    if (!check.passed) return kError;
    std::cout << "signature: ok\n";
  }
  return report.aborted ? kAborted : kOk;
}

struct AnalyzeArgs {
  std::string receiver = "blindable";
  bool no_probe = false;
  unsigned max_photons = qkdsim::kDefaultMaxPhotons;
  std::uint64_t verify_rounds = 20'000;
  std::uint64_t seed = 1;
  std::string out;
};

int do_analyze(const AnalyzeArgs& args) {
  using namespace qkdsim;
  const ReceiverPreset* preset = find_receiver_preset(args.receiver);
  if (!preset) {
    throw UsageError(fmt::format("unknown receiver preset '{}' (see list-presets)", args.receiver));
  }
  AnalysisOptions options;
  options.probe = !args.no_probe;
  options.max_photons = args.max_photons;
  options.verify_rounds = args.verify_rounds;
  options.seed = args.seed;
  const AnalysisReport report = analyze_receiver(preset->name, preset->config, options);
  std::cout << analysis_table(report);
  const std::string json = analysis_json(report);
  if (args.out.empty()) {
    std::cout << "\n" << json;
  } else {
    write_file(args.out, json);
  }
  return kOk;
}

int do_compare(const std::vector<std::string>& paths) {
  std::vector<qkdsim::NamedReport> reports;
  for (const std::string& p : paths) reports.push_back({p, qkdsim::load_report(p)});
  std::cout << qkdsim::compare_runs(reports);
  return kOk;
}

int do_list() {
  std::cout << "scenarios:\n";
  for (const qkdsim::Scenario& s : qkdsim::scenarios()) {
    std::cout << fmt::format("  {:<28} {}\n", s.name, s.description);
  }
  std::cout << "receivers:\n";
  for (const qkdsim::ReceiverPreset& r : qkdsim::receiver_presets()) {
    std::cout << fmt::format("  {:<28} {}\n", r.name, r.description);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization BB84 simulator with imperfect receivers and eavesdroppers"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a preset scenario or a config file");
  run->add_option("preset", run_args.preset, "scenario preset name");
  run->add_option("--config", run_args.config_path, "INI run configuration");
  run->add_option("--seed", run_args.seed, "override the seed");
  run->add_option("--rounds", run_args.rounds, "override the number of rounds");
  run->add_option("--out", run_args.out, "write the JSON report here");
  run->add_flag("--check", run_args.check, "compare against the preset's expected signature");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "probe a receiver and synthesize an attack");
  analyze->add_option("--receiver", analyze_args.receiver, "receiver preset")
      ->capture_default_str();
  analyze->add_flag("--no-probe", analyze_args.no_probe, "skip threshold probing");
  analyze->add_option("--max-photons", analyze_args.max_photons, "exact-regime photon bound")
      ->capture_default_str();
  analyze->add_option("--verify-rounds", analyze_args.verify_rounds,
                      "rounds for replaying the recipe (0 skips)")
      ->capture_default_str();
  analyze->add_option("--seed", analyze_args.seed, "seed for the replay")->capture_default_str();
  analyze->add_option("--out", analyze_args.out, "write the JSON report here");

  std::vector<std::string> compare_paths;
  auto* compare = app.add_subcommand("compare", "tabulate saved JSON reports side by side");
  compare->add_option("reports", compare_paths, "report files")->required();

  auto* list = app.add_subcommand("list-presets", "list scenario and receiver presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (run->parsed()) return do_run(run_args);
    if (analyze->parsed()) return do_analyze(analyze_args);
    if (compare->parsed()) return do_compare(compare_paths);
    if (list->parsed()) return do_list();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
