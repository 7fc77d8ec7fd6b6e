#include "rmes/bench/config.hpp"
#include "rmes/bench/results.hpp"
#include "rmes/conformance/checks.hpp"
#include "rmes/errors.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

int run_command(const std::string& config_path, const std::string& output_override, const std::string& summary_path,
                int threads) {
  rmes::bench::RunConfig config = rmes::bench::load_run_config(config_path);
  if (!output_override.empty()) config.output = output_override;
  if (threads > 0) config.bench.threads = threads;

  const auto records = rmes::bench::run_bo_loop(config.bench);
  const int dim = config.bench.objective->domain().dim();
  rmes::bench::write_records_csv(config.output, records, dim);
  spdlog::info("wrote {} records to {}", records.size(), config.output);

  const auto failures = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed(); });
  if (!summary_path.empty()) {
    std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
    if (!out) throw rmes::InputError("cannot open summary file '" + summary_path + "'");
    const rmes::Domain& domain = config.bench.objective->domain();
    rmes::bench::write_summary_csv(out, rmes::bench::aggregate(records, 20, domain.width().norm()));
  }
  if (failures > 0) {
    spdlog::error("{} repetition(s) aborted; see failure rows in {}", failures, config.output);
    return 3;
  }
  return 0;
}

int check_command() {
  const auto results = rmes::conformance::run_conformance_suite(std::cout);
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  std::cout << (failed == 0 ? "all " + std::to_string(results.size()) + " checks passed"
                            : std::to_string(failed) + " of " + std::to_string(results.size()) + " checks failed")
            << '\n';
  return failed == 0 ? 0 : 1;
}

int truth_command(const std::string& objective) {
  std::shared_ptr<const rmes::bench::ObjectiveSpec> spec;
  if (std::filesystem::is_regular_file(objective)) {
    spec = rmes::bench::load_run_config(objective).bench.objective;
  } else {
    spec = rmes::bench::objective_by_name(objective);
  }
  const auto& truth = spec->truth();
  if (!truth.known()) {
    std::cout << spec->name() << ": ground truth unknown\n";
    return 1;
  }
  std::printf("objective %s\nmean_shift %.17g\nf_star %.17g\nx_star", spec->name().c_str(), spec->mean_shift(),
              truth.max_value);
  for (Eigen::Index i = 0; i < truth.maximizer.size(); ++i) std::printf(" %.17g", truth.maximizer[i]);
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization benchmarks with max-value entropy search acquisitions"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  std::string config_path;
  std::string output_override;
  std::string summary_path;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file and write a CSV");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output_override, "Override the output path from the config");
  run->add_option("--summary", summary_path, "Also write per-iteration regret summaries to this CSV");
  run->add_option("--threads", threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "Run the oracle conformance suite");

  std::string objective;
  auto* truth = app.add_subcommand("truth", "Print f* and x* of a benchmark objective");
  truth->add_option("objective", objective, "branin, eggholder, michalewicz2, gp_sample, or a config file")
      ->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%l] %v");

  try {
    if (*run) return run_command(config_path, output_override, summary_path, threads);
    if (*check) return check_command();
    if (*truth) return truth_command(objective);
  } catch (const rmes::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
