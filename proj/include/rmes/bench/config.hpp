#pragma once

// Flat `key = value` experiment files. Blank lines and `#` comments are
// ignored; list values are comma separated.
//
//   objective     branin | eggholder | michalewicz2 | gp_sample | dataset | external
//   lower, upper  domain bounds (required for external objectives)
//   acquisitions  subset of rmes, mes, ei, ucb
//   sigma_n, iterations, repetitions, init_points, max_value_count,
//   nu_samples, seed, output
//
// Further keys tune the objective (gp_seed, gp_lengthscale,
// gp_signal_variance, gp_dim, dataset, command, true_max, maximizer), the
// model (hyperparameters = mle | fixed, lengthscales, signal_variance,
// mle_starts), the optimizers (restarts, optimizer_steps, scan_points,
// rerank_nu_samples, rerank_candidates, feature_count, sampler_restarts,
// sampler_steps, ucb_beta) and the run (threads, record_wall_time).

#include "rmes/bench/bo_loop.hpp"

#include <cstddef>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace rmes::bench {

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
};

using ConfigMap = std::map<std::string, ConfigEntry, std::less<>>;

/// Syntax only: throws ParseError on malformed lines or repeated keys.
[[nodiscard]] ConfigMap parse_key_values(std::istream& in, const std::string& source);

struct RunConfig {
  BenchmarkConfig bench;
  std::string output = "results.csv";
};

/// Relative dataset paths resolve against `base_dir`. Throws ParseError
/// (with the line number) for unknown keys and malformed values.
[[nodiscard]] RunConfig parse_run_config(std::istream& in, const std::string& source,
                                         const std::string& base_dir = ".");
[[nodiscard]] RunConfig load_run_config(const std::string& path);

/// Builds the objective described by the objective-related keys.
[[nodiscard]] std::shared_ptr<const ObjectiveSpec> make_objective(const ConfigMap& entries, const std::string& source,
                                                                  const std::string& base_dir = ".");
/// branin, eggholder, michalewicz2 or gp_sample with default settings.
[[nodiscard]] std::shared_ptr<const ObjectiveSpec> objective_by_name(std::string_view name);

}  // namespace rmes::bench
