#pragma once

// One-dimensional diagnostic scenarios in which MES and RMES, maximized over
// a 512-point grid, choose different queries.
//
//   over_exploration: small noise; MES prefers a point with larger σ_x.
//   over_exploitation: large noise and a long lengthscale; MES prefers a
//   point whose observation variance is dominated by σ_n².

#include "rmes/gp_core.hpp"
#include "rmes/max_value_sampler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rmes::bench {

struct MisconceptionScenario {
  std::string name;
  Eigen::VectorXd inputs;   // on [0, 1]
  Eigen::VectorXd outputs;
  KernelHyperparams hyper;
  int max_value_count = 5;
  std::uint64_t max_value_seed = 0;
  int nu_samples = 10000;
  std::uint64_t nu_seed = 0;
  int grid_points = 512;
};

struct ScenarioChoice {
  double x = 0.0;
  double value = 0.0;
  double mean = 0.0;
  double latent_stddev = 0.0;
  double observation_stddev = 0.0;
};

struct ScenarioOutcome {
  MaxValueSet max_values;
  ScenarioChoice mes;
  ScenarioChoice rmes;
};

[[nodiscard]] MisconceptionScenario over_exploration_scenario();
[[nodiscard]] MisconceptionScenario over_exploitation_scenario();

/// Fits the scenario model, samples its max values and returns the grid
/// argmax of MES and of RMES.
[[nodiscard]] ScenarioOutcome evaluate_scenario(const MisconceptionScenario& scenario);

}  // namespace rmes::bench
