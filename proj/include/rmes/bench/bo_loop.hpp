#pragma once

// The benchmark protocol: per repetition, uniform random initial points, then
// T rounds of {choose a query with the acquisition, observe it with noise,
// refit the model}. Regrets against the objective's ground truth are recorded
// after every observation.

#include "rmes/acq_optimizer.hpp"
#include "rmes/acquisition.hpp"
#include "rmes/bench/objectives.hpp"
#include "rmes/gp_core.hpp"
#include "rmes/max_value_sampler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rmes::bench {

enum class HyperPolicy {
  /// Maximum likelihood after every observation, warm-started from the
  /// previous estimate; the noise variance stays at σ_n².
  mle_every_iteration,
  /// `fixed_hyperparams` throughout (noise variance still σ_n²).
  fixed,
};

struct BenchmarkConfig {
  std::shared_ptr<const ObjectiveSpec> objective;
  std::vector<AcquisitionKind> acquisitions{AcquisitionKind::rmes};
  double sigma_n = 0.01;
  int iterations = 50;
  int repetitions = 15;
  int init_points = 2;
  int max_value_count = 5;
  std::uint64_t seed = 0;
  HyperPolicy hyper_policy = HyperPolicy::mle_every_iteration;
  std::optional<KernelHyperparams> fixed_hyperparams;
  int mle_starts = 3;
  int mle_iterations = 100;
  double ucb_beta = 3.0;
  OptimConfig optimizer;
  MaxValueSamplerConfig sampler;
  /// Worker threads over (acquisition, repetition) pairs.
  int threads = 1;
  /// When false the wall_time_ms column is written as 0 so that output files
  /// are byte-identical across runs.
  bool record_wall_time = false;

  void validate() const;
};

struct RunRecord {
  AcquisitionKind acquisition = AcquisitionKind::rmes;
  int repetition = 0;
  /// 0 for initial points, 1..T for BO rounds.
  int iteration = 0;
  Eigen::VectorXd x;
  double y = 0.0;
  double simple_regret = 0.0;
  double inference_regret = 0.0;
  double distance_to_maximizer = 0.0;
  double wall_time_ms = 0.0;
  /// Non-empty when this row marks an aborted repetition.
  std::string failure;

  [[nodiscard]] bool failed() const noexcept { return !failure.empty(); }
};

/// f* minus the best noiseless value among the rows of `queried`.
[[nodiscard]] double simple_regret(const ObjectiveSpec& spec, const Eigen::MatrixXd& queried);
/// f* minus the noiseless value at the posterior-mean maximizer.
[[nodiscard]] double inference_regret(const ObjectiveSpec& spec, const PosteriorModel& model, const Domain& domain,
                                      const OptimConfig& config = {});

/// Records for one (acquisition, repetition) pair.
[[nodiscard]] std::vector<RunRecord> run_repetition(const BenchmarkConfig& config, AcquisitionKind kind,
                                                    int repetition);
/// All records, ordered by acquisition (config order), repetition, iteration.
[[nodiscard]] std::vector<RunRecord> run_bo_loop(const BenchmarkConfig& config);

}  // namespace rmes::bench
