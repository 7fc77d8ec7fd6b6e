#pragma once

// Multi-start Adam over the domain box with a fixed ν block, a random scan of
// start candidates, and re-ranking of the best candidates under a larger ν
// block. Optimization runs in unit-box coordinates.

#include "rmes/acquisition.hpp"
#include "rmes/domain.hpp"
#include "rmes/gp_core.hpp"
#include "rmes/nu_block.hpp"

#include <Eigen/Dense>

namespace rmes {

[[nodiscard]] NuBlock draw_nu_block(int count, Rng& rng);

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  int step_count = 0;
  double step_size = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState start(int dim, double step_size = 0.05);
  void validate() const;
};

struct AdamStep {
  AdamState state;
  Eigen::VectorXd x;
  /// False when the gradient was non-finite; state and x are then unchanged.
  bool accepted = true;
};

/// One bias-corrected Adam ascent step.
[[nodiscard]] AdamStep adam_step(const AdamState& state, const Eigen::VectorXd& x, const Eigen::VectorXd& gradient);

struct OptimConfig {
  int restarts = 10;
  int steps = 150;
  int nu_samples = 64;
  int rerank_nu_samples = 10000;
  /// Number of top screened candidates re-evaluated under the re-ranking block.
  int rerank_candidates = 16;
  int scan_points = 1000;
  double step_size = 0.05;
  double finite_difference_step = 1e-6;

  void validate() const;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;           // under the re-ranking block
  double best_scan_value = 0.0;  // re-ranked value of the best screened scan point
};

[[nodiscard]] OptimResult optimize_acquisition_detailed(const Acquisition& acq, const Domain& domain,
                                                        const OptimConfig& config, Rng& rng);
[[nodiscard]] Eigen::VectorXd optimize_acquisition(const Acquisition& acq, const Domain& domain,
                                                   const OptimConfig& config, Rng& rng);

/// Gradient of the fixed-ν objective. Throws NumericError if it is not finite.
[[nodiscard]] Eigen::VectorXd gradient_of(const Acquisition& acq, const Eigen::VectorXd& x, const NuBlock& nu);

/// Deterministic multi-start ascent on the posterior mean. Training inputs are
/// always among the candidates.
[[nodiscard]] Eigen::VectorXd argmax_posterior_mean(const PosteriorModel& model, const Domain& domain,
                                                    const OptimConfig& config = {});

}  // namespace rmes
