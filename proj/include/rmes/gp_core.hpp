#pragma once

// Exact Gaussian-process regression with a squared-exponential ARD kernel and
// zero prior mean. Inputs are rescaled to the unit box internally; every
// public quantity is in original units.

#include "rmes/domain.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace rmes {

struct KernelHyperparams {
  Eigen::VectorXd lengthscales;  // input units, one per dimension
  double signal_variance = 1.0;
  double noise_variance = 0.0;

  void validate(int dim) const;
};

/// σ_s² exp(-0.5 Σ ((x1_i - x2_i) / ℓ_i)²).
[[nodiscard]] double se_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const KernelHyperparams& hyper);

/// Predictive distribution at one input: f_x ~ N(mean, latent_variance) and
/// y_x ~ N(mean, observation_variance) with observation = latent + noise.
struct PredictiveStats {
  double mean = 0.0;
  double latent_variance = 0.0;
  double observation_variance = 0.0;

  [[nodiscard]] double latent_stddev() const;
  [[nodiscard]] double observation_stddev() const;
  [[nodiscard]] double noise_variance() const { return observation_variance - latent_variance; }

  static PredictiveStats from(double mean, double latent_variance, double noise_variance);
};

/// Input-space gradients of the predictive mean and latent variance.
struct PredictiveGradient {
  Eigen::VectorXd mean;
  Eigen::VectorXd latent_variance;
};

class PosteriorModel {
 public:
  [[nodiscard]] const Dataset& dataset() const noexcept { return dataset_; }
  [[nodiscard]] const Domain& domain() const noexcept { return dataset_.domain(); }
  [[nodiscard]] const KernelHyperparams& hyperparams() const noexcept { return hyper_; }
  [[nodiscard]] int dim() const noexcept { return dataset_.dim(); }

  /// Lower-triangular L with L Lᵀ = K + (σ_n² + jitter) I.
  [[nodiscard]] const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }
  /// (K + (σ_n² + jitter) I)^{-1} y.
  [[nodiscard]] const Eigen::VectorXd& dual_weights() const noexcept { return alpha_; }
  [[nodiscard]] double jitter() const noexcept { return jitter_; }

  [[nodiscard]] PredictiveStats predict(const Eigen::VectorXd& x) const;
  [[nodiscard]] PredictiveStats predict(const Eigen::VectorXd& x, PredictiveGradient& gradient) const;

  /// Posterior mean and its gradient only; skips the triangular solve.
  [[nodiscard]] double posterior_mean(const Eigen::VectorXd& x, Eigen::VectorXd* gradient = nullptr) const;

 private:
  friend PosteriorModel fit(const Dataset& dataset, const KernelHyperparams& hyper);

  PosteriorModel(Dataset dataset, KernelHyperparams hyper);

  Eigen::VectorXd cross_covariance(const Eigen::VectorXd& unit_x) const;

  Dataset dataset_;
  KernelHyperparams hyper_;
  Eigen::VectorXd unit_lengthscales_;
  Eigen::MatrixXd unit_inputs_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Condition the GP on `dataset`. An empty dataset yields the prior.
[[nodiscard]] PosteriorModel fit(const Dataset& dataset, const KernelHyperparams& hyper);

[[nodiscard]] double log_marginal_likelihood(const Dataset& dataset, const KernelHyperparams& hyper);

/// Log marginal likelihood and its gradient with respect to
/// (log ℓ_1..log ℓ_d, log σ_s², log σ_n²).
struct LikelihoodGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};
[[nodiscard]] LikelihoodGradient log_marginal_likelihood_gradient(const Dataset& dataset,
                                                                  const KernelHyperparams& hyper);

struct MleConfig {
  int starts = 8;
  int max_iterations = 120;
  /// Known noise variance; learned when empty.
  std::optional<double> fixed_noise_variance;
  /// Lengthscale box as a fraction of each domain width.
  double lengthscale_lower = 1e-3;
  double lengthscale_upper = 10.0;
  /// Signal-variance box, relative to the mean squared output.
  double signal_variance_lower = 1e-4;
  double signal_variance_upper = 1e2;
  std::uint64_t seed = 0;
};

/// Multi-start Rprop ascent on the log marginal likelihood in log-hyperparameter
/// space. The result never has a lower likelihood than `init`.
[[nodiscard]] KernelHyperparams mle_fit(const Dataset& dataset, const KernelHyperparams& init, const MleConfig& config);

}  // namespace rmes
