#pragma once

// Independent reference computations used to validate the library: adaptive
// quadrature over densities, dense long-double linear algebra for GP
// regression, and finite differences.

#include "rmes/acquisition.hpp"
#include "rmes/gaussian_stats.hpp"
#include "rmes/gp_core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace rmes::conformance {

/// Adaptive Gauss-Kronrod integral of `f` over [a, b], split at `breaks`.
[[nodiscard]] double integrate(const std::function<double(double)>& f, double a, double b,
                               std::span<const double> breaks = {});

/// ∫ p(y | f*) dy by quadrature over the full support.
[[nodiscard]] double cond_density_mass(const RectifiedDensityParams& params);

/// E[w(y)] under y ~ N(μ, σ_+²), integrated in the standardized variable.
[[nodiscard]] double expected_weight(const RectifiedDensityParams& params);

/// ∫_{-∞}^{f*} TN(f; μ, σ_x², f*) N(y; f, σ_n²) df: the density of a truncated
/// Gaussian plus independent Gaussian noise.
[[nodiscard]] double convolution_density(const RectifiedDensityParams& params, double y);

/// -∫ p log p of an upper-truncated Gaussian.
[[nodiscard]] double trunc_gauss_entropy_quadrature(const UpperTruncatedGaussian& tg);

/// I(f*; y) for f* uniform over `max_values`, with p(y | f*) the rectified
/// density: H(mixture) minus the mean component entropy, all by quadrature.
[[nodiscard]] double mixture_mutual_information(double mean, double latent_variance, double noise_variance,
                                                std::span<const double> max_values);

/// GP posterior and log marginal likelihood from an explicit long-double
/// inverse of K + σ_n² I.
struct DenseGpOracle {
  DenseGpOracle(const Dataset& data, const KernelHyperparams& hyper);

  [[nodiscard]] double mean(const Eigen::VectorXd& x) const;
  [[nodiscard]] double latent_variance(const Eigen::VectorXd& x) const;
  [[nodiscard]] double log_marginal_likelihood() const;

 private:
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

  [[nodiscard]] VectorL cross(const Eigen::VectorXd& x) const;

  Dataset data_;
  KernelHyperparams hyper_;
  MatrixL inverse_;
  VectorL alpha_;
  long double log_det_ = 0.0L;
};

/// Central differences with per-coordinate step `step`.
[[nodiscard]] Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                                 const Eigen::VectorXd& x, const Eigen::VectorXd& step);

}  // namespace rmes::conformance
