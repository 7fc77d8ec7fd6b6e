#pragma once

// Max-value samples f* obtained by maximizing approximate GP posterior draws.

#include "rmes/domain.hpp"
#include "rmes/gp_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rmes {

/// A random function f(x) = θᵀ φ(x) with φ_i(x) = sqrt(2σ_s²/m) cos(ω_iᵀ u + b_i),
/// u the unit-box image of x. Frequencies follow the SE spectral density and θ
/// is a draw from the weight posterior given the model's data.
class PosteriorFunctionSample {
 public:
  PosteriorFunctionSample(Domain domain, Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                          Eigen::VectorXd weights, double amplitude);

  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const;
  [[nodiscard]] double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& gradient) const;
  /// Values at each row of `points`.
  [[nodiscard]] Eigen::VectorXd values(const Eigen::MatrixXd& points) const;

  [[nodiscard]] int feature_count() const noexcept { return static_cast<int>(phases_.size()); }
  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }

 private:
  Domain domain_;
  Eigen::MatrixXd frequencies_;  // m x d, unit-box coordinates
  Eigen::VectorXd phases_;
  Eigen::VectorXd weights_;
  double amplitude_;
};

[[nodiscard]] PosteriorFunctionSample draw_posterior_function(const PosteriorModel& model, int feature_count, Rng& rng);

struct SampleMaximum {
  double value = 0.0;
  Eigen::VectorXd argmax;
};

/// Best of a random scan, then projected gradient ascent from the top
/// `restarts` scan points. The result dominates every point visited.
[[nodiscard]] SampleMaximum maximize_function_sample(const PosteriorFunctionSample& sample, const Domain& domain,
                                                     int restarts, int steps, Rng& rng, int scan_points = 1000);

struct MaxValueSet {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXd> argmax_probes;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  void validate() const;

  /// JSON text; doubles round-trip exactly.
  [[nodiscard]] std::string serialize() const;
  [[nodiscard]] static MaxValueSet deserialize(const std::string& text);

  friend bool operator==(const MaxValueSet& a, const MaxValueSet& b);
};

struct MaxValueSamplerConfig {
  int feature_count = 1024;
  int restarts = 10;
  int steps = 200;
  int scan_points = 1000;
};

[[nodiscard]] MaxValueSet sample_max_values(const PosteriorModel& model, const Domain& domain, int count, Rng& rng,
                                            const MaxValueSamplerConfig& config = {});

/// Gumbel approximation to Pr[f* <= z] = Π_i Ψ((z - μ_i) / σ_i) over the rows
/// of `grid`, matched at the 0.25 and 0.75 quantiles.
[[nodiscard]] MaxValueSet gumbel_sample_max_values(const PosteriorModel& model, const Eigen::MatrixXd& grid, int count,
                                                   Rng& rng);

struct GumbelFit {
  double location = 0.0;
  double scale = 0.0;
  [[nodiscard]] double mean() const;
  [[nodiscard]] double quantile(double q) const;
};
[[nodiscard]] GumbelFit fit_max_value_gumbel(const PosteriorModel& model, const Eigen::MatrixXd& grid);

}  // namespace rmes
