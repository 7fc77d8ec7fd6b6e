#pragma once

// Acquisition values at the level of predictive statistics, plus point-level
// acquisition objects that combine them with a fitted posterior.
//
// MES scores the information a noiseless f_x carries about f*; RMES scores the
// information the noisy y_x carries, using the exact density of y_x given f*
// and a Monte-Carlo average over shared standard-normal draws ν.

#include "rmes/gp_core.hpp"
#include "rmes/max_value_sampler.hpp"
#include "rmes/nu_block.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace rmes {

struct AcqContext {
  MaxValueSet max_values;
  NuBlock nu_block;
  double incumbent_best = 0.0;
  double ucb_beta = 3.0;
  /// Floor applied to σ_x and σ_n before forming h and g.
  double stddev_floor = 0.0;
};

/// Parameters of p(y_x | y_D, f*).
struct RectifiedDensityParams {
  double mean = 0.0;
  double latent_variance = 1.0;
  double noise_variance = 1.0;
  double max_value = 0.0;

  [[nodiscard]] double observation_variance() const { return latent_variance + noise_variance; }
  /// h = (f* - μ) / σ_x
  [[nodiscard]] double h() const;
  /// g(y) = (σ_+² f* - σ_n² μ - σ_x² y) / (σ_x σ_n σ_+)
  [[nodiscard]] double g(double y) const;
  void validate() const;
};

/// Closed-form MES averaged over the max-value samples (nats, >= 0).
[[nodiscard]] double mes_value(const PredictiveStats& stats, const MaxValueSet& max_values, double stddev_floor = 0.0);

/// Density of the noisy observation given the max value.
[[nodiscard]] double cond_density(const RectifiedDensityParams& params, double y);
[[nodiscard]] double log_cond_density(const RectifiedDensityParams& params, double y);

/// w(y) = Ψ(g(y)) / Ψ(h), so that cond_density = N(y; μ, σ_+²) w(y).
[[nodiscard]] double weight(const RectifiedDensityParams& params, double y);
[[nodiscard]] double log_weight(const RectifiedDensityParams& params, double y);

/// Monte-Carlo RMES over ctx.nu_block (nats).
[[nodiscard]] double rmes_value(const PredictiveStats& stats, const AcqContext& ctx);
[[nodiscard]] double rmes_value(const PredictiveStats& stats, std::span<const double> max_values,
                                std::span<const double> nu, double stddev_floor = 0.0);

[[nodiscard]] double ei_value(const PredictiveStats& stats, double y_best);
[[nodiscard]] double ucb_value(const PredictiveStats& stats, double beta);

/// Value plus partial derivatives with respect to the predictive mean and the
/// latent variance, used to chain through posterior input gradients.
struct AcqSensitivity {
  double value = 0.0;
  double d_mean = 0.0;
  double d_latent_variance = 0.0;
};

[[nodiscard]] AcqSensitivity mes_sensitivity(const PredictiveStats& stats, std::span<const double> max_values,
                                             double stddev_floor);
[[nodiscard]] AcqSensitivity rmes_sensitivity(const PredictiveStats& stats, std::span<const double> max_values,
                                              std::span<const double> nu, double stddev_floor);
[[nodiscard]] AcqSensitivity ei_sensitivity(const PredictiveStats& stats, double y_best, double stddev_floor);
[[nodiscard]] AcqSensitivity ucb_sensitivity(const PredictiveStats& stats, double beta, double stddev_floor);

enum class AcquisitionKind { rmes, mes, ei, ucb };

[[nodiscard]] std::string_view to_string(AcquisitionKind kind);
/// Throws InputError for unknown names.
[[nodiscard]] AcquisitionKind parse_acquisition_kind(std::string_view name);

/// An acquisition function over input points. Stochastic acquisitions read
/// the ν block passed to each call; the others ignore it.
class Acquisition {
 public:
  virtual ~Acquisition() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual bool uses_nu() const { return false; }
  [[nodiscard]] virtual double evaluate(const Eigen::VectorXd& x, const NuBlock& nu) const = 0;
  /// Value and input gradient. The default uses central differences.
  [[nodiscard]] virtual double evaluate(const Eigen::VectorXd& x, const NuBlock& nu, Eigen::VectorXd& gradient) const;

  double finite_difference_step = 1e-6;
};

/// MES / RMES / EI / UCB on a fitted model. The model must outlive this object.
class ModelAcquisition final : public Acquisition {
 public:
  ModelAcquisition(AcquisitionKind kind, const PosteriorModel& model, AcqContext ctx);

  [[nodiscard]] std::string name() const override { return std::string(to_string(kind_)); }
  [[nodiscard]] bool uses_nu() const override { return kind_ == AcquisitionKind::rmes; }
  [[nodiscard]] double evaluate(const Eigen::VectorXd& x, const NuBlock& nu) const override;
  [[nodiscard]] double evaluate(const Eigen::VectorXd& x, const NuBlock& nu, Eigen::VectorXd& gradient) const override;

  [[nodiscard]] const AcqContext& context() const noexcept { return ctx_; }

 private:
  [[nodiscard]] AcqSensitivity sensitivity(const PredictiveStats& stats, const NuBlock& nu) const;

  AcquisitionKind kind_;
  const PosteriorModel* model_;
  AcqContext ctx_;
};

/// Wraps a plain function (and optionally its gradient) as an acquisition.
class FunctionAcquisition final : public Acquisition {
 public:
  using Value = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  FunctionAcquisition(std::string name, Value value, Gradient gradient = {});

  [[nodiscard]] std::string name() const override { return name_; }
  [[nodiscard]] double evaluate(const Eigen::VectorXd& x, const NuBlock& nu) const override;
  [[nodiscard]] double evaluate(const Eigen::VectorXd& x, const NuBlock& nu, Eigen::VectorXd& gradient) const override;

 private:
  std::string name_;
  Value value_;
  Gradient gradient_;
};

}  // namespace rmes
