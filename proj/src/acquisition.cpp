#include "rmes/acquisition.hpp"

#include "rmes/dual.hpp"
#include "rmes/errors.hpp"
#include "rmes/gaussian_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rmes {
namespace {

using D2 = Dual<2>;  // partials: (mean, latent variance)

template <class S>
S floored_stddev(const S& variance, double floor) {
  using std::sqrt;
  if (value_of(variance) <= floor * floor) return S(floor);
  return sqrt(variance);
}

template <class S>
S mes_core(const S& mean, const S& latent_variance, std::span<const double> fstars, double floor) {
  using std::log;
  if (!(value_of(latent_variance) > 0.0)) return S(0.0);
  const S sx = floored_stddev(latent_variance, floor);
  S acc(0.0);
  for (const double f : fstars) {
    const S h = (f - mean) / sx;
    // h ψ(h) / (2 Ψ(h)) - log Ψ(h), with ψ/Ψ taken as one stable ratio
    acc += 0.5 * h * inverse_mills_ratio(h) - log_std_cdf(h);
  }
  return acc / static_cast<double>(fstars.size());
}

template <class S>
S rmes_core(const S& mean, const S& latent_variance, double noise_variance, std::span<const double> fstars,
            std::span<const double> nu, double floor) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const std::size_t nf = fstars.size();
  if (nf <= 1 || !(value_of(latent_variance) > 0.0)) return S(0.0);

  const S sx = floored_stddev(latent_variance, floor);
  const double sn = std::max(std::sqrt(std::max(noise_variance, 0.0)), floor);
  const S splus = sqrt(sx * sx + sn * sn);

  // With t(ν) = ν σ_+ + μ, g_f(t) = (σ_+ / σ_n) h_f - (σ_x / σ_n) ν.
  std::vector<S> scaled_h(nf);
  std::vector<S> log_cdf_h(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const S h = (fstars[f] - mean) / sx;
    scaled_h[f] = splus * h / sn;
    log_cdf_h[f] = log_std_cdf(h);
  }
  const S slope = sx / sn;
  const double log_nf = std::log(static_cast<double>(nf));

  std::vector<S> a(nf);
  S total(0.0);
  for (const double v : nu) {
    // a_f = log w_f(t(ν)); the Gaussian factor of p(t|f) cancels in the ratio.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < nf; ++f) {
      a[f] = log_std_cdf(scaled_h[f] - slope * v) - log_cdf_h[f];
      top = std::max(top, value_of(a[f]));
    }
    S sum(0.0);
    for (std::size_t f = 0; f < nf; ++f) sum += exp(a[f] - top);
    const S log_mix = top + log(sum);
    for (std::size_t f = 0; f < nf; ++f) total += exp(a[f]) * (a[f] - log_mix + log_nf);
  }
  return total / static_cast<double>(nf * nu.size());
}

template <class S>
S ei_core(const S& mean, const S& latent_variance, double y_best, double floor) {
  const S diff = mean - y_best;
  if (!(value_of(latent_variance) > 0.0) && floor <= 0.0) return value_of(diff) > 0.0 ? diff : S(0.0);
  const S sx = floored_stddev(latent_variance, floor);
  const S z = diff / sx;
  // σ (z Ψ(z) + ψ(z)), rewritten in the lower tail to avoid cancellation.
  const S tau = value_of(z) >= kLogCdfAsymptoticThreshold ? z * std_cdf(z) + std_pdf(z)
                                                          : std_pdf(z) * (1.0 + z / inverse_mills_ratio(z));
  const S ei = sx * tau;
  return value_of(ei) > 0.0 ? ei : S(0.0);
}

template <class S>
S ucb_core(const S& mean, const S& latent_variance, double beta, double floor) {
  if (!(value_of(latent_variance) > 0.0) && floor <= 0.0) return mean;
  return mean + beta * floored_stddev(latent_variance, floor);
}

AcqSensitivity from_dual(const D2& d) { return AcqSensitivity{d.value, d.grad[0], d.grad[1]}; }

std::pair<D2, D2> seed(const PredictiveStats& stats) {
  return {D2::variable(stats.mean, 0), D2::variable(stats.latent_variance, 1)};
}

void require_max_values(std::span<const double> fstars) {
  if (fstars.empty()) throw InputError("acquisition needs a nonempty max-value set");
}

}  // namespace

double RectifiedDensityParams::h() const { return (max_value - mean) / std::sqrt(latent_variance); }

double RectifiedDensityParams::g(double y) const {
  const double sx = std::sqrt(latent_variance);
  const double sn = std::sqrt(noise_variance);
  const double splus2 = observation_variance();
  return (splus2 * max_value - noise_variance * mean - latent_variance * y) / (sx * sn * std::sqrt(splus2));
}

void RectifiedDensityParams::validate() const {
  if (!(latent_variance > 0.0) || !(noise_variance > 0.0)) {
    throw InputError("rectified density needs positive latent and noise variances");
  }
  if (!std::isfinite(mean) || !std::isfinite(max_value) || !std::isfinite(latent_variance) ||
      !std::isfinite(noise_variance)) {
    throw InputError("rectified density parameters must be finite");
  }
}

double mes_value(const PredictiveStats& stats, const MaxValueSet& max_values, double stddev_floor) {
  require_max_values(max_values.values);
  return mes_core(stats.mean, stats.latent_variance, max_values.values, stddev_floor);
}

double log_weight(const RectifiedDensityParams& params, double y) {
  params.validate();
  return log_std_cdf(params.g(y)) - log_std_cdf(params.h());
}

double weight(const RectifiedDensityParams& params, double y) { return std::exp(log_weight(params, y)); }

double log_cond_density(const RectifiedDensityParams& params, double y) {
  return log_normal_pdf(y, params.mean, params.observation_variance()) + log_weight(params, y);
}

double cond_density(const RectifiedDensityParams& params, double y) {
  const double log_n = log_normal_pdf(y, params.mean, params.observation_variance());
  const double log_w = log_weight(params, y);
  // Multiply directly while both factors are representable; otherwise stay in log space.
  if (log_n > -700.0 && log_w < 700.0) return std::exp(log_n) * std::exp(log_w);
  return std::exp(log_n + log_w);
}

double rmes_value(const PredictiveStats& stats, const AcqContext& ctx) {
  return rmes_value(stats, ctx.max_values.values, ctx.nu_block.samples, ctx.stddev_floor);
}

double rmes_value(const PredictiveStats& stats, std::span<const double> max_values, std::span<const double> nu,
                  double stddev_floor) {
  require_max_values(max_values);
  if (nu.empty()) throw InputError("rmes_value needs a nonempty nu block");
  return rmes_core(stats.mean, stats.latent_variance, stats.noise_variance(), max_values, nu, stddev_floor);
}

double ei_value(const PredictiveStats& stats, double y_best) {
  return ei_core(stats.mean, stats.latent_variance, y_best, 0.0);
}

double ucb_value(const PredictiveStats& stats, double beta) {
  if (!(beta >= 0.0)) throw InputError("ucb beta must be nonnegative");
  return ucb_core(stats.mean, stats.latent_variance, beta, 0.0);
}

AcqSensitivity mes_sensitivity(const PredictiveStats& stats, std::span<const double> max_values, double stddev_floor) {
  require_max_values(max_values);
  const auto [m, v] = seed(stats);
  return from_dual(mes_core(m, v, max_values, stddev_floor));
}

AcqSensitivity rmes_sensitivity(const PredictiveStats& stats, std::span<const double> max_values,
                                std::span<const double> nu, double stddev_floor) {
  require_max_values(max_values);
  if (nu.empty()) throw InputError("rmes needs a nonempty nu block");
  const auto [m, v] = seed(stats);
  return from_dual(rmes_core(m, v, stats.noise_variance(), max_values, nu, stddev_floor));
}

AcqSensitivity ei_sensitivity(const PredictiveStats& stats, double y_best, double stddev_floor) {
  const auto [m, v] = seed(stats);
  return from_dual(ei_core(m, v, y_best, stddev_floor));
}

AcqSensitivity ucb_sensitivity(const PredictiveStats& stats, double beta, double stddev_floor) {
  const auto [m, v] = seed(stats);
  return from_dual(ucb_core(m, v, beta, stddev_floor));
}

std::string_view to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::rmes: return "rmes";
    case AcquisitionKind::mes: return "mes";
    case AcquisitionKind::ei: return "ei";
    case AcquisitionKind::ucb: return "ucb";
  }
  return "unknown";
}

AcquisitionKind parse_acquisition_kind(std::string_view name) {
  if (name == "rmes") return AcquisitionKind::rmes;
  if (name == "mes") return AcquisitionKind::mes;
  if (name == "ei") return AcquisitionKind::ei;
  if (name == "ucb") return AcquisitionKind::ucb;
  throw InputError("unknown acquisition '" + std::string(name) + "' (expected rmes, mes, ei or ucb)");
}

double Acquisition::evaluate(const Eigen::VectorXd& x, const NuBlock& nu, Eigen::VectorXd& gradient) const {
  gradient.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = finite_difference_step * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[i] += step;
    xm[i] -= step;
    gradient[i] = (evaluate(xp, nu) - evaluate(xm, nu)) / (2.0 * step);
  }
  return evaluate(x, nu);
}

ModelAcquisition::ModelAcquisition(AcquisitionKind kind, const PosteriorModel& model, AcqContext ctx)
    : kind_(kind), model_(&model), ctx_(std::move(ctx)) {
  if (kind_ == AcquisitionKind::rmes || kind_ == AcquisitionKind::mes) ctx_.max_values.validate();
  if (!(ctx_.ucb_beta >= 0.0)) throw InputError("ucb beta must be nonnegative");
}

AcqSensitivity ModelAcquisition::sensitivity(const PredictiveStats& stats, const NuBlock& nu) const {
  switch (kind_) {
    case AcquisitionKind::rmes: return rmes_sensitivity(stats, ctx_.max_values.values, nu.samples, ctx_.stddev_floor);
    case AcquisitionKind::mes: return mes_sensitivity(stats, ctx_.max_values.values, ctx_.stddev_floor);
    case AcquisitionKind::ei: return ei_sensitivity(stats, ctx_.incumbent_best, ctx_.stddev_floor);
    case AcquisitionKind::ucb: return ucb_sensitivity(stats, ctx_.ucb_beta, ctx_.stddev_floor);
  }
  throw InputError("unknown acquisition kind");
}

double ModelAcquisition::evaluate(const Eigen::VectorXd& x, const NuBlock& nu) const {
  const PredictiveStats stats = model_->predict(x);
  const double floor = ctx_.stddev_floor;
  switch (kind_) {
    case AcquisitionKind::rmes: return rmes_core(stats.mean, stats.latent_variance, stats.noise_variance(),
                                                 std::span<const double>(ctx_.max_values.values),
                                                 std::span<const double>(nu.samples), floor);
    case AcquisitionKind::mes: return mes_core(stats.mean, stats.latent_variance,
                                               std::span<const double>(ctx_.max_values.values), floor);
    case AcquisitionKind::ei: return ei_core(stats.mean, stats.latent_variance, ctx_.incumbent_best, floor);
    case AcquisitionKind::ucb: return ucb_core(stats.mean, stats.latent_variance, ctx_.ucb_beta, floor);
  }
  throw InputError("unknown acquisition kind");
}

double ModelAcquisition::evaluate(const Eigen::VectorXd& x, const NuBlock& nu, Eigen::VectorXd& gradient) const {
  PredictiveGradient pg;
  const PredictiveStats stats = model_->predict(x, pg);
  const AcqSensitivity s = sensitivity(stats, nu);
  gradient = s.d_mean * pg.mean + s.d_latent_variance * pg.latent_variance;
  return s.value;
}

FunctionAcquisition::FunctionAcquisition(std::string name, Value value, Gradient gradient)
    : name_(std::move(name)), value_(std::move(value)), gradient_(std::move(gradient)) {}

double FunctionAcquisition::evaluate(const Eigen::VectorXd& x, const NuBlock& /*nu*/) const { return value_(x); }

double FunctionAcquisition::evaluate(const Eigen::VectorXd& x, const NuBlock& nu, Eigen::VectorXd& gradient) const {
  if (!gradient_) return Acquisition::evaluate(x, nu, gradient);
  gradient = gradient_(x);
  return value_(x);
}

}  // namespace rmes
