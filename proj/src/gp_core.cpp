#include "rmes/gp_core.hpp"

#include "rmes/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rmes {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

struct UnitProblem {
  Eigen::MatrixXd inputs;        // n x d, unit box
  Eigen::VectorXd lengthscales;  // unit-box lengthscales
};

UnitProblem to_unit_problem(const Dataset& dataset, const KernelHyperparams& hyper) {
  const Domain& domain = dataset.domain();
  const Eigen::VectorXd width = domain.width();
  UnitProblem p;
  p.inputs.resize(dataset.size(), dataset.dim());
  for (int i = 0; i < dataset.size(); ++i) {
    p.inputs.row(i) = domain.to_unit(dataset.inputs().row(i).transpose()).transpose();
  }
  p.lengthscales = (hyper.lengthscales.array() / width.array()).matrix();
  return p;
}

// Noise-free SE Gram matrix on unit-box inputs.
Eigen::MatrixXd gram(const UnitProblem& p, double signal_variance) {
  const Eigen::Index n = p.inputs.rows();
  const Eigen::ArrayXd inv_ls = p.lengthscales.array().inverse();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r2 = ((p.inputs.row(i) - p.inputs.row(j)).transpose().array() * inv_ls).square().sum();
      k(i, j) = k(j, i) = signal_variance * std::exp(-0.5 * r2);
    }
  }
  return k;
}

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

// First attempt without jitter, then 1e-10 σ_s² escalating ×10 up to 1e-4 σ_s².
Factorization factorize(const Eigen::MatrixXd& noisy_gram, double signal_variance) {
  Factorization f;
  const Eigen::Index n = noisy_gram.rows();
  f.llt.compute(noisy_gram);
  if (f.llt.info() == Eigen::Success) return f;
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    f.jitter = rel * signal_variance;
    f.llt.compute(noisy_gram + f.jitter * Eigen::MatrixXd::Identity(n, n));
    if (f.llt.info() == Eigen::Success) {
      spdlog::debug("cholesky succeeded with jitter {:.3g}", f.jitter);
      return f;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noisy_gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  throw NumericError("cholesky failed after maximum jitter; eigenvalue range [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "], condition estimate " + std::to_string(hi / std::max(std::abs(lo), 1e-300)));
}

}  // namespace

void KernelHyperparams::validate(int dim) const {
  if (lengthscales.size() != dim) {
    throw InputError("expected " + std::to_string(dim) + " lengthscales, got " + std::to_string(lengthscales.size()));
  }
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i])) throw InputError("lengthscales must be positive");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) throw InputError("signal variance must be positive");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) throw InputError("noise variance must be nonnegative");
}

double se_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const KernelHyperparams& hyper) {
  if (x1.size() != x2.size() || x1.size() != hyper.lengthscales.size()) {
    throw InputError("se_kernel: dimension mismatch");
  }
  const double r2 = ((x1 - x2).array() / hyper.lengthscales.array()).square().sum();
  return hyper.signal_variance * std::exp(-0.5 * r2);
}

double PredictiveStats::latent_stddev() const { return std::sqrt(latent_variance); }
double PredictiveStats::observation_stddev() const { return std::sqrt(observation_variance); }

PredictiveStats PredictiveStats::from(double mean, double latent_variance, double noise_variance) {
  return PredictiveStats{mean, latent_variance, latent_variance + noise_variance};
}

PosteriorModel::PosteriorModel(Dataset dataset, KernelHyperparams hyper)
    : dataset_(std::move(dataset)), hyper_(std::move(hyper)) {}

PosteriorModel fit(const Dataset& dataset, const KernelHyperparams& hyper) {
  hyper.validate(dataset.dim());
  PosteriorModel model(dataset, hyper);
  UnitProblem p = to_unit_problem(dataset, hyper);
  model.unit_lengthscales_ = p.lengthscales;
  model.unit_inputs_ = p.inputs;
  const int n = dataset.size();
  if (n == 0) {
    model.chol_.resize(0, 0);
    model.alpha_.resize(0);
    return model;
  }
  Eigen::MatrixXd k = gram(p, hyper.signal_variance);
  k.diagonal().array() += hyper.noise_variance;
  Factorization f = factorize(k, hyper.signal_variance);
  model.jitter_ = f.jitter;
  model.chol_ = f.llt.matrixL();
  model.alpha_ = f.llt.solve(dataset.outputs());
  return model;
}

Eigen::VectorXd PosteriorModel::cross_covariance(const Eigen::VectorXd& unit_x) const {
  const Eigen::Index n = unit_inputs_.rows();
  const Eigen::ArrayXd inv_ls = unit_lengthscales_.array().inverse();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r2 = ((unit_inputs_.row(i).transpose() - unit_x).array() * inv_ls).square().sum();
    k[i] = hyper_.signal_variance * std::exp(-0.5 * r2);
  }
  return k;
}

double PosteriorModel::posterior_mean(const Eigen::VectorXd& x, Eigen::VectorXd* gradient) const {
  if (x.size() != dim()) throw InputError("predict: dimension mismatch");
  const Eigen::VectorXd u = domain().to_unit(x);
  if (gradient) gradient->setZero(dim());
  if (dataset_.empty()) return 0.0;
  const Eigen::VectorXd k = cross_covariance(u);
  if (gradient) {
    const Eigen::ArrayXd scale = (unit_lengthscales_.array().square() * domain().width().array()).inverse();
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      const Eigen::ArrayXd dk = -k[i] * (u - unit_inputs_.row(i).transpose()).array() * scale;
      gradient->array() += alpha_[i] * dk;
    }
  }
  return k.dot(alpha_);
}

PredictiveStats PosteriorModel::predict(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw InputError("predict: dimension mismatch");
  if (dataset_.empty()) return PredictiveStats::from(0.0, hyper_.signal_variance, hyper_.noise_variance);
  const Eigen::VectorXd k = cross_covariance(domain().to_unit(x));
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  double var = hyper_.signal_variance - v.squaredNorm();
  if (var < 0.0) {
    spdlog::debug("posterior variance {:.3g} clamped to 0", var);
    var = 0.0;
  }
  return PredictiveStats::from(k.dot(alpha_), var, hyper_.noise_variance);
}

PredictiveStats PosteriorModel::predict(const Eigen::VectorXd& x, PredictiveGradient& gradient) const {
  if (x.size() != dim()) throw InputError("predict: dimension mismatch");
  gradient.mean.setZero(dim());
  gradient.latent_variance.setZero(dim());
  if (dataset_.empty()) return PredictiveStats::from(0.0, hyper_.signal_variance, hyper_.noise_variance);

  const Eigen::VectorXd u = domain().to_unit(x);
  const Eigen::VectorXd k = cross_covariance(u);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const Eigen::VectorXd kinv_k = chol_.transpose().triangularView<Eigen::Upper>().solve(v);
  const Eigen::ArrayXd scale = (unit_lengthscales_.array().square() * domain().width().array()).inverse();
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    const Eigen::ArrayXd dk = -k[i] * (u - unit_inputs_.row(i).transpose()).array() * scale;
    gradient.mean.array() += alpha_[i] * dk;
    gradient.latent_variance.array() -= 2.0 * kinv_k[i] * dk;
  }
  double var = hyper_.signal_variance - v.squaredNorm();
  if (var < 0.0) {
    spdlog::debug("posterior variance {:.3g} clamped to 0", var);
    var = 0.0;
    gradient.latent_variance.setZero();
  }
  return PredictiveStats::from(k.dot(alpha_), var, hyper_.noise_variance);
}

double log_marginal_likelihood(const Dataset& dataset, const KernelHyperparams& hyper) {
  if (dataset.empty()) throw InputError("log_marginal_likelihood needs a nonempty dataset");
  hyper.validate(dataset.dim());
  const UnitProblem p = to_unit_problem(dataset, hyper);
  Eigen::MatrixXd k = gram(p, hyper.signal_variance);
  k.diagonal().array() += hyper.noise_variance;
  const Factorization f = factorize(k, hyper.signal_variance);
  const Eigen::VectorXd alpha = f.llt.solve(dataset.outputs());
  const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  const double n = dataset.size();
  return -0.5 * dataset.outputs().dot(alpha) - 0.5 * log_det - 0.5 * n * kLog2Pi;
}

LikelihoodGradient log_marginal_likelihood_gradient(const Dataset& dataset, const KernelHyperparams& hyper) {
  if (dataset.empty()) throw InputError("log_marginal_likelihood needs a nonempty dataset");
  hyper.validate(dataset.dim());
  const int d = dataset.dim();
  const Eigen::Index n = dataset.size();
  const UnitProblem p = to_unit_problem(dataset, hyper);
  const Eigen::MatrixXd k_se = gram(p, hyper.signal_variance);
  Eigen::MatrixXd k = k_se;
  k.diagonal().array() += hyper.noise_variance;
  const Factorization f = factorize(k, hyper.signal_variance);
  const Eigen::VectorXd alpha = f.llt.solve(dataset.outputs());
  const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();

  LikelihoodGradient out;
  out.value = -0.5 * dataset.outputs().dot(alpha) - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
  out.gradient.setZero(d + 2);

  // ∂L/∂θ = 0.5 tr(W ∂K/∂θ), W = α αᵀ - K⁻¹
  Eigen::MatrixXd w = alpha * alpha.transpose() - f.llt.solve(Eigen::MatrixXd::Identity(n, n));
  for (int dim = 0; dim < d; ++dim) {
    const double inv_ls2 = 1.0 / (p.lengthscales[dim] * p.lengthscales[dim]);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const double diff = p.inputs(i, dim) - p.inputs(j, dim);
        acc += 2.0 * w(i, j) * k_se(i, j) * diff * diff * inv_ls2;
      }
    }
    out.gradient[dim] = 0.5 * acc;
  }
  out.gradient[d] = 0.5 * (w.array() * k_se.array()).sum();
  out.gradient[d + 1] = 0.5 * hyper.noise_variance * w.trace();
  return out;
}

namespace {

struct LogBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

KernelHyperparams unpack(const Eigen::VectorXd& theta, int d, const std::optional<double>& fixed_noise) {
  KernelHyperparams h;
  h.lengthscales = theta.head(d).array().exp();
  h.signal_variance = std::exp(theta[d]);
  h.noise_variance = fixed_noise ? *fixed_noise : std::exp(theta[d + 1]);
  return h;
}

double safe_likelihood(const Dataset& data, const KernelHyperparams& h, Eigen::VectorXd* grad) {
  try {
    if (grad) {
      LikelihoodGradient lg = log_marginal_likelihood_gradient(data, h);
      *grad = lg.gradient;
      return std::isfinite(lg.value) && lg.gradient.allFinite() ? lg.value : -std::numeric_limits<double>::infinity();
    }
    const double v = log_marginal_likelihood(data, h);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const NumericError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

KernelHyperparams mle_fit(const Dataset& dataset, const KernelHyperparams& init, const MleConfig& config) {
  if (dataset.empty()) throw InputError("mle_fit needs a nonempty dataset");
  init.validate(dataset.dim());
  const int d = dataset.dim();
  const bool learn_noise = !config.fixed_noise_variance.has_value();
  const int np = d + (learn_noise ? 2 : 1);
  const Eigen::VectorXd width = dataset.domain().width();
  const double scale = std::max(dataset.outputs().squaredNorm() / dataset.size(), 1e-10);

  LogBox box{Eigen::VectorXd(np), Eigen::VectorXd(np)};
  for (int i = 0; i < d; ++i) {
    box.lower[i] = std::log(config.lengthscale_lower * width[i]);
    box.upper[i] = std::log(config.lengthscale_upper * width[i]);
  }
  box.lower[d] = std::log(config.signal_variance_lower * scale);
  box.upper[d] = std::log(config.signal_variance_upper * scale);
  if (learn_noise) {
    box.lower[d + 1] = std::log(1e-8 * scale);
    box.upper[d + 1] = std::log(scale);
  }
  auto project = [&](Eigen::VectorXd t) { return t.cwiseMax(box.lower).cwiseMin(box.upper).eval(); };

  Rng rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> starts;
  {
    Eigen::VectorXd t(np);
    t.head(d) = init.lengthscales.array().log();
    t[d] = std::log(init.signal_variance);
    if (learn_noise) t[d + 1] = std::log(std::max(init.noise_variance, 1e-8 * scale));
    starts.push_back(project(t));
  }
  for (int s = 1; s < config.starts; ++s) {
    Eigen::VectorXd t(np);
    for (int i = 0; i < d; ++i) t[i] = std::log(width[i]) + std::log(0.02) + unif(rng) * std::log(50.0);
    t[d] = std::log(scale) + std::log(0.1) + unif(rng) * std::log(100.0);
    if (learn_noise) t[d + 1] = std::log(scale) + std::log(1e-4) + unif(rng) * std::log(1e3);
    starts.push_back(project(t));
  }

  const std::optional<double> fixed_noise = config.fixed_noise_variance;
  auto expand = [&](const Eigen::VectorXd& t) { return unpack(learn_noise ? t : (Eigen::VectorXd(d + 2) << t, 0.0).finished(), d, fixed_noise); };

  KernelHyperparams best = init;
  double best_value = safe_likelihood(dataset, init, nullptr);

  for (const Eigen::VectorXd& start : starts) {
    Eigen::VectorXd theta = start;
    Eigen::VectorXd step = Eigen::VectorXd::Constant(np, 0.1);
    Eigen::VectorXd prev_grad = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd last_good = theta;
    for (int it = 0; it < config.max_iterations; ++it) {
      Eigen::VectorXd full_grad;
      const double value = safe_likelihood(dataset, expand(theta), &full_grad);
      if (!std::isfinite(value)) {
        // Reject the step and shrink.
        theta = last_good;
        step *= 0.5;
        prev_grad.setZero();
        if (step.maxCoeff() < 1e-6) break;
        continue;
      }
      if (value > best_value) {
        best_value = value;
        best = expand(theta);
      }
      last_good = theta;
      Eigen::VectorXd grad(np);
      grad.head(d + 1) = full_grad.head(d + 1);
      if (learn_noise) grad[d + 1] = full_grad[d + 1];
      double free_step = 0.0;
      for (int i = 0; i < np; ++i) {
        // Pinned at a bound and pushing outward: nothing to do for this coordinate.
        if ((theta[i] <= box.lower[i] && grad[i] < 0.0) || (theta[i] >= box.upper[i] && grad[i] > 0.0)) {
          grad[i] = 0.0;
          continue;
        }
        const double sign_change = grad[i] * prev_grad[i];
        if (sign_change > 0.0) {
          step[i] = std::min(step[i] * 1.2, 1.0);
        } else if (sign_change < 0.0) {
          step[i] = std::max(step[i] * 0.5, 1e-9);
          grad[i] = 0.0;
        }
        if (grad[i] > 0.0) theta[i] += step[i];
        else if (grad[i] < 0.0) theta[i] -= step[i];
        free_step = std::max(free_step, step[i]);
      }
      theta = project(theta);
      prev_grad = grad;
      if (free_step < 1e-6) break;
    }
  }
  return best;
}

}  // namespace rmes
