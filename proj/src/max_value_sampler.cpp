#include "rmes/max_value_sampler.hpp"

#include "rmes/errors.hpp"
#include "rmes/gaussian_stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rmes {
namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

Eigen::LLT<Eigen::MatrixXd> factorize_with_jitter(Eigen::MatrixXd a, double scale) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  for (double rel = 1e-10; llt.info() != Eigen::Success; rel *= 10.0) {
    if (rel > 1e-4 * (1.0 + 1e-9)) throw NumericError("feature-weight conditioning failed after maximum jitter");
    llt.compute(a + rel * scale * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  }
  return llt;
}

}  // namespace

PosteriorFunctionSample::PosteriorFunctionSample(Domain domain, Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                                                 Eigen::VectorXd weights, double amplitude)
    : domain_(std::move(domain)),
      frequencies_(std::move(frequencies)),
      phases_(std::move(phases)),
      weights_(std::move(weights)),
      amplitude_(amplitude) {}

double PosteriorFunctionSample::operator()(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u = domain_.to_unit(x);
  const Eigen::ArrayXd z = (frequencies_ * u + phases_).array();
  return amplitude_ * (z.cos() * weights_.array()).sum();
}

double PosteriorFunctionSample::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& gradient) const {
  const Eigen::VectorXd u = domain_.to_unit(x);
  const Eigen::VectorXd z = frequencies_ * u + phases_;
  Eigen::VectorXd sin_weighted(z.size());
  double value = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double s = 0.0;
    double c = 0.0;
    ::sincos(z[i], &s, &c);
    sin_weighted[i] = s * weights_[i];
    value += c * weights_[i];
  }
  gradient = (-amplitude_ * (frequencies_.transpose() * sin_weighted)).cwiseQuotient(domain_.width());
  return amplitude_ * value;
}

Eigen::VectorXd PosteriorFunctionSample::values(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd unit(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) unit.row(i) = domain_.to_unit(points.row(i).transpose()).transpose();
  Eigen::MatrixXd z = unit * frequencies_.transpose();
  z.rowwise() += phases_.transpose();
  return amplitude_ * (z.array().cos().matrix() * weights_);
}

PosteriorFunctionSample draw_posterior_function(const PosteriorModel& model, int feature_count, Rng& rng) {
  if (feature_count < 1) throw InputError("feature_count must be at least 1");
  const int d = model.dim();
  const int m = feature_count;
  const Domain& domain = model.domain();
  const KernelHyperparams& hyper = model.hyperparams();
  const Eigen::VectorXd unit_ls = hyper.lengthscales.cwiseQuotient(domain.width());

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  Eigen::MatrixXd omega(m, d);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) omega(i, j) = normal(rng) / unit_ls[j];
  }
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) b[i] = phase(rng);
  Eigen::VectorXd theta(m);
  for (int i = 0; i < m; ++i) theta[i] = normal(rng);
  const double amplitude = std::sqrt(2.0 * hyper.signal_variance / m);

  const Dataset& data = model.dataset();
  if (!data.empty()) {
    const int n = data.size();
    Eigen::MatrixXd unit(n, d);
    for (int i = 0; i < n; ++i) unit.row(i) = domain.to_unit(data.inputs().row(i).transpose()).transpose();
    Eigen::MatrixXd phi = unit * omega.transpose();
    phi.rowwise() += b.transpose();
    phi = amplitude * phi.array().cos().matrix();

    // Pathwise update: θ = θ0 + Φᵀ (ΦΦᵀ + σ_n² I)⁻¹ (y - Φθ0 - ε).
    const double noise_sd = std::sqrt(hyper.noise_variance);
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) eps[i] = noise_sd * normal(rng);
    Eigen::MatrixXd gram = phi * phi.transpose();
    gram.diagonal().array() += hyper.noise_variance;
    const Eigen::LLT<Eigen::MatrixXd> llt = factorize_with_jitter(std::move(gram), hyper.signal_variance);
    const Eigen::VectorXd residual = data.outputs() - phi * theta - eps;
    theta += phi.transpose() * llt.solve(residual);
  }
  return PosteriorFunctionSample(domain, std::move(omega), std::move(b), std::move(theta), amplitude);
}

SampleMaximum maximize_function_sample(const PosteriorFunctionSample& sample, const Domain& domain, int restarts,
                                       int steps, Rng& rng, int scan_points) {
  if (restarts < 1) throw InputError("maximize_function_sample needs at least one restart");
  const int d = domain.dim();
  const int scan = std::max(scan_points, restarts);

  Eigen::MatrixXd points(scan, d);
  for (int i = 0; i < scan; ++i) points.row(i) = domain.sample_uniform(rng).transpose();
  const Eigen::VectorXd scan_values = sample.values(points);

  std::vector<int> order(scan);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scan_values[a] > scan_values[b]; });

  SampleMaximum best{scan_values[order[0]], points.row(order[0]).transpose()};
  const Eigen::VectorXd width = domain.width();

  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x = points.row(order[r]).transpose();
    Eigen::VectorXd grad;
    double fx = sample.value_and_gradient(x, grad);
    double step = 0.05;
    for (int s = 0; s < steps; ++s) {
      // Ascend in unit-box coordinates along the normalized gradient.
      const Eigen::VectorXd unit_grad = grad.cwiseProduct(width);
      const double norm = unit_grad.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) break;
      const Eigen::VectorXd candidate = domain.clamp(x + (step / norm) * unit_grad.cwiseProduct(width));
      Eigen::VectorXd cand_grad;
      const double fc = sample.value_and_gradient(candidate, cand_grad);
      if (fc > fx) {
        x = candidate;
        fx = fc;
        grad = std::move(cand_grad);
        step = std::min(step * 1.5, 0.5);
      } else {
        step *= 0.5;
        if (step < 1e-10) break;
      }
    }
    if (fx > best.value) best = SampleMaximum{fx, x};
  }
  return best;
}

void MaxValueSet::validate() const {
  if (values.empty()) throw InputError("max-value set is empty");
  for (const double v : values) {
    if (!std::isfinite(v)) throw InputError("max-value set contains a non-finite value");
  }
}

std::string MaxValueSet::serialize() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["values"] = values;
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : argmax_probes) probes.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j["argmax_probes"] = probes;
  return j.dump();
}

MaxValueSet MaxValueSet::deserialize(const std::string& text) {
  MaxValueSet set;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    set.seed = j.at("seed").get<std::uint64_t>();
    set.values = j.at("values").get<std::vector<double>>();
    for (const auto& p : j.at("argmax_probes")) {
      const auto v = p.get<std::vector<double>>();
      set.argmax_probes.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("max-value set", 0, e.what());
  }
  set.validate();
  return set;
}

bool operator==(const MaxValueSet& a, const MaxValueSet& b) {
  if (a.seed != b.seed || a.values != b.values || a.argmax_probes.size() != b.argmax_probes.size()) return false;
  for (std::size_t i = 0; i < a.argmax_probes.size(); ++i) {
    if (a.argmax_probes[i].size() != b.argmax_probes[i].size() || a.argmax_probes[i] != b.argmax_probes[i]) {
      return false;
    }
  }
  return true;
}

MaxValueSet sample_max_values(const PosteriorModel& model, const Domain& domain, int count, Rng& rng,
                              const MaxValueSamplerConfig& config) {
  if (count < 1) throw InputError("max-value count must be at least 1");
  MaxValueSet set;
  set.seed = rng();
  for (int i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(set.seed), static_cast<std::uint32_t>(set.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    Rng stream(seq);
    const PosteriorFunctionSample sample = draw_posterior_function(model, config.feature_count, stream);
    const SampleMaximum best =
        maximize_function_sample(sample, domain, config.restarts, config.steps, stream, config.scan_points);
    set.values.push_back(best.value);
    set.argmax_probes.push_back(best.argmax);
  }
  set.validate();
  return set;
}

double GumbelFit::mean() const { return location + kEulerGamma * scale; }

double GumbelFit::quantile(double q) const { return location - scale * std::log(-std::log(q)); }

namespace {

struct GridPosterior {
  std::vector<double> means;
  std::vector<double> stddevs;
};

GridPosterior grid_posterior(const PosteriorModel& model, const Eigen::MatrixXd& grid) {
  if (grid.rows() == 0) throw InputError("Gumbel max-value sampling needs a nonempty grid");
  GridPosterior g;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    const PredictiveStats s = model.predict(grid.row(i).transpose());
    g.means.push_back(s.mean);
    g.stddevs.push_back(s.latent_stddev());
  }
  return g;
}

// log Π_i Ψ((z - μ_i) / σ_i); points with σ_i = 0 act as step functions.
double log_max_cdf(const GridPosterior& g, double z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.means.size(); ++i) {
    if (g.stddevs[i] > 0.0) {
      acc += log_std_cdf((z - g.means[i]) / g.stddevs[i]);
    } else if (z < g.means[i]) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return acc;
}

double max_cdf_quantile(const GridPosterior& g, double q) {
  const double top_mean = *std::max_element(g.means.begin(), g.means.end());
  const double top_sd = *std::max_element(g.stddevs.begin(), g.stddevs.end());
  double lo = top_mean - 10.0 * top_sd;
  double hi = top_mean + 10.0 * top_sd;
  const double target = std::log(q);
  while (log_max_cdf(g, hi) < target) hi += 10.0 * top_sd;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_max_cdf(g, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

GumbelFit fit_max_value_gumbel(const PosteriorModel& model, const Eigen::MatrixXd& grid) {
  const GridPosterior g = grid_posterior(model, grid);
  const double top_sd = *std::max_element(g.stddevs.begin(), g.stddevs.end());
  if (!(top_sd > 0.0)) return GumbelFit{*std::max_element(g.means.begin(), g.means.end()), 0.0};
  constexpr double q1 = 0.25;
  constexpr double q2 = 0.75;
  const double z1 = max_cdf_quantile(g, q1);
  const double z2 = max_cdf_quantile(g, q2);
  const double scale = (z2 - z1) / (std::log(-std::log(q1)) - std::log(-std::log(q2)));
  return GumbelFit{z1 + scale * std::log(-std::log(q1)), scale};
}

MaxValueSet gumbel_sample_max_values(const PosteriorModel& model, const Eigen::MatrixXd& grid, int count, Rng& rng) {
  if (count < 1) throw InputError("max-value count must be at least 1");
  const GumbelFit fit = fit_max_value_gumbel(model, grid);
  MaxValueSet set;
  set.seed = rng();
  Rng stream(set.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    if (fit.scale > 0.0) {
      double u = unif(stream);
      while (u <= 0.0) u = unif(stream);
      set.values.push_back(fit.quantile(u));
    } else {
      // All grid variances vanished: the max is the largest mean.
      const double jitter = 1e-10 * (1.0 + std::abs(fit.location));
      set.values.push_back(fit.location + jitter * unif(stream));
    }
  }
  set.validate();
  return set;
}

}  // namespace rmes
