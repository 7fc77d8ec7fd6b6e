#include "rmes/conformance/oracles.hpp"

#include "rmes/errors.hpp"
#include "rmes/gaussian_stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace rmes::conformance {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kTailWidth = 40.0;
constexpr unsigned kMaxDepth = 12;
constexpr double kRelTolerance = 1e-11;

// Points at which the integrand changes scale: the center plus multiples of
// each length scale in both directions.
void add_scale_breaks(std::vector<double>& breaks, double center, std::initializer_list<double> scales) {
  breaks.push_back(center);
  for (const double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) continue;
    for (const double k : {1.0, 3.0, 10.0}) {
      breaks.push_back(center - k * s);
      breaks.push_back(center + k * s);
    }
  }
}

struct Window {
  double lower;
  double upper;
  std::vector<double> breaks;
};

Window rectified_window(const RectifiedDensityParams& p) {
  const double sx = std::sqrt(p.latent_variance);
  const double sn = std::sqrt(p.noise_variance);
  const double splus = std::sqrt(p.observation_variance());
  Window w;
  w.lower = std::min(p.mean, p.max_value) - kTailWidth * splus;
  w.upper = std::max(p.mean, p.max_value) + kTailWidth * splus;
  const double g_zero = (p.observation_variance() * p.max_value - p.noise_variance * p.mean) / p.latent_variance;
  add_scale_breaks(w.breaks, p.max_value, {sn, sx, splus});
  add_scale_breaks(w.breaks, p.mean, {splus});
  add_scale_breaks(w.breaks, g_zero, {sn * splus / sx});
  return w;
}

double entropy_integrand(double log_p) { return log_p < -745.0 ? 0.0 : -std::exp(log_p) * log_p; }

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, std::span<const double> breaks) {
  if (!(a < b)) throw InputError("integration interval must satisfy a < b");
  std::vector<double> nodes{a};
  for (const double x : breaks) {
    if (x > a && x < b) nodes.push_back(x);
  }
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    total += gauss_kronrod<double, 61>::integrate(f, nodes[i], nodes[i + 1], kMaxDepth, kRelTolerance);
  }
  return total;
}

double cond_density_mass(const RectifiedDensityParams& params) {
  params.validate();
  const Window w = rectified_window(params);
  return integrate([&](double y) { return std::exp(log_cond_density(params, y)); }, w.lower, w.upper, w.breaks);
}

double expected_weight(const RectifiedDensityParams& params) {
  params.validate();
  const double splus = std::sqrt(params.observation_variance());
  const Window w = rectified_window(params);
  std::vector<double> breaks;
  for (const double y : w.breaks) breaks.push_back((y - params.mean) / splus);
  const double log_cdf_h = log_std_cdf(params.h());
  auto integrand = [&](double v) {
    const double y = params.mean + splus * v;
    return std::exp(log_std_pdf(v) + log_std_cdf(params.g(y)) - log_cdf_h);
  };
  return integrate(integrand, (w.lower - params.mean) / splus, (w.upper - params.mean) / splus, breaks);
}

double convolution_density(const RectifiedDensityParams& params, double y) {
  params.validate();
  const double sx = std::sqrt(params.latent_variance);
  const double sn = std::sqrt(params.noise_variance);
  const double splus = std::sqrt(params.observation_variance());
  const double center = (params.mean * params.noise_variance + y * params.latent_variance) / params.observation_variance();
  const double width = sx * sn / splus;
  const double lower = std::min({params.mean - kTailWidth * sx, center - kTailWidth * width, params.max_value - 1.0});
  std::vector<double> breaks;
  add_scale_breaks(breaks, center, {width});
  add_scale_breaks(breaks, params.mean, {sx});
  const double log_cdf_h = log_std_cdf(params.h());
  auto integrand = [&](double f) {
    return std::exp(log_normal_pdf(f, params.mean, params.latent_variance) - log_cdf_h +
                    log_normal_pdf(y, f, params.noise_variance));
  };
  return integrate(integrand, lower, params.max_value, breaks);
}

double trunc_gauss_entropy_quadrature(const UpperTruncatedGaussian& tg) {
  tg.validate();
  const double s = tg.stddev;
  const double log_cdf_h = log_std_cdf(tg.standardized_bound());
  const double upper = std::isfinite(tg.upper) ? tg.upper : tg.mean + kTailWidth * s;
  const double lower = std::min(tg.mean, upper) - kTailWidth * s;
  std::vector<double> breaks;
  add_scale_breaks(breaks, tg.mean, {s});
  add_scale_breaks(breaks, upper, {s, 0.1 * s, 0.01 * s});
  auto integrand = [&](double y) {
    return entropy_integrand(log_normal_pdf(y, tg.mean, s * s) - log_cdf_h);
  };
  return integrate(integrand, lower, upper, breaks);
}

double mixture_mutual_information(double mean, double latent_variance, double noise_variance,
                                  std::span<const double> max_values) {
  if (max_values.empty()) throw InputError("mixture needs at least one component");
  std::vector<RectifiedDensityParams> parts;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  std::vector<double> breaks;
  for (const double f : max_values) {
    RectifiedDensityParams p{mean, latent_variance, noise_variance, f};
    p.validate();
    const Window w = rectified_window(p);
    lower = std::min(lower, w.lower);
    upper = std::max(upper, w.upper);
    breaks.insert(breaks.end(), w.breaks.begin(), w.breaks.end());
    parts.push_back(p);
  }
  const double log_n = std::log(static_cast<double>(parts.size()));

  double component_entropy = 0.0;
  for (const RectifiedDensityParams& p : parts) {
    component_entropy += integrate([&](double y) { return entropy_integrand(log_cond_density(p, y)); }, lower, upper,
                                   breaks);
  }
  component_entropy /= static_cast<double>(parts.size());

  auto mixture_integrand = [&](double y) {
    std::vector<double> logs;
    logs.reserve(parts.size());
    for (const RectifiedDensityParams& p : parts) logs.push_back(log_cond_density(p, y));
    return entropy_integrand(log_sum_exp(logs) - log_n);
  };
  const double mixture_entropy = integrate(mixture_integrand, lower, upper, breaks);
  return mixture_entropy - component_entropy;
}

DenseGpOracle::DenseGpOracle(const Dataset& data, const KernelHyperparams& hyper) : data_(data), hyper_(hyper) {
  hyper_.validate(data.dim());
  const int n = data.size();
  MatrixL k(n, n);
  for (int i = 0; i < n; ++i) {
    k.row(i) = cross(data.inputs().row(i).transpose()).transpose();
    k(i, i) += static_cast<long double>(hyper_.noise_variance);
  }
  const Eigen::FullPivLU<MatrixL> lu(k);
  inverse_ = lu.inverse();
  const VectorL y = data.outputs().cast<long double>();
  alpha_ = inverse_ * y;
  log_det_ = 0.0L;
  const MatrixL& packed = lu.matrixLU();
  for (int i = 0; i < n; ++i) log_det_ += std::log(std::abs(packed(i, i)));
}

DenseGpOracle::VectorL DenseGpOracle::cross(const Eigen::VectorXd& x) const {
  const int n = data_.size();
  VectorL out(n);
  for (int i = 0; i < n; ++i) {
    long double r2 = 0.0L;
    for (int j = 0; j < data_.dim(); ++j) {
      const long double d =
          (static_cast<long double>(x[j]) - static_cast<long double>(data_.inputs()(i, j))) /
          static_cast<long double>(hyper_.lengthscales[j]);
      r2 += d * d;
    }
    out[i] = static_cast<long double>(hyper_.signal_variance) * std::exp(-0.5L * r2);
  }
  return out;
}

double DenseGpOracle::mean(const Eigen::VectorXd& x) const {
  if (data_.empty()) return 0.0;
  return static_cast<double>(cross(x).dot(alpha_));
}

double DenseGpOracle::latent_variance(const Eigen::VectorXd& x) const {
  const long double prior = hyper_.signal_variance;
  if (data_.empty()) return static_cast<double>(prior);
  const VectorL k = cross(x);
  return static_cast<double>(prior - k.dot(inverse_ * k));
}

double DenseGpOracle::log_marginal_likelihood() const {
  const long double n = data_.size();
  const VectorL y = data_.outputs().cast<long double>();
  const long double two_pi = 6.28318530717958647692528676655900577L;
  const long double value = -0.5L * y.dot(alpha_) - 0.5L * log_det_ - 0.5L * n * std::log(two_pi);
  return static_cast<double>(value);
}

Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[i] += step[i];
    down[i] -= step[i];
    g[i] = (f(up) - f(down)) / (up[i] - down[i]);
  }
  return g;
}

}  // namespace rmes::conformance
