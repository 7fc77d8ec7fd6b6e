#include "rmes/gaussian_stats.hpp"

#include "rmes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmes {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) throw InputError(std::string(what) + ": argument is not finite");
}

// Ψ(-x) / ψ(x) for x >= 8, evaluated with the modified Lentz algorithm on
// R(x) = 1 / (x + 1/(x + 2/(x + 3/(x + ...)))).
double mills_ratio_tail(double x) {
  constexpr double kTiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = x + k / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

double std_pdf(double z) {
  require_finite(z, "std_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double log_std_pdf(double z) {
  require_finite(z, "log_std_pdf");
  return -0.5 * z * z - kLogSqrt2Pi;
}

double log_normal_pdf(double y, double mean, double variance) {
  if (!(variance > 0.0)) throw InputError("normal_pdf: variance must be positive");
  const double z = (y - mean) / std::sqrt(variance);
  return log_std_pdf(z) - 0.5 * std::log(variance);
}

double normal_pdf(double y, double mean, double variance) { return std::exp(log_normal_pdf(y, mean, variance)); }

double std_cdf(double z) {
  require_finite(z, "std_cdf");
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double log_std_cdf(double z) {
  require_finite(z, "log_std_cdf");
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
  if (z >= kLogCdfAsymptoticThreshold) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
  return log_std_pdf(z) + std::log(mills_ratio_tail(-z));
}

double inverse_mills_ratio(double z) {
  require_finite(z, "inverse_mills_ratio");
  if (z < kLogCdfAsymptoticThreshold) return 1.0 / mills_ratio_tail(-z);
  return std::exp(log_std_pdf(z) - log_std_cdf(z));
}

double UpperTruncatedGaussian::standardized_bound() const {
  if (upper == std::numeric_limits<double>::infinity()) return upper;
  return (upper - mean) / stddev;
}

void UpperTruncatedGaussian::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(stddev) || !(stddev > 0.0)) {
    throw InputError("truncated Gaussian needs a finite mean and a positive stddev");
  }
  if (std::isnan(upper) || upper == -std::numeric_limits<double>::infinity()) {
    throw InputError("truncated Gaussian upper bound must be finite or +inf");
  }
}

double trunc_gauss_entropy(const UpperTruncatedGaussian& tg) {
  tg.validate();
  const double gaussian = 0.5 * std::log(2.0 * kPi * std::exp(1.0) * tg.stddev * tg.stddev);
  const double h = tg.standardized_bound();
  if (!std::isfinite(h)) return gaussian;
  // inverse_mills_ratio stays finite where ψ and Ψ both underflow.
  return gaussian + log_std_cdf(h) - 0.5 * h * inverse_mills_ratio(h);
}

double trunc_gauss_pdf(const UpperTruncatedGaussian& tg, double y) {
  tg.validate();
  if (y > tg.upper) return 0.0;
  const double z = (y - tg.mean) / tg.stddev;
  const double h = tg.standardized_bound();
  const double log_norm = std::isfinite(h) ? log_std_cdf(h) : 0.0;
  return std::exp(log_std_pdf(z) - log_norm) / tg.stddev;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw InputError("log_sum_exp of an empty vector");
  if (values.size() == 1) return values[0];
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

}  // namespace rmes
