#pragma once

// Forward-mode dual numbers carrying partials with respect to a fixed number
// of seed variables. Used to differentiate acquisition values with respect to
// the predictive mean and latent variance.

#include "rmes/gaussian_stats.hpp"

#include <array>
#include <cmath>
#include <cstddef>

namespace rmes {

template <std::size_t N>
struct Dual {
  double value = 0.0;
  std::array<double, N> grad{};

  Dual() = default;
  Dual(double v) : value(v) {}  // NOLINT(google-explicit-constructor): constants promote implicitly

  static Dual variable(double v, std::size_t index) {
    Dual d(v);
    d.grad[index] = 1.0;
    return d;
  }

  Dual& operator+=(const Dual& o) {
    value += o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] += o.grad[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value -= o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] -= o.grad[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) grad[i] = grad[i] * o.value + value * o.grad[i];
    value *= o.value;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] = (grad[i] - value * inv * o.grad[i]) * inv;
    value *= inv;
    return *this;
  }
};

// Apply a scalar function with known derivative.
template <std::size_t N>
Dual<N> chain(const Dual<N>& x, double fx, double dfx) {
  Dual<N> r(fx);
  for (std::size_t i = 0; i < N; ++i) r.grad[i] = dfx * x.grad[i];
  return r;
}

template <std::size_t N> Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N> Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N> Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N> Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <std::size_t N> Dual<N> operator+(Dual<N> a, double b) { a.value += b; return a; }
template <std::size_t N> Dual<N> operator+(double a, Dual<N> b) { b.value += a; return b; }
template <std::size_t N> Dual<N> operator-(Dual<N> a, double b) { a.value -= b; return a; }
template <std::size_t N> Dual<N> operator-(double a, const Dual<N>& b) { return Dual<N>(a) - b; }
template <std::size_t N> Dual<N> operator-(const Dual<N>& a) { return 0.0 - a; }
template <std::size_t N> Dual<N> operator*(Dual<N> a, double b) {
  a.value *= b;
  for (auto& g : a.grad) g *= b;
  return a;
}
template <std::size_t N> Dual<N> operator*(double a, Dual<N> b) { return b * a; }
template <std::size_t N> Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N> Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) / b; }

template <std::size_t N> bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.value < b.value; }

template <std::size_t N> Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.value);
  return chain(x, e, e);
}
template <std::size_t N> Dual<N> log(const Dual<N>& x) { return chain(x, std::log(x.value), 1.0 / x.value); }
template <std::size_t N> Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.value);
  return chain(x, s, 0.5 / s);
}
template <std::size_t N> Dual<N> max(const Dual<N>& a, double b) { return a.value >= b ? a : Dual<N>(b); }

template <std::size_t N> Dual<N> std_pdf(const Dual<N>& z) {
  const double p = rmes::std_pdf(z.value);
  return chain(z, p, -z.value * p);
}
template <std::size_t N> Dual<N> std_cdf(const Dual<N>& z) {
  return chain(z, rmes::std_cdf(z.value), rmes::std_pdf(z.value));
}
template <std::size_t N> Dual<N> log_std_cdf(const Dual<N>& z) {
  return chain(z, rmes::log_std_cdf(z.value), rmes::inverse_mills_ratio(z.value));
}
template <std::size_t N> Dual<N> inverse_mills_ratio(const Dual<N>& z) {
  // d/dz [ψ/Ψ] = -λ (z + λ)
  const double lambda = rmes::inverse_mills_ratio(z.value);
  return chain(z, lambda, -lambda * (z.value + lambda));
}

inline double value_of(double x) { return x; }
template <std::size_t N> double value_of(const Dual<N>& x) { return x.value; }

}  // namespace rmes
