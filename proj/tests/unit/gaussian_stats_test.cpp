#include "rmes/conformance/oracles.hpp"
#include "rmes/errors.hpp"
#include "rmes/gaussian_stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace rmes {
namespace {

TEST(StdNormal, KnownValues) {
  EXPECT_EQ(std_cdf(0.0), 0.5);
  EXPECT_NEAR(std_pdf(0.0), 0.3989423, 1e-7);
  EXPECT_NEAR(std_pdf(0.0), 1.0 / std::sqrt(2.0 * kPi), 1e-16);
}

TEST(StdNormal, Symmetry) {
  for (double z = -10.0; z <= 10.0; z += 0.37) {
    EXPECT_EQ(std_pdf(z), std_pdf(-z));
    EXPECT_NEAR(std_cdf(z) + std_cdf(-z), 1.0, 1e-15);
  }
}

TEST(StdNormal, LogCdfDeepTailMatchesExtendedPrecision) {
  for (const double z : {-8.5, -12.0, -20.0, -40.0}) {
    const long double exact = std::log(0.5L * std::erfc(static_cast<long double>(-z) / std::sqrt(2.0L)));
    EXPECT_NEAR(log_std_cdf(z), static_cast<double>(exact), 1e-10 * std::abs(static_cast<double>(exact))) << z;
  }
}

TEST(StdNormal, LogCdfFiniteFarInTail) {
  for (const double z : {-1e2, -1e3, -1e4, -1e6}) EXPECT_TRUE(std::isfinite(log_std_cdf(z))) << z;
  EXPECT_LT(log_std_cdf(-1e6), -4e11);
}

TEST(StdNormal, LogCdfBranchesAgree) {
  for (double z = -8.0; z <= 8.0; z += 0.01) EXPECT_LT(std::abs(log_std_cdf(z) - std::log(std_cdf(z))), 1e-12) << z;
  // Continuity across the switch to the continued fraction.
  EXPECT_NEAR(log_std_cdf(kLogCdfAsymptoticThreshold - 1e-12), log_std_cdf(kLogCdfAsymptoticThreshold), 1e-9);
}

TEST(StdNormal, RejectsNonFinite) {
  EXPECT_THROW((void)std_cdf(std::numeric_limits<double>::quiet_NaN()), InputError);
  EXPECT_THROW((void)log_std_cdf(std::numeric_limits<double>::infinity()), InputError);
  EXPECT_THROW((void)std_pdf(-std::numeric_limits<double>::infinity()), InputError);
}

TEST(InverseMillsRatio, MatchesDirectRatioAndTails) {
  for (double z = -5.0; z <= 5.0; z += 0.25) EXPECT_NEAR(inverse_mills_ratio(z), std_pdf(z) / std_cdf(z), 1e-12);
  // λ(z) ~ -z for z -> -inf
  EXPECT_NEAR(inverse_mills_ratio(-1e4) / 1e4, 1.0, 1e-6);
  EXPECT_NEAR(inverse_mills_ratio(40.0), 0.0, 1e-300);
}

TEST(TruncGaussEntropy, NoTruncation) {
  const UpperTruncatedGaussian tg{1.5, 2.0, std::numeric_limits<double>::infinity()};
  EXPECT_NEAR(trunc_gauss_entropy(tg), 0.5 * std::log(2.0 * kPi * std::exp(1.0) * 4.0), 1e-14);
}

TEST(TruncGaussEntropy, HalfNormalMatchesQuadrature) {
  const UpperTruncatedGaussian tg{0.0, 1.0, 0.0};
  EXPECT_NEAR(trunc_gauss_entropy(tg), conformance::trunc_gauss_entropy_quadrature(tg), 1e-8);
}

TEST(TruncGaussEntropy, ScaleLaw) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double mean = u(rng);
    const double sd = std::exp(u(rng));
    const double upper = mean + u(rng) * sd;
    const double lhs = trunc_gauss_entropy({mean, sd, upper});
    const double rhs = trunc_gauss_entropy({0.0, 1.0, (upper - mean) / sd}) + std::log(sd);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(TruncGaussEntropy, FiniteDeepInTail) {
  for (const double h : {-37.5, -50.0, -1e3, -1e5}) {
    const double e = trunc_gauss_entropy({0.0, 1.0, h});
    EXPECT_TRUE(std::isfinite(e)) << h;
  }
  // The truncated law tends to an exponential with rate |h|: entropy -> 1 - log|h|.
  EXPECT_NEAR(trunc_gauss_entropy({0.0, 1.0, -1e4}), 1.0 - std::log(1e4), 1e-6);
}

TEST(TruncGaussEntropy, MatchesQuadratureOnRandomParameterizations) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double pinned[] = {-6.0, 0.0, 6.0};
  for (int i = 0; i < 50; ++i) {
    const double mean = 3.0 * u(rng);
    const double sd = std::exp(1.5 * u(rng));
    const double h = i < 15 ? pinned[i % 3] : 4.0 * u(rng);
    const UpperTruncatedGaussian tg{mean, sd, mean + h * sd};
    EXPECT_NEAR(trunc_gauss_entropy(tg), conformance::trunc_gauss_entropy_quadrature(tg), 1e-7) << i;
    const double mass = conformance::integrate([&](double y) { return trunc_gauss_pdf(tg, y); }, mean - 40.0 * sd,
                                               tg.upper, std::vector<double>{mean, tg.upper - sd});
    EXPECT_NEAR(mass, 1.0, 1e-8) << i;
  }
}

TEST(TruncGaussPdf, Examples) {
  EXPECT_EQ(trunc_gauss_pdf({0.0, 1.0, 0.5}, 0.6), 0.0);
  EXPECT_NEAR(trunc_gauss_pdf({0.0, 1.0, 0.5}, 0.0), std_pdf(0.0) / std_cdf(0.5), 1e-15);
  const UpperTruncatedGaussian open{0.3, 1.7, std::numeric_limits<double>::infinity()};
  EXPECT_NEAR(trunc_gauss_pdf(open, -0.4), normal_pdf(-0.4, 0.3, 1.7 * 1.7), 1e-16);
}

TEST(TruncatedGaussian, RejectsInvalidParameters) {
  EXPECT_THROW((void)trunc_gauss_entropy({0.0, 0.0, 1.0}), InputError);
  EXPECT_THROW((void)trunc_gauss_entropy({0.0, -1.0, 1.0}), InputError);
}

TEST(LogSumExp, Examples) {
  const std::vector<double> one{-3.25};
  EXPECT_EQ(log_sum_exp(one), -3.25);
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_NEAR(log_sum_exp(zeros), 0.693147, 1e-6);
  const std::vector<double> v{1.0, -2.0, 0.5};
  std::vector<double> shifted;
  for (const double x : v) shifted.push_back(x + 1000.0);
  EXPECT_NEAR(log_sum_exp(shifted), log_sum_exp(v) + 1000.0, 1e-12);
  EXPECT_THROW((void)log_sum_exp(std::vector<double>{}), InputError);
}

}  // namespace
}  // namespace rmes
