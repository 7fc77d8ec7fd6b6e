#include "rmes/acq_optimizer.hpp"
#include "rmes/acquisition.hpp"
#include "rmes/conformance/oracles.hpp"
#include "rmes/errors.hpp"
#include "rmes/gaussian_stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

namespace rmes {
namespace {

MaxValueSet max_values(std::vector<double> values) {
  MaxValueSet set;
  set.values = std::move(values);
  return set;
}

std::vector<double> nu_draws(int count, std::uint64_t seed) {
  Rng rng(seed);
  return draw_nu_block(count, rng).samples;
}

TEST(RectifiedDensity, StandardizedQuantities) {
  const RectifiedDensityParams p{0.5, 4.0, 1.0, 2.5};
  EXPECT_DOUBLE_EQ(p.h(), 1.0);
  EXPECT_DOUBLE_EQ(p.g(0.0), (5.0 * 2.5 - 0.5) / (2.0 * 1.0 * std::sqrt(5.0)));
  EXPECT_THROW((RectifiedDensityParams{0.0, 0.0, 1.0, 0.0}.validate()), InputError);
  EXPECT_THROW((RectifiedDensityParams{0.0, 1.0, -1.0, 0.0}.validate()), InputError);
}

TEST(RectifiedDensity, FactorsIntoGaussianTimesWeight) {
  const RectifiedDensityParams p{0.2, 0.7, 0.3, 1.1};
  for (const double y : {-3.0, -0.4, 0.9, 1.1, 2.5}) {
    const double gauss = std::exp(log_normal_pdf(y, p.mean, p.observation_variance()));
    EXPECT_NEAR(cond_density(p, y), gauss * weight(p, y), 1e-15);
    EXPECT_NEAR(log_cond_density(p, y), std::log(cond_density(p, y)), 1e-12);
    EXPECT_NEAR(log_weight(p, y), std::log(weight(p, y)), 1e-12);
  }
}

TEST(RectifiedDensity, WeightBoundedAndMonotone) {
  const RectifiedDensityParams p{0.0, 1.0, 0.25, 0.5};
  double previous = std::numeric_limits<double>::infinity();
  for (double y = -5.0; y <= 5.0; y += 0.25) {
    const double w = weight(p, y);
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0 / std::exp(log_std_cdf(p.h())) + 1e-12);
    EXPECT_LE(w, previous);
    previous = w;
  }
}

TEST(RectifiedDensity, VanishingNoiseApproachesTruncatedGaussian) {
  const RectifiedDensityParams p{0.0, 1.0, 1e-10, 0.8};
  const UpperTruncatedGaussian tg{0.0, 1.0, 0.8};
  for (const double y : {-1.5, 0.0, 0.7}) EXPECT_NEAR(cond_density(p, y), trunc_gauss_pdf(tg, y), 1e-4);
  EXPECT_LT(cond_density(p, 0.9), 1e-10);
}

TEST(RectifiedDensity, MassAndExpectedWeightAreOne) {
  for (const RectifiedDensityParams& p :
       {RectifiedDensityParams{0.0, 1.0, 0.01, -2.0}, RectifiedDensityParams{1.0, 0.1, 2.0, 1.5},
        RectifiedDensityParams{-3.0, 5.0, 1e-3, 4.0}}) {
    EXPECT_NEAR(conformance::cond_density_mass(p), 1.0, 1e-8);
    EXPECT_NEAR(conformance::expected_weight(p), 1.0, 1e-8);
  }
}

TEST(Mes, KnownValueAtZeroMargin) {
  const PredictiveStats s = PredictiveStats::from(0.0, 1.0, 0.1);
  EXPECT_NEAR(mes_value(s, max_values({0.0})), std::log(2.0), 1e-12);
}

TEST(Mes, AveragesOverMaxValues) {
  const PredictiveStats s = PredictiveStats::from(0.3, 0.8, 0.1);
  const double a = mes_value(s, max_values({0.5}));
  const double b = mes_value(s, max_values({1.7}));
  EXPECT_NEAR(mes_value(s, max_values({0.5, 1.7})), 0.5 * (a + b), 1e-15);
}

TEST(Mes, DecreasesWithMargin) {
  const PredictiveStats s = PredictiveStats::from(0.0, 1.0, 0.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double f = -3.0; f <= 6.0; f += 0.5) {
    const double v = mes_value(s, max_values({f}));
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, previous);
    previous = v;
  }
  EXPECT_LT(mes_value(s, max_values({10.0})), 1e-15);
}

TEST(Mes, IgnoresObservationNoise) {
  const MaxValueSet f = max_values({0.4, 1.2});
  EXPECT_EQ(mes_value(PredictiveStats::from(0.1, 0.5, 1e-4), f), mes_value(PredictiveStats::from(0.1, 0.5, 3.0), f));
}

TEST(Rmes, NonNegativeAndFinite) {
  const std::vector<double> nu = nu_draws(256, 1);
  const std::vector<double> fs{0.5, 0.9, 2.0};
  for (const double mean : {-2.0, 0.0, 0.6, 3.0}) {
    for (const double latent : {1e-6, 0.1, 2.0}) {
      for (const double noise : {1e-4, 0.09, 1.0}) {
        const double v = rmes_value(PredictiveStats::from(mean, latent, noise), fs, nu);
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
      }
    }
  }
}

TEST(Rmes, SingleMaxValueIsExactlyZero) {
  const std::vector<double> nu = nu_draws(64, 2);
  const std::vector<double> fs{0.7};
  EXPECT_EQ(rmes_value(PredictiveStats::from(0.0, 1.0, 0.1), fs, nu), 0.0);
}

TEST(Rmes, IdenticalMaxValuesGiveZero) {
  const std::vector<double> nu = nu_draws(64, 3);
  const std::vector<double> fs{0.7, 0.7, 0.7};
  EXPECT_NEAR(rmes_value(PredictiveStats::from(0.0, 1.0, 0.1), fs, nu), 0.0, 1e-15);
}

TEST(Rmes, ConvergesToMixtureInformation) {
  const std::vector<double> nu = nu_draws(100000, 4);
  const std::vector<double> fs{0.2, 0.6, 1.4};
  const double exact = conformance::mixture_mutual_information(0.1, 0.9, 0.05, fs);
  EXPECT_NEAR(rmes_value(PredictiveStats::from(0.1, 0.9, 0.05), fs, nu), exact, 1e-2);
}

TEST(Rmes, BelowMesForAnyNoise) {
  const std::vector<double> nu = nu_draws(20000, 5);
  const std::vector<double> fs{0.3, 0.8, 1.5};
  const PredictiveStats s = PredictiveStats::from(0.2, 1.0, 0.3);
  EXPECT_LT(rmes_value(s, fs, nu), mes_value(s, max_values(fs)) + 1e-2);
}

TEST(Rmes, TinyLatentVarianceWithFloor) {
  const std::vector<double> nu = nu_draws(64, 6);
  const std::vector<double> fs{0.5, 1.0};
  const double v = rmes_value(PredictiveStats::from(0.0, 0.0, 0.09), fs, nu, 1e-8);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(Ei, KnownValues) {
  EXPECT_NEAR(ei_value(PredictiveStats::from(0.0, 1.0, 0.0), 0.0), 1.0 / std::sqrt(2.0 * kPi), 1e-15);
  EXPECT_NEAR(ei_value(PredictiveStats::from(5.0, 1e-30, 0.0), 1.0), 4.0, 1e-12);
  EXPECT_GE(ei_value(PredictiveStats::from(-40.0, 1.0, 0.0), 0.0), 0.0);
}

TEST(Ucb, KnownValue) {
  EXPECT_DOUBLE_EQ(ucb_value(PredictiveStats::from(1.0, 4.0, 0.5), 3.0), 7.0);
  EXPECT_DOUBLE_EQ(ucb_value(PredictiveStats::from(1.0, 4.0, 0.5), 0.0), 1.0);
}

TEST(Sensitivity, MatchesFiniteDifferences) {
  const std::vector<double> nu = nu_draws(128, 7);
  const std::vector<double> fs{0.4, 1.1, 1.9};
  const double mean = 0.3;
  const double latent = 0.6;
  const double noise = 0.05;
  const double step = 1e-6;
  auto check = [&](auto value, const AcqSensitivity& s) {
    const double dm = (value(mean + step, latent) - value(mean - step, latent)) / (2 * step);
    const double dv = (value(mean, latent + step) - value(mean, latent - step)) / (2 * step);
    EXPECT_NEAR(s.value, value(mean, latent), 1e-12);
    EXPECT_NEAR(s.d_mean, dm, 1e-6 * std::max(1.0, std::abs(dm)));
    EXPECT_NEAR(s.d_latent_variance, dv, 1e-6 * std::max(1.0, std::abs(dv)));
  };
  const PredictiveStats base = PredictiveStats::from(mean, latent, noise);
  check([&](double m, double v) { return rmes_value(PredictiveStats::from(m, v, noise), fs, nu); },
        rmes_sensitivity(base, fs, nu, 0.0));
  check([&](double m, double v) { return mes_value(PredictiveStats::from(m, v, noise), max_values(fs)); },
        mes_sensitivity(base, fs, 0.0));
  check([&](double m, double v) { return ei_value(PredictiveStats::from(m, v, noise), 0.5); },
        ei_sensitivity(base, 0.5, 0.0));
  check([&](double m, double v) { return ucb_value(PredictiveStats::from(m, v, noise), 3.0); },
        ucb_sensitivity(base, 3.0, 0.0));
}

TEST(AcquisitionKind, NamesRoundTrip) {
  for (const AcquisitionKind k : {AcquisitionKind::rmes, AcquisitionKind::mes, AcquisitionKind::ei, AcquisitionKind::ucb}) {
    EXPECT_EQ(parse_acquisition_kind(to_string(k)), k);
  }
  EXPECT_THROW((void)parse_acquisition_kind("pes"), InputError);
}

TEST(ModelAcquisition, AgreesWithStatLevelFunctions) {
  Dataset data(Domain(Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(1.0, 1.0)));
  data.add(Eigen::Vector2d(0.1, 0.2), 0.3);
  data.add(Eigen::Vector2d(-0.6, 0.7), -0.4);
  KernelHyperparams h;
  h.lengthscales = Eigen::Vector2d(0.5, 0.8);
  h.noise_variance = 0.04;
  const PosteriorModel model = fit(data, h);
  AcqContext ctx;
  ctx.max_values = max_values({0.8, 1.3});
  Rng rng(9);
  ctx.nu_block = draw_nu_block(64, rng);
  ctx.incumbent_best = 0.3;
  const Eigen::Vector2d x(0.4, -0.3);
  const PredictiveStats s = model.predict(x);
  EXPECT_EQ(ModelAcquisition(AcquisitionKind::rmes, model, ctx).evaluate(x, ctx.nu_block),
            rmes_value(s, ctx.max_values.values, ctx.nu_block.samples));
  EXPECT_EQ(ModelAcquisition(AcquisitionKind::mes, model, ctx).evaluate(x, ctx.nu_block), mes_value(s, ctx.max_values));
  EXPECT_EQ(ModelAcquisition(AcquisitionKind::ei, model, ctx).evaluate(x, ctx.nu_block), ei_value(s, 0.3));
  EXPECT_EQ(ModelAcquisition(AcquisitionKind::ucb, model, ctx).evaluate(x, ctx.nu_block), ucb_value(s, 3.0));
  EXPECT_TRUE(ModelAcquisition(AcquisitionKind::rmes, model, ctx).uses_nu());
  EXPECT_FALSE(ModelAcquisition(AcquisitionKind::mes, model, ctx).uses_nu());
}

TEST(FunctionAcquisition, DefaultsToFiniteDifferenceGradient) {
  const FunctionAcquisition acq("quad", [](const Eigen::VectorXd& x) { return -x.squaredNorm(); });
  Eigen::VectorXd grad;
  const double v = acq.evaluate(Eigen::Vector2d(0.5, -1.0), NuBlock{}, grad);
  EXPECT_DOUBLE_EQ(v, -1.25);
  EXPECT_NEAR(grad[0], -1.0, 1e-6);
  EXPECT_NEAR(grad[1], 2.0, 1e-6);
}

}  // namespace
}  // namespace rmes
