#include "rmes/errors.hpp"
#include "rmes/gp_core.hpp"
#include "rmes/max_value_sampler.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmes {
namespace {

KernelHyperparams hyper(int d, double ell, double signal, double noise) {
  KernelHyperparams h;
  h.lengthscales = Eigen::VectorXd::Constant(d, ell);
  h.signal_variance = signal;
  h.noise_variance = noise;
  return h;
}

PosteriorModel small_model() {
  Dataset data(Domain(Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(1.0, 3.0)));
  data.add(Eigen::Vector2d(-0.5, 1.0), 0.4);
  data.add(Eigen::Vector2d(0.3, 2.5), -0.2);
  data.add(Eigen::Vector2d(0.8, 0.2), 1.1);
  return fit(data, hyper(2, 0.6, 1.0, 1e-4));
}

Eigen::MatrixXd unit_grid_1d(int n) {
  Eigen::MatrixXd grid(n, 1);
  for (int i = 0; i < n; ++i) grid(i, 0) = static_cast<double>(i) / (n - 1);
  return grid;
}

TEST(PosteriorFunctionSample, PriorMomentsMatchKernel) {
  const Domain domain = Domain::unit(1);
  const PosteriorModel prior = fit(Dataset(domain), hyper(1, 0.3, 2.0, 0.0));
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.2);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 0.5);
  constexpr int kDraws = 3000;
  double sum_aa = 0.0;
  double sum_ab = 0.0;
  Rng rng(3);
  for (int i = 0; i < kDraws; ++i) {
    const PosteriorFunctionSample f = draw_posterior_function(prior, 512, rng);
    sum_aa += f(a) * f(a);
    sum_ab += f(a) * f(b);
  }
  EXPECT_NEAR(sum_aa / kDraws, 2.0, 0.15);
  EXPECT_NEAR(sum_ab / kDraws, se_kernel(a, b, prior.hyperparams()), 0.15);
}

TEST(PosteriorFunctionSample, InterpolatesNoiselessData) {
  const PosteriorModel model = small_model();
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    const PosteriorFunctionSample f = draw_posterior_function(model, 1024, rng);
    for (int j = 0; j < model.dataset().size(); ++j) {
      EXPECT_NEAR(f(model.dataset().inputs().row(j).transpose()), model.dataset().outputs()[j], 0.05);
    }
  }
}

TEST(PosteriorFunctionSample, GradientMatchesFiniteDifferences) {
  const PosteriorModel model = small_model();
  Rng rng(5);
  const PosteriorFunctionSample f = draw_posterior_function(model, 256, rng);
  const Eigen::Vector2d x(0.1, 1.7);
  Eigen::VectorXd grad;
  EXPECT_EQ(f.value_and_gradient(x, grad), f(x));
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    EXPECT_NEAR(grad[i], (f(up) - f(down)) / 2e-6, 1e-5 * std::max(1.0, std::abs(grad[i])));
  }
  Eigen::MatrixXd points(2, 2);
  points << 0.1, 1.7, -0.9, 0.4;
  const Eigen::VectorXd v = f.values(points);
  EXPECT_NEAR(v[0], f(points.row(0).transpose()), 1e-13);
  EXPECT_NEAR(v[1], f(points.row(1).transpose()), 1e-13);
}

TEST(MaximizeFunctionSample, DominatesVisitedPoints) {
  const PosteriorModel model = small_model();
  Rng rng(6);
  const PosteriorFunctionSample f = draw_posterior_function(model, 512, rng);
  const SampleMaximum best = maximize_function_sample(f, model.domain(), 5, 100, rng);
  EXPECT_TRUE(model.domain().contains(best.argmax));
  EXPECT_EQ(best.value, f(best.argmax));
  Rng probe(7);
  for (int i = 0; i < 2000; ++i) EXPECT_GE(best.value, f(model.domain().sample_uniform(probe)) - 1e-12);
}

TEST(SampleMaxValues, AboveObservationsWhenNoiseless) {
  const PosteriorModel model = small_model();
  Rng rng(8);
  const MaxValueSet set = sample_max_values(model, model.domain(), 10, rng);
  ASSERT_EQ(set.size(), 10U);
  ASSERT_EQ(set.argmax_probes.size(), 10U);
  const double y_max = model.dataset().outputs().maxCoeff();
  for (const double v : set.values) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, y_max - 0.05);
  }
  EXPECT_NO_THROW(set.validate());
}

TEST(SampleMaxValues, ReproducibleFromSeed) {
  const PosteriorModel model = small_model();
  Rng a(11);
  Rng b(11);
  EXPECT_EQ(sample_max_values(model, model.domain(), 4, a), sample_max_values(model, model.domain(), 4, b));
  Rng c(12);
  Rng d(11);
  EXPECT_NE(sample_max_values(model, model.domain(), 4, c).values,
            sample_max_values(model, model.domain(), 4, d).values);
}

TEST(SampleMaxValues, RejectsBadCount) {
  const PosteriorModel model = small_model();
  Rng rng(1);
  EXPECT_THROW((void)sample_max_values(model, model.domain(), 0, rng), InputError);
}

TEST(MaxValueSet, SerializationRoundTripsExactly) {
  MaxValueSet set;
  set.values = {0.1, 1.0 / 3.0, -2.718281828459045, 1e-300};
  set.seed = 0xdeadbeefcafeULL;
  set.argmax_probes = {Eigen::Vector2d(0.1, 0.7), Eigen::Vector2d(1.0 / 7.0, -3.0), Eigen::Vector2d(0, 0),
                       Eigen::Vector2d(5, 6)};
  const MaxValueSet back = MaxValueSet::deserialize(set.serialize());
  EXPECT_EQ(back, set);
  EXPECT_EQ(back.values[1], 1.0 / 3.0);
}

TEST(MaxValueSet, RejectsNonFinite) {
  MaxValueSet set;
  set.values = {1.0, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(set.validate(), InputError);
  EXPECT_THROW((void)MaxValueSet::deserialize("not json"), ParseError);
}

TEST(Gumbel, QuantilesMatchProductOfMarginals) {
  Dataset data(Domain::unit(1));
  data.add(Eigen::VectorXd::Constant(1, 0.3), 0.5);
  data.add(Eigen::VectorXd::Constant(1, 0.8), -0.2);
  const PosteriorModel model = fit(data, hyper(1, 0.2, 1.0, 0.01));
  const Eigen::MatrixXd grid = unit_grid_1d(101);
  const GumbelFit g = fit_max_value_gumbel(model, grid);
  EXPECT_GT(g.scale, 0.0);
  for (const double q : {0.25, 0.75}) {
    const double z = g.quantile(q);
    double log_p = 0.0;
    for (int i = 0; i < grid.rows(); ++i) {
      const PredictiveStats s = model.predict(grid.row(i).transpose());
      log_p += std::log(0.5 * std::erfc(-(z - s.mean) / std::sqrt(s.latent_variance) / std::sqrt(2.0)));
    }
    EXPECT_NEAR(std::exp(log_p), q, 1e-6);
  }
  EXPECT_GT(g.quantile(0.9), g.quantile(0.1));
}

TEST(Gumbel, SingleStandardNormalPoint) {
  const PosteriorModel prior = fit(Dataset(Domain::unit(1)), hyper(1, 0.2, 1.0, 0.0));
  const Eigen::MatrixXd grid = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const GumbelFit g = fit_max_value_gumbel(prior, grid);
  EXPECT_NEAR(g.quantile(0.25), -0.6744897501960817, 1e-9);
  EXPECT_NEAR(g.quantile(0.75), 0.6744897501960817, 1e-9);
  Rng rng(1);
  constexpr int kCount = 100000;
  const MaxValueSet set = gumbel_sample_max_values(prior, grid, kCount, rng);
  double sum = 0.0;
  double sq = 0.0;
  for (const double v : set.values) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / kCount;
  const double se = std::sqrt((sq / kCount - mean * mean) / kCount);
  EXPECT_LT(std::abs(mean - g.mean()), 3.0 * se);
}

TEST(Gumbel, SamplesMostlyAboveNoiselessObservation) {
  Dataset data(Domain::unit(1));
  data.add(Eigen::VectorXd::Constant(1, 0.5), 1.0);
  const PosteriorModel model = fit(data, hyper(1, 0.2, 1.0, 1e-4));
  Rng rng(2);
  const MaxValueSet set = gumbel_sample_max_values(model, unit_grid_1d(101), 200, rng);
  ASSERT_EQ(set.size(), 200U);
  const auto below = std::count_if(set.values.begin(), set.values.end(), [](double v) { return v < 0.99; });
  EXPECT_LT(below, 5);
}

}  // namespace
}  // namespace rmes
