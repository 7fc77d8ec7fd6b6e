#include "rmes/acq_optimizer.hpp"
#include "rmes/acquisition.hpp"
#include "rmes/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace rmes {
namespace {

TEST(NuBlock, DrawsAreStandardNormal) {
  Rng rng(1);
  const NuBlock block = draw_nu_block(20000, rng);
  ASSERT_EQ(block.size(), 20000U);
  double sum = 0.0;
  double sq = 0.0;
  for (const double v : block.samples) {
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / 20000.0, 0.0, 0.03);
  EXPECT_NEAR(sq / 20000.0, 1.0, 0.05);
  Rng again(1);
  EXPECT_EQ(draw_nu_block(20000, again).samples, block.samples);
}

TEST(AdamStep, FirstStepMovesByStepSize) {
  const AdamState start = AdamState::start(2, 0.05);
  const AdamStep next = adam_step(start, Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(3.0, -0.2));
  ASSERT_TRUE(next.accepted);
  EXPECT_NEAR(next.x[0], 0.55, 1e-6);
  EXPECT_NEAR(next.x[1], 0.45, 1e-6);
  EXPECT_EQ(next.state.step_count, 1);
}

TEST(AdamStep, ZeroGradientLeavesPointUnchanged) {
  const Eigen::VectorXd x = Eigen::Vector2d(0.2, 0.7);
  const AdamStep next = adam_step(AdamState::start(2), x, Eigen::VectorXd::Zero(2));
  EXPECT_TRUE(next.accepted);
  EXPECT_EQ(next.x, x);
}

TEST(AdamStep, RejectsNonFiniteGradient) {
  const AdamState start = AdamState::start(1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.3);
  const AdamStep next = adam_step(start, x, Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN()));
  EXPECT_FALSE(next.accepted);
  EXPECT_EQ(next.x, x);
  EXPECT_EQ(next.state.step_count, 0);
}

TEST(AdamStep, ConvergesOnQuadratic) {
  AdamState state = AdamState::start(2, 0.05);
  Eigen::VectorXd x = Eigen::Vector2d(0.9, 0.1);
  const Eigen::Vector2d target(0.3, 0.6);
  for (int i = 0; i < 2000; ++i) {
    const AdamStep next = adam_step(state, x, -2.0 * (x - target));
    state = next.state;
    x = next.x;
  }
  EXPECT_LT((x - target).norm(), 1e-3);
}

TEST(OptimConfig, Validation) {
  OptimConfig config;
  EXPECT_NO_THROW(config.validate());
  config.restarts = 0;
  EXPECT_THROW(config.validate(), InputError);
}

TEST(OptimizeAcquisition, FindsInteriorMaximum) {
  const Domain domain(Eigen::Vector2d(-2.0, 0.0), Eigen::Vector2d(3.0, 5.0));
  const Eigen::Vector2d peak(1.2, 3.7);
  const FunctionAcquisition acq("bump", [&](const Eigen::VectorXd& x) { return std::exp(-(x - peak).squaredNorm()); });
  OptimConfig config;
  config.rerank_nu_samples = 16;
  Rng rng(2);
  const OptimResult r = optimize_acquisition_detailed(acq, domain, config, rng);
  EXPECT_LT((r.x - peak).norm(), 1e-2);
  EXPECT_GE(r.value, r.best_scan_value);
}

TEST(OptimizeAcquisition, StaysInsideBoxForBoundaryMaximum) {
  const Domain domain(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 2.0));
  const FunctionAcquisition acq("linear", [](const Eigen::VectorXd& x) { return x[0] + x[1]; },
                                [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)); });
  OptimConfig config;
  config.rerank_nu_samples = 16;
  Rng rng(3);
  const Eigen::VectorXd x = optimize_acquisition(acq, domain, config, rng);
  EXPECT_TRUE(domain.contains(x));
  EXPECT_NEAR(x[0], 1.0, 1e-3);
  EXPECT_NEAR(x[1], 2.0, 1e-3);
}

TEST(OptimizeAcquisition, DeterministicForSeed) {
  Dataset data(Domain::unit(2));
  data.add(Eigen::Vector2d(0.2, 0.3), 0.5);
  data.add(Eigen::Vector2d(0.7, 0.8), 0.9);
  KernelHyperparams h;
  h.lengthscales = Eigen::Vector2d(0.2, 0.2);
  h.noise_variance = 1e-4;
  const PosteriorModel model = fit(data, h);
  AcqContext ctx;
  ctx.max_values.values = {1.2, 1.6, 2.0};
  ctx.stddev_floor = 1e-8;
  const ModelAcquisition acq(AcquisitionKind::rmes, model, ctx);
  OptimConfig config;
  config.restarts = 3;
  config.steps = 30;
  config.rerank_nu_samples = 500;
  Rng a(4);
  Rng b(4);
  EXPECT_EQ(optimize_acquisition(acq, model.domain(), config, a), optimize_acquisition(acq, model.domain(), config, b));
}

TEST(GradientOf, ThrowsOnNonFinite) {
  const FunctionAcquisition acq("nan", [](const Eigen::VectorXd&) { return 0.0; },
                                [](const Eigen::VectorXd&) {
                                  return Eigen::VectorXd(Eigen::Vector2d(std::numeric_limits<double>::quiet_NaN(), 0.0));
                                });
  EXPECT_THROW((void)gradient_of(acq, Eigen::Vector2d(0.5, 0.5), NuBlock{}), NumericError);
}

TEST(ArgmaxPosteriorMean, FindsPeakOfSmoothMean) {
  Dataset data(Domain::unit(1));
  for (const double x : {0.1, 0.3, 0.5, 0.7, 0.9}) data.add(Eigen::VectorXd::Constant(1, x), -(x - 0.62) * (x - 0.62));
  KernelHyperparams h;
  h.lengthscales = Eigen::VectorXd::Constant(1, 0.3);
  h.noise_variance = 1e-6;
  const PosteriorModel model = fit(data, h);
  const Eigen::VectorXd best = argmax_posterior_mean(model, model.domain());
  EXPECT_NEAR(best[0], 0.62, 0.02);
  Rng probe(5);
  for (int i = 0; i < 500; ++i) {
    EXPECT_GE(model.posterior_mean(best), model.posterior_mean(model.domain().sample_uniform(probe)) - 1e-12);
  }
  EXPECT_EQ(argmax_posterior_mean(model, model.domain()), best);
}

TEST(ArgmaxPosteriorMean, MatchesDenseGrid) {
  Dataset data(Domain(Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, 3.0)));
  Rng rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 8; ++i) data.add(data.domain().sample_uniform(rng), normal(rng));
  KernelHyperparams h;
  h.lengthscales = Eigen::VectorXd::Constant(1, 0.6);
  h.noise_variance = 0.01;
  const PosteriorModel model = fit(data, h);
  double grid_best = -std::numeric_limits<double>::infinity();
  double grid_x = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = -2.0 + 5.0 * i / 9999.0;
    const double m = model.posterior_mean(Eigen::VectorXd::Constant(1, x));
    if (m > grid_best) {
      grid_best = m;
      grid_x = x;
    }
  }
  EXPECT_NEAR(argmax_posterior_mean(model, model.domain())[0], grid_x, 1e-3 * 5.0);
}

}  // namespace
}  // namespace rmes
