#include "rmes/conformance/checks.hpp"

#include "rmes/acq_optimizer.hpp"
#include "rmes/acquisition.hpp"
#include "rmes/bench/scenarios.hpp"
#include "rmes/conformance/oracles.hpp"
#include "rmes/gaussian_stats.hpp"
#include "rmes/gp_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <vector>

namespace rmes::conformance {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    out_ << v;
    return *this;
  }
  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_ = [] {
    std::ostringstream s;
    s << std::setprecision(3);
    return s;
  }();
};

double log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Fifty parameterizations; the first fifteen pin h to -6, 0 and 6 in turn.
std::vector<RectifiedDensityParams> density_instances() {
  Rng rng(20240611);
  std::vector<RectifiedDensityParams> out;
  const double pinned[] = {-6.0, 0.0, 6.0};
  for (int i = 0; i < 50; ++i) {
    RectifiedDensityParams p;
    p.mean = uniform(rng, -3.0, 3.0);
    p.latent_variance = log_uniform(rng, 1e-2, 10.0);
    p.noise_variance = log_uniform(rng, 1e-4, 10.0);
    const double h = i < 15 ? pinned[i % 3] : uniform(rng, -4.0, 4.0);
    p.max_value = p.mean + h * std::sqrt(p.latent_variance);
    out.push_back(p);
  }
  return out;
}

struct GradientFixture {
  Domain domain;
  PosteriorModel model;
  MaxValueSet max_values;
  double incumbent;
};

GradientFixture gradient_fixture(std::uint64_t seed) {
  Rng rng(seed);
  Domain domain(Eigen::Vector2d(-2.0, 0.0), Eigen::Vector2d(3.0, 5.0));
  Dataset data(domain);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 8; ++i) data.add(domain.sample_uniform(rng), normal(rng));
  KernelHyperparams hyper;
  hyper.lengthscales = Eigen::Vector2d(1.3, 1.7);
  hyper.signal_variance = 1.5;
  hyper.noise_variance = 0.01;
  PosteriorModel model = fit(data, hyper);
  MaxValueSet max_values;
  const double top = data.outputs().maxCoeff();
  for (int i = 0; i < 3; ++i) max_values.values.push_back(top + uniform(rng, 0.1, 1.0));
  return GradientFixture{domain, std::move(model), std::move(max_values), top};
}

}  // namespace

CheckOutcome check_density_normalization() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const RectifiedDensityParams& p : density_instances()) worst = std::max(worst, std::abs(cond_density_mass(p) - 1.0));
  const double elapsed = seconds_since(start);
  const bool ok = worst <= 1e-6 && elapsed < 10.0;
  return {ok, (Detail() << "max |mass - 1| = " << worst << " over 50 cases (tol 1e-6), " << elapsed << " s (limit 10 s)")
                  .str()};
}

CheckOutcome check_density_convolution() {
  const RectifiedDensityParams p{0.0, 4.0, 1.0, 0.5};
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double y = -8.0 + 12.0 * i / 19.0;
    worst = std::max(worst, std::abs(cond_density(p, y) - convolution_density(p, y)));
  }
  return {worst <= 1e-8, (Detail() << "max abs difference " << worst << " at 20 points (tol 1e-8)").str()};
}

CheckOutcome check_weight_normalization() {
  double worst = 0.0;
  for (const RectifiedDensityParams& p : density_instances()) worst = std::max(worst, std::abs(expected_weight(p) - 1.0));
  return {worst <= 1e-6, (Detail() << "max |E[w] - 1| = " << worst << " over 50 cases (tol 1e-6)").str()};
}

CheckOutcome check_mes_closed_form() {
  Rng rng(77);
  double worst_identity = 0.0;
  double worst_entropy = 0.0;
  const double pinned[] = {-6.0, -3.0, 0.0, 3.0, 6.0};
  for (int i = 0; i < 25; ++i) {
    const double mean = uniform(rng, -2.0, 2.0);
    const double stddev = log_uniform(rng, 0.05, 5.0);
    const double h = i < 5 ? pinned[i] : uniform(rng, -5.0, 5.0);
    const UpperTruncatedGaussian tg{mean, stddev, mean + h * stddev};

    MaxValueSet one;
    one.values = {tg.upper};
    const double mes = mes_value(PredictiveStats::from(mean, stddev * stddev, 0.01), one);
    const double gaussian = 0.5 * std::log(2.0 * kPi * std::exp(1.0) * stddev * stddev);
    worst_identity = std::max(worst_identity, std::abs(mes - (gaussian - trunc_gauss_entropy(tg))));
    worst_entropy = std::max(worst_entropy, std::abs(trunc_gauss_entropy(tg) - trunc_gauss_entropy_quadrature(tg)));
  }
  const bool ok = worst_identity <= 1e-12 && worst_entropy <= 1e-7;
  return {ok, (Detail() << "identity error " << worst_identity << " (tol 1e-12), entropy vs quadrature "
                        << worst_entropy << " (tol 1e-7)")
                  .str()};
}

CheckOutcome check_rmes_mutual_information() {
  const auto start = Clock::now();
  Rng rng(314159);
  const NuBlock nu = draw_nu_block(100000, rng);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double mean = uniform(rng, -1.0, 1.0);
    const double latent = log_uniform(rng, 0.05, 2.0);
    const double noise = log_uniform(rng, 0.01, 1.0);
    std::vector<double> fstars;
    for (int j = 0; j < 3; ++j) fstars.push_back(mean + std::sqrt(latent) * uniform(rng, -1.0, 3.0));
    const double estimate = rmes_value(PredictiveStats::from(mean, latent, noise), fstars, nu.samples);
    const double exact = mixture_mutual_information(mean, latent, noise, fstars);
    worst = std::max(worst, std::abs(estimate - exact));
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst <= 1e-2 && elapsed < 60.0;
  return {ok, (Detail() << "max abs error " << worst << " over 20 cases (tol 1e-2), " << elapsed << " s (limit 60 s)")
                  .str()};
}

CheckOutcome check_degenerate_cases() {
  Rng rng(99);
  const NuBlock nu = draw_nu_block(10000, rng);
  bool single_exact = true;
  for (int i = 0; i < 10; ++i) {
    const double f = uniform(rng, -1.0, 3.0);
    const PredictiveStats stats = PredictiveStats::from(uniform(rng, -1.0, 1.0), log_uniform(rng, 1e-3, 5.0), 0.1);
    const std::vector<double> one{f};
    single_exact = single_exact && rmes_value(stats, one, nu.samples) == 0.0;
  }
  double worst_tiny = 0.0;
  for (const double latent : {1e-12, 1e-14, 0.0}) {
    for (const double noise : {1e-4, 0.09, 1.0}) {
      const double mean = 0.3;
      const std::vector<double> fstars{mean + 0.5, mean + 1.0, mean + 2.0};
      const double v = rmes_value(PredictiveStats::from(mean, latent, noise), fstars, nu.samples);
      worst_tiny = std::max(worst_tiny, std::abs(v));
    }
  }
  const bool ok = single_exact && worst_tiny < 1e-6;
  return {ok, (Detail() << "|F|=1 exactly zero: " << (single_exact ? "yes" : "no") << ", max |value| at tiny variance "
                        << worst_tiny << " (tol 1e-6)")
                  .str()};
}

CheckOutcome check_acquisition_gradients() {
  Detail detail;
  bool ok = true;
  for (const AcquisitionKind kind : {AcquisitionKind::mes, AcquisitionKind::rmes, AcquisitionKind::ei,
                                     AcquisitionKind::ucb}) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const GradientFixture fx = gradient_fixture(1000 + static_cast<std::uint64_t>(i));
      AcqContext ctx;
      ctx.max_values = fx.max_values;
      ctx.incumbent_best = fx.incumbent;
      ctx.stddev_floor = 1e-8;
      const ModelAcquisition acq(kind, fx.model, ctx);
      Rng rng(5000 + static_cast<std::uint64_t>(i));
      const NuBlock nu = draw_nu_block(64, rng);
      const Eigen::VectorXd x = fx.domain.from_unit(Eigen::Vector2d(uniform(rng, 0.05, 0.95), uniform(rng, 0.05, 0.95)));
      Eigen::VectorXd analytic;
      (void)acq.evaluate(x, nu, analytic);
      const Eigen::VectorXd numeric = central_difference(
          [&](const Eigen::VectorXd& p) { return acq.evaluate(p, nu); }, x, 1e-5 * fx.domain.width());
      const double err = (analytic - numeric).norm() / std::max(numeric.norm(), 1e-6);
      worst = std::max(worst, err);
    }
    ok = ok && worst <= 1e-3;
    detail << to_string(kind) << " " << worst << "  ";
  }
  detail << "(max relative error over 20 cases each, tol 1e-3)";
  return {ok, detail.str()};
}

CheckOutcome check_gp_dense_oracle() {
  Rng rng(4242);
  double worst = 0.0;
  int cases = 0;
  for (const int n : {1, 5, 20, 50}) {
    for (const int d : {1, 2, 3}) {
      const Domain domain(Eigen::VectorXd::Constant(d, -1.0), Eigen::VectorXd::Constant(d, 2.0));
      Dataset data(domain);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < n; ++i) data.add(domain.sample_uniform(rng), normal(rng));
      KernelHyperparams hyper;
      hyper.lengthscales = Eigen::VectorXd(d);
      for (int j = 0; j < d; ++j) hyper.lengthscales[j] = log_uniform(rng, 0.3, 1.5);
      hyper.signal_variance = log_uniform(rng, 0.5, 2.0);
      hyper.noise_variance = hyper.signal_variance * log_uniform(rng, 1e-3, 1e-1);
      const PosteriorModel model = fit(data, hyper);
      const DenseGpOracle oracle(data, hyper);
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
      worst = std::max(worst, rel(log_marginal_likelihood(data, hyper), oracle.log_marginal_likelihood()));
      for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd x = domain.sample_uniform(rng);
        const PredictiveStats stats = model.predict(x);
        worst = std::max(worst, rel(stats.mean, oracle.mean(x)));
        worst = std::max(worst, rel(stats.latent_variance, oracle.latent_variance(x)));
      }
      ++cases;
    }
  }
  return {worst <= 1e-9, (Detail() << "max relative error " << worst << " over " << cases
                                   << " datasets, n <= 50 (tol 1e-9)")
                             .str()};
}

CheckOutcome check_misconception_scenarios() {
  const bench::ScenarioOutcome a = bench::evaluate_scenario(bench::over_exploration_scenario());
  const bench::ScenarioOutcome b = bench::evaluate_scenario(bench::over_exploitation_scenario());
  const double noise_b = bench::over_exploitation_scenario().hyper.noise_variance;
  const bool a_ok = a.mes.x != a.rmes.x && a.mes.latent_stddev > a.rmes.latent_stddev;
  const bool b_ok = b.mes.x != b.rmes.x && b.mes.latent_stddev < b.rmes.latent_stddev &&
                    noise_b > b.mes.latent_stddev * b.mes.latent_stddev;
  Detail detail;
  detail << "small noise: MES x=" << a.mes.x << " (sd " << a.mes.latent_stddev << "), RMES x=" << a.rmes.x << " (sd "
         << a.rmes.latent_stddev << "); large noise: MES x=" << b.mes.x << " (sd " << b.mes.latent_stddev
         << ", noise sd " << std::sqrt(noise_b) << "), RMES x=" << b.rmes.x << " (sd " << b.rmes.latent_stddev << ")";
  return {a_ok && b_ok, detail.str()};
}

std::vector<Check> conformance_checks() {
  return {
      {"density-normalization", "rectified density integrates to one", check_density_normalization},
      {"density-convolution", "rectified density equals truncated Gaussian plus noise", check_density_convolution},
      {"weight-normalization", "importance weight has unit mean", check_weight_normalization},
      {"mes-closed-form", "MES equals entropy difference; truncated entropy matches quadrature",
       check_mes_closed_form},
      {"rmes-mutual-information", "RMES matches mixture mutual information", check_rmes_mutual_information},
      {"degenerate-cases", "RMES vanishes for one max value or zero variance", check_degenerate_cases},
      {"acquisition-gradients", "acquisition gradients match central differences", check_acquisition_gradients},
      {"gp-dense-oracle", "GP posterior and likelihood match dense inverse", check_gp_dense_oracle},
      {"misconception-scenarios", "MES and RMES diverge in the diagnostic scenarios", check_misconception_scenarios},
  };
}

CheckResult run_check(const Check& check) {
  CheckResult result{check.id, check.description, false, {}, 0.0};
  const auto start = Clock::now();
  try {
    const CheckOutcome outcome = check.run();
    result.passed = outcome.passed;
    result.detail = outcome.detail;
  } catch (const std::exception& e) {
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = seconds_since(start);
  return result;
}

std::vector<CheckResult> run_conformance_suite(std::ostream& out) {
  std::vector<CheckResult> results;
  for (const Check& check : conformance_checks()) {
    results.push_back(run_check(check));
    const CheckResult& r = results.back();
    out << (r.passed ? "PASS " : "FAIL ") << r.id << ": " << r.detail << '\n' << std::flush;
  }
  return results;
}

}  // namespace rmes::conformance
