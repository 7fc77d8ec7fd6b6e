#include "rmes/bench/scenarios.hpp"

#include "rmes/acq_optimizer.hpp"
#include "rmes/acquisition.hpp"
#include "rmes/errors.hpp"

#include <limits>

namespace rmes::bench {
namespace {

MisconceptionScenario make(std::string name, std::vector<double> xs, std::vector<double> ys, double lengthscale,
                           double signal_variance, double noise_variance, std::uint64_t max_value_seed,
                           std::uint64_t nu_seed) {
  MisconceptionScenario s;
  s.name = std::move(name);
  s.inputs = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  s.outputs = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  s.hyper.lengthscales = Eigen::VectorXd::Constant(1, lengthscale);
  s.hyper.signal_variance = signal_variance;
  s.hyper.noise_variance = noise_variance;
  s.max_value_seed = max_value_seed;
  s.nu_seed = nu_seed;
  return s;
}

ScenarioChoice describe(const PosteriorModel& model, double x, double value) {
  const PredictiveStats stats = model.predict(Eigen::VectorXd::Constant(1, x));
  return ScenarioChoice{x, value, stats.mean, stats.latent_stddev(), stats.observation_stddev()};
}

}  // namespace

MisconceptionScenario over_exploration_scenario() {
  return make("over_exploration", {0.49, 0.72}, {0.67, -1.18}, 0.13, 1.0, 1e-4, 1, 2);
}

MisconceptionScenario over_exploitation_scenario() {
  return make("over_exploitation", {0.38, 0.10}, {0.92, 0.92}, 0.42, 1.0, 0.09, 1, 2);
}

ScenarioOutcome evaluate_scenario(const MisconceptionScenario& scenario) {
  if (scenario.inputs.size() != scenario.outputs.size()) throw InputError("scenario inputs and outputs differ in length");
  if (scenario.grid_points < 2) throw InputError("scenario grid needs at least two points");
  const Domain domain = Domain::unit(1);
  const Dataset data(domain, scenario.inputs, scenario.outputs);
  const PosteriorModel model = fit(data, scenario.hyper);

  ScenarioOutcome out;
  Rng max_rng(scenario.max_value_seed);
  out.max_values = sample_max_values(model, domain, scenario.max_value_count, max_rng);
  Rng nu_rng(scenario.nu_seed);
  const NuBlock nu = draw_nu_block(scenario.nu_samples, nu_rng);

  AcqContext ctx;
  ctx.max_values = out.max_values;
  const ModelAcquisition mes(AcquisitionKind::mes, model, ctx);
  const ModelAcquisition rmes(AcquisitionKind::rmes, model, ctx);

  double best_mes = -std::numeric_limits<double>::infinity();
  double best_rmes = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scenario.grid_points; ++i) {
    const double x = static_cast<double>(i) / (scenario.grid_points - 1);
    const Eigen::VectorXd point = Eigen::VectorXd::Constant(1, x);
    const double m = mes.evaluate(point, nu);
    const double r = rmes.evaluate(point, nu);
    if (m > best_mes) {
      best_mes = m;
      out.mes = describe(model, x, m);
    }
    if (r > best_rmes) {
      best_rmes = r;
      out.rmes = describe(model, x, r);
    }
  }
  return out;
}

}  // namespace rmes::bench
