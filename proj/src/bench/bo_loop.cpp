#include "rmes/bench/bo_loop.hpp"

#include "rmes/errors.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace rmes::bench {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Stream : std::uint32_t { init = 0, noise = 1, acquisition = 2 };

Rng derive_rng(std::uint64_t seed, int repetition, Stream stream, std::uint32_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(stream), tag};
  return Rng(seq);
}

KernelHyperparams initial_hyperparams(const BenchmarkConfig& config) {
  const Domain& domain = config.objective->domain();
  KernelHyperparams hyper;
  if (config.fixed_hyperparams) {
    hyper = *config.fixed_hyperparams;
  } else {
    hyper.lengthscales = 0.2 * domain.width();
    hyper.signal_variance = 1.0;
  }
  hyper.noise_variance = config.sigma_n * config.sigma_n;
  return hyper;
}

// Refreshes the hyperparameters per policy and conditions the model.
PosteriorModel refit(const BenchmarkConfig& config, const Dataset& data, KernelHyperparams& hyper, Rng& rng) {
  if (config.hyper_policy == HyperPolicy::mle_every_iteration && !data.empty()) {
    if (data.size() == 1) hyper.signal_variance = std::max(data.outputs().squaredNorm(), 1e-6);
    MleConfig mle;
    mle.starts = config.mle_starts;
    mle.max_iterations = config.mle_iterations;
    mle.fixed_noise_variance = config.sigma_n * config.sigma_n;
    mle.seed = rng();
    hyper = mle_fit(data, hyper, mle);
  }
  return fit(data, hyper);
}

class RepetitionRun {
 public:
  RepetitionRun(const BenchmarkConfig& config, AcquisitionKind kind, int repetition)
      : config_(config),
        spec_(*config.objective),
        domain_(spec_.domain()),
        kind_(kind),
        repetition_(repetition),
        data_(domain_),
        hyper_(initial_hyperparams(config)),
        init_rng_(derive_rng(config.seed, repetition, Stream::init)),
        noise_rng_(derive_rng(config.seed, repetition, Stream::noise)),
        acq_rng_(derive_rng(config.seed, repetition, Stream::acquisition, static_cast<std::uint32_t>(kind))),
        best_f_(-std::numeric_limits<double>::infinity()) {}

  std::vector<RunRecord> run() {
    int iteration = 0;
    try {
      for (int i = 0; i < config_.init_points; ++i) {
        const auto start = Clock::now();
        const Eigen::VectorXd x = domain_.sample_uniform(init_rng_);
        observe_and_record(x, 0, start);
      }
      for (iteration = 1; iteration <= config_.iterations; ++iteration) {
        const auto start = Clock::now();
        observe_and_record(next_query(), iteration, start);
      }
    } catch (const std::exception& e) {
      spdlog::warn("{} repetition {} aborted at iteration {}: {}", to_string(kind_), repetition_, iteration, e.what());
      RunRecord failure;
      failure.acquisition = kind_;
      failure.repetition = repetition_;
      failure.iteration = iteration;
      failure.x = Eigen::VectorXd::Constant(domain_.dim(), kNaN);
      failure.y = failure.simple_regret = failure.inference_regret = failure.distance_to_maximizer = kNaN;
      failure.failure = e.what();
      records_.push_back(std::move(failure));
    }
    return std::move(records_);
  }

 private:
  using Clock = std::chrono::steady_clock;

  Eigen::VectorXd next_query() {
    if (!model_) model_.emplace(fit(data_, hyper_));
    const double floor = 1e-8 * std::sqrt(hyper_.signal_variance);
    AcqContext ctx;
    ctx.incumbent_best = data_.empty() ? 0.0 : data_.outputs().maxCoeff();
    ctx.ucb_beta = config_.ucb_beta;
    ctx.stddev_floor = floor;
    if (kind_ == AcquisitionKind::mes || kind_ == AcquisitionKind::rmes) {
      ctx.max_values = sample_max_values(*model_, domain_, config_.max_value_count, acq_rng_, config_.sampler);
    }
    const ModelAcquisition acq(kind_, *model_, std::move(ctx));
    return optimize_acquisition(acq, domain_, config_.optimizer, acq_rng_);
  }

  void observe_and_record(const Eigen::VectorXd& x, int iteration, Clock::time_point start) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double eps = normal(noise_rng_);
    const double f = eval_objective(spec_, x);
    const double y = config_.sigma_n == 0.0 ? f : f + config_.sigma_n * eps;
    data_.add(x, y);
    best_f_ = std::max(best_f_, f);
    model_.emplace(refit(config_, data_, hyper_, acq_rng_));
    const double elapsed = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

    const GroundTruth& truth = spec_.truth();
    RunRecord r;
    r.acquisition = kind_;
    r.repetition = repetition_;
    r.iteration = iteration;
    r.x = x;
    r.y = y;
    if (truth.known()) {
      r.simple_regret = truth.max_value - best_f_;
      r.inference_regret = inference_regret(spec_, *model_, domain_, config_.optimizer);
      r.distance_to_maximizer = (x - truth.maximizer).norm();
    } else {
      r.simple_regret = r.inference_regret = r.distance_to_maximizer = kNaN;
    }
    r.wall_time_ms = config_.record_wall_time ? elapsed : 0.0;
    records_.push_back(std::move(r));
  }

  const BenchmarkConfig& config_;
  const ObjectiveSpec& spec_;
  const Domain& domain_;
  AcquisitionKind kind_;
  int repetition_;
  Dataset data_;
  KernelHyperparams hyper_;
  std::optional<PosteriorModel> model_;
  Rng init_rng_;
  Rng noise_rng_;
  Rng acq_rng_;
  double best_f_;
  std::vector<RunRecord> records_;
};

}  // namespace

void BenchmarkConfig::validate() const {
  if (!objective) throw InputError("benchmark configuration has no objective");
  if (acquisitions.empty()) throw InputError("benchmark configuration lists no acquisitions");
  if (!(sigma_n >= 0.0) || !std::isfinite(sigma_n)) throw InputError("sigma_n must be finite and nonnegative");
  if (iterations < 0) throw InputError("iterations must be nonnegative");
  if (repetitions < 1) throw InputError("repetitions must be at least 1");
  if (init_points < 1) throw InputError("init_points must be at least 1");
  if (max_value_count < 1) throw InputError("max_value_count must be at least 1");
  if (mle_starts < 1 || mle_iterations < 0) throw InputError("MLE budget must be positive");
  if (!(ucb_beta >= 0.0)) throw InputError("ucb_beta must be nonnegative");
  if (threads < 1) throw InputError("threads must be at least 1");
  if (hyper_policy == HyperPolicy::fixed) {
    if (!fixed_hyperparams) throw InputError("fixed hyperparameter policy needs hyperparameters");
    KernelHyperparams h = *fixed_hyperparams;
    h.noise_variance = sigma_n * sigma_n;
    h.validate(objective->domain().dim());
  }
  optimizer.validate();
}

double simple_regret(const ObjectiveSpec& spec, const Eigen::MatrixXd& queried) {
  if (queried.rows() == 0) throw InputError("simple regret needs at least one query");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < queried.rows(); ++i) best = std::max(best, eval_objective(spec, queried.row(i).transpose()));
  return spec.truth().max_value - best;
}

double inference_regret(const ObjectiveSpec& spec, const PosteriorModel& model, const Domain& domain,
                        const OptimConfig& config) {
  const Eigen::VectorXd x = argmax_posterior_mean(model, domain, config);
  return spec.truth().max_value - eval_objective(spec, x);
}

std::vector<RunRecord> run_repetition(const BenchmarkConfig& config, AcquisitionKind kind, int repetition) {
  config.validate();
  return RepetitionRun(config, kind, repetition).run();
}

std::vector<RunRecord> run_bo_loop(const BenchmarkConfig& config) {
  config.validate();
  struct Task {
    AcquisitionKind kind;
    int repetition;
  };
  std::vector<Task> tasks;
  for (const AcquisitionKind kind : config.acquisitions) {
    for (int r = 0; r < config.repetitions; ++r) tasks.push_back(Task{kind, r});
  }
  std::vector<std::vector<RunRecord>> results(tasks.size());
  auto work = [&](std::size_t i) {
    spdlog::info("{} repetition {}/{}", to_string(tasks[i].kind), tasks[i].repetition + 1, config.repetitions);
    results[i] = RepetitionRun(config, tasks[i].kind, tasks[i].repetition).run();
  };

  if (config.threads == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (int t = 0; t < config.threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) work(i);
      });
    }
  }

  std::vector<RunRecord> records;
  for (auto& chunk : results) {
    for (auto& r : chunk) records.push_back(std::move(r));
  }
  return records;
}

}  // namespace rmes::bench
