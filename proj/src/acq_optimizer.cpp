#include "rmes/acq_optimizer.hpp"

#include "rmes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace rmes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Candidate {
  Eigen::VectorXd x;
  double screened = kNegInf;
  bool from_scan = false;
};

double finite_or_neg_inf(double v) { return std::isfinite(v) ? v : kNegInf; }

// Indices of the k largest screened values; ties keep candidate order.
std::vector<std::size_t> top_k(const std::vector<Candidate>& candidates, std::size_t k) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a].screened > candidates[b].screened; });
  order.resize(std::min(k, order.size()));
  return order;
}

}  // namespace

NuBlock draw_nu_block(int count, Rng& rng) {
  if (count < 1) throw InputError("nu block needs at least one sample");
  NuBlock block;
  block.seed = rng();
  Rng stream(block.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  block.samples.resize(count);
  for (double& v : block.samples) v = normal(stream);
  return block;
}

AdamState AdamState::start(int dim, double step_size) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(dim);
  s.second_moment = Eigen::VectorXd::Zero(dim);
  s.step_size = step_size;
  s.validate();
  return s;
}

void AdamState::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw InputError("Adam decay rates must lie in [0, 1)");
  if (!(step_size > 0.0)) throw InputError("Adam step size must be positive");
  if (step_count < 0) throw InputError("Adam step count must be nonnegative");
}

AdamStep adam_step(const AdamState& state, const Eigen::VectorXd& x, const Eigen::VectorXd& gradient) {
  if (x.size() != gradient.size() || x.size() != state.first_moment.size()) {
    throw InputError("adam_step: dimension mismatch");
  }
  if (!gradient.allFinite()) return AdamStep{state, x, false};
  AdamStep out{state, x, true};
  AdamState& s = out.state;
  s.step_count += 1;
  s.first_moment = s.beta1 * s.first_moment + (1.0 - s.beta1) * gradient;
  s.second_moment = s.beta2 * s.second_moment + (1.0 - s.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, s.step_count);
  const double c2 = 1.0 - std::pow(s.beta2, s.step_count);
  const Eigen::ArrayXd m_hat = s.first_moment.array() / c1;
  const Eigen::ArrayXd v_hat = s.second_moment.array() / c2;
  out.x = (x.array() + s.step_size * m_hat / (v_hat.sqrt() + s.epsilon)).matrix();
  return out;
}

void OptimConfig::validate() const {
  if (restarts < 1 || steps < 0 || nu_samples < 1 || rerank_nu_samples < 1 || rerank_candidates < 1 ||
      scan_points < 1 || !(step_size > 0.0) || !(finite_difference_step > 0.0)) {
    throw InputError("optimizer configuration values must be positive");
  }
}

Eigen::VectorXd gradient_of(const Acquisition& acq, const Eigen::VectorXd& x, const NuBlock& nu) {
  Eigen::VectorXd g;
  (void)acq.evaluate(x, nu, g);
  if (!g.allFinite()) throw NumericError("gradient of " + acq.name() + " is not finite");
  return g;
}

OptimResult optimize_acquisition_detailed(const Acquisition& acq, const Domain& domain, const OptimConfig& config,
                                          Rng& rng) {
  config.validate();
  domain.validate();
  const Eigen::VectorXd width = domain.width();
  NuBlock nu;
  NuBlock rerank_nu;
  if (acq.uses_nu()) {
    nu = draw_nu_block(config.nu_samples, rng);
    rerank_nu = draw_nu_block(config.rerank_nu_samples, rng);
  }

  std::vector<Candidate> scan(config.scan_points);
  for (Candidate& c : scan) {
    c.x = domain.sample_uniform(rng);
    c.screened = finite_or_neg_inf(acq.evaluate(c.x, nu));
    c.from_scan = true;
  }

  std::vector<Candidate> iterates;
  for (const std::size_t start : top_k(scan, static_cast<std::size_t>(config.restarts))) {
    Eigen::VectorXd u = domain.to_unit(scan[start].x);
    AdamState state = AdamState::start(domain.dim(), config.step_size);
    for (int step = 0; step < config.steps; ++step) {
      const Eigen::VectorXd x = domain.from_unit(u);
      Eigen::VectorXd grad;
      const double value = acq.evaluate(x, nu, grad);
      iterates.push_back(Candidate{x, finite_or_neg_inf(value), false});
      const AdamStep next = adam_step(state, u, grad.cwiseProduct(width));
      if (!next.accepted) break;
      state = next.state;
      u = next.x.cwiseMax(0.0).cwiseMin(1.0);
    }
    const Eigen::VectorXd x = domain.from_unit(u);
    iterates.push_back(Candidate{x, finite_or_neg_inf(acq.evaluate(x, nu)), false});
  }

  // Restart iterates come first so that ties resolve to the lowest restart index.
  std::vector<Candidate> candidates = std::move(iterates);
  candidates.insert(candidates.end(), scan.begin(), scan.end());

  std::vector<std::size_t> shortlist = top_k(candidates, static_cast<std::size_t>(config.rerank_candidates));
  std::size_t best_scan = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].from_scan &&
        (best_scan == candidates.size() || candidates[i].screened > candidates[best_scan].screened)) {
      best_scan = i;
    }
  }
  if (std::find(shortlist.begin(), shortlist.end(), best_scan) == shortlist.end()) shortlist.push_back(best_scan);
  std::sort(shortlist.begin(), shortlist.end());

  OptimResult result;
  result.value = kNegInf;
  result.best_scan_value = kNegInf;
  for (const std::size_t idx : shortlist) {
    const Candidate& c = candidates[idx];
    const double value = acq.uses_nu() ? finite_or_neg_inf(acq.evaluate(c.x, rerank_nu)) : c.screened;
    if (idx == best_scan) result.best_scan_value = value;
    if (value > result.value) {
      result.value = value;
      result.x = c.x;
    }
  }
  if (result.value == kNegInf) {
    throw NumericError("acquisition " + acq.name() + " produced no finite value over the domain");
  }
  return result;
}

Eigen::VectorXd optimize_acquisition(const Acquisition& acq, const Domain& domain, const OptimConfig& config,
                                     Rng& rng) {
  return optimize_acquisition_detailed(acq, domain, config, rng).x;
}

Eigen::VectorXd argmax_posterior_mean(const PosteriorModel& model, const Domain& domain, const OptimConfig& config) {
  config.validate();
  const Eigen::VectorXd width = domain.width();
  // Fixed stream: the result depends only on the model.
  Rng rng(0x6d65616e5f6d6178ULL);

  std::vector<Candidate> candidates;
  for (int i = 0; i < model.dataset().size(); ++i) {
    Eigen::VectorXd x = domain.clamp(model.dataset().inputs().row(i).transpose());
    candidates.push_back(Candidate{x, model.posterior_mean(x), false});
  }
  for (int i = 0; i < config.scan_points; ++i) {
    Eigen::VectorXd x = domain.sample_uniform(rng);
    candidates.push_back(Candidate{x, model.posterior_mean(x), true});
  }

  Candidate best = candidates.front();
  for (const Candidate& c : candidates) {
    if (c.screened > best.screened) best = c;
  }
  if (model.dataset().empty()) return best.x;

  const int iterations = std::max(2 * config.steps, 50);
  for (const std::size_t start : top_k(candidates, static_cast<std::size_t>(config.restarts))) {
    Eigen::VectorXd x = candidates[start].x;
    Eigen::VectorXd grad;
    double fx = model.posterior_mean(x, &grad);
    double step = 0.05;
    for (int it = 0; it < iterations; ++it) {
      const Eigen::VectorXd unit_grad = grad.cwiseProduct(width);
      const double norm = unit_grad.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) break;
      const Eigen::VectorXd trial = domain.clamp(x + (step / norm) * unit_grad.cwiseProduct(width));
      Eigen::VectorXd trial_grad;
      const double ft = model.posterior_mean(trial, &trial_grad);
      if (ft > fx) {
        x = trial;
        fx = ft;
        grad = std::move(trial_grad);
        step = std::min(2.0 * step, 0.5);
      } else {
        step *= 0.5;
        if (step < 1e-12) break;
      }
    }
    if (fx > best.screened) best = Candidate{x, fx, false};
  }
  return best.x;
}

}  // namespace rmes
