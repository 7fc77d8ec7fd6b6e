#include "rmes/bench/objectives.hpp"

#include "rmes/errors.hpp"
#include "rmes/gaussian_stats.hpp"
#include "rmes/gp_core.hpp"
#include "rmes/max_value_sampler.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

namespace rmes::bench {
namespace {

// Points per axis so that the full grid has about `budget` points.
int points_per_axis(int budget, int dim) {
  const double n = std::floor(std::pow(static_cast<double>(budget), 1.0 / dim) + 1e-9);
  return std::max(2, static_cast<int>(n));
}

// Visits every node of an inclusive regular grid.
template <class Visit>
void for_each_grid_point(const Domain& domain, int per_axis, Visit&& visit) {
  const int d = domain.dim();
  const Eigen::VectorXd step = domain.width() / static_cast<double>(per_axis - 1);
  std::vector<int> index(d, 0);
  Eigen::VectorXd x = domain.lower;
  while (true) {
    for (int j = 0; j < d; ++j) x[j] = index[j] == per_axis - 1 ? domain.upper[j] : domain.lower[j] + index[j] * step[j];
    visit(x);
    int j = 0;
    while (j < d && ++index[j] == per_axis) index[j++] = 0;
    if (j == d) break;
  }
}

// Compass search inside the box, starting from a grid node.
std::pair<Eigen::VectorXd, double> pattern_search(const ObjectiveSpec::Function& f, const Domain& domain,
                                                   Eigen::VectorXd x, double fx, Eigen::VectorXd step) {
  const Eigen::VectorXd tolerance = 1e-12 * domain.width();
  while ((step.array() > tolerance.array()).any()) {
    bool improved = false;
    for (int j = 0; j < domain.dim(); ++j) {
      for (const double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = x;
        trial[j] += sign * step[j];
        trial = domain.clamp(trial);
        const double ft = f(trial);
        if (ft > fx) {
          x = trial;
          fx = ft;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {x, fx};
}

Domain box(double lo0, double hi0, double lo1, double hi1) {
  return Domain(Eigen::Vector2d(lo0, lo1), Eigen::Vector2d(hi0, hi1));
}

}  // namespace

ObjectiveSpec::ObjectiveSpec(std::string name, ObjectiveKind kind, Domain domain, Function raw, double mean_shift)
    : name_(std::move(name)), kind_(kind), domain_(std::move(domain)), raw_(std::move(raw)), mean_shift_(mean_shift) {
  domain_.validate();
  if (!raw_) throw InputError("objective '" + name_ + "' has no function");
  if (!std::isfinite(mean_shift_)) throw InputError("objective '" + name_ + "' has a non-finite mean shift");
}

double ObjectiveSpec::evaluate(const Eigen::VectorXd& x) const { return raw_(x) - mean_shift_; }

double branin(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw InputError("branin is defined in two dimensions");
  constexpr double a = 1.0;
  constexpr double b = 5.1 / (4.0 * kPi * kPi);
  constexpr double c = 5.0 / kPi;
  constexpr double r = 6.0;
  constexpr double s = 10.0;
  constexpr double t = 1.0 / (8.0 * kPi);
  const double q = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * q * q + s * (1.0 - t) * std::cos(x[0]) + s;
}

double eggholder(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw InputError("eggholder is defined in two dimensions");
  const double u = x[1] + 47.0;
  return -u * std::sin(std::sqrt(std::abs(x[0] / 2.0 + u))) - x[0] * std::sin(std::sqrt(std::abs(x[0] - u)));
}

double michalewicz(const Eigen::VectorXd& x, double steepness) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::sin(static_cast<double>(i + 1) * x[i] * x[i] / kPi);
    sum += std::sin(x[i]) * std::pow(v, 2.0 * steepness);
  }
  return -sum;
}

double grid_mean(const ObjectiveSpec::Function& f, const Domain& domain, int budget) {
  domain.validate();
  const int per_axis = points_per_axis(budget, domain.dim());
  double sum = 0.0;
  double count = 0.0;
  for_each_grid_point(domain, per_axis, [&](const Eigen::VectorXd& x) {
    sum += f(x);
    count += 1.0;
  });
  return sum / count;
}

GroundTruth compute_truth(const ObjectiveSpec::Function& f, const Domain& domain, int budget, int refine_starts) {
  domain.validate();
  const int per_axis = points_per_axis(budget, domain.dim());
  struct Node {
    Eigen::VectorXd x;
    double value;
  };
  std::vector<Node> best;  // sorted descending, at most refine_starts entries
  for_each_grid_point(domain, per_axis, [&](const Eigen::VectorXd& x) {
    const double v = f(x);
    if (!std::isfinite(v)) return;
    if (static_cast<int>(best.size()) == refine_starts && v <= best.back().value) return;
    auto pos = std::find_if(best.begin(), best.end(), [&](const Node& n) { return v > n.value; });
    best.insert(pos, Node{x, v});
    if (static_cast<int>(best.size()) > refine_starts) best.pop_back();
  });
  if (best.empty()) throw NumericError("objective is not finite anywhere on the truth grid");

  const Eigen::VectorXd step = domain.width() / static_cast<double>(per_axis - 1);
  GroundTruth truth;
  truth.max_value = best.front().value;
  truth.maximizer = best.front().x;
  for (const Node& n : best) {
    auto [x, fx] = pattern_search(f, domain, n.x, n.value, step);
    if (fx > truth.max_value) {
      truth.max_value = fx;
      truth.maximizer = x;
    }
  }
  return truth;
}

ObjectiveSpec build_objective(std::string name, ObjectiveKind kind, Domain domain, ObjectiveSpec::Function f, bool shift,
                    bool with_truth) {
  domain.validate();
  const double mean = shift ? grid_mean(f, domain) : 0.0;
  ObjectiveSpec spec(std::move(name), kind, std::move(domain), std::move(f), mean);
  if (with_truth) {
    spec.set_truth(compute_truth([&spec](const Eigen::VectorXd& x) { return spec.evaluate(x); }, spec.domain()));
  }
  return spec;
}

ObjectiveSpec make_custom(std::string name, Domain domain, ObjectiveSpec::Function f, bool shift, bool with_truth) {
  return build_objective(std::move(name), ObjectiveKind::custom, std::move(domain), std::move(f), shift, with_truth);
}

ObjectiveSpec make_branin(const std::optional<Domain>& domain) {
  return build_objective("branin", ObjectiveKind::branin, domain.value_or(box(-5.0, 10.0, 0.0, 15.0)),
               [](const Eigen::VectorXd& x) { return -branin(x); }, true, true);
}

ObjectiveSpec make_eggholder(const std::optional<Domain>& domain) {
  return build_objective("eggholder", ObjectiveKind::eggholder, domain.value_or(box(-512.0, 512.0, -512.0, 512.0)),
               [](const Eigen::VectorXd& x) { return -eggholder(x); }, true, true);
}

ObjectiveSpec make_michalewicz2(const std::optional<Domain>& domain) {
  return build_objective("michalewicz2", ObjectiveKind::michalewicz2, domain.value_or(box(0.0, kPi, 0.0, kPi)),
               [](const Eigen::VectorXd& x) { return -michalewicz(x); }, true, true);
}

ObjectiveSpec make_gp_sample(std::uint64_t seed, double lengthscale, double signal_variance, int dim,
                             const std::optional<Domain>& domain) {
  if (dim < 1) throw InputError("gp_sample needs dimension >= 1");
  if (!(lengthscale > 0.0) || !(signal_variance > 0.0)) {
    throw InputError("gp_sample needs positive lengthscale and signal variance");
  }
  if (domain && domain->dim() != dim) throw InputError("gp_sample domain dimension does not match gp_dim");
  const Domain unit = Domain::unit(dim);
  KernelHyperparams hyper;
  hyper.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
  hyper.signal_variance = signal_variance;
  hyper.noise_variance = 0.0;
  Rng rng(seed);
  auto sample =
      std::make_shared<const PosteriorFunctionSample>(draw_posterior_function(fit(Dataset(unit), hyper), 1024, rng));
  const Domain target = domain.value_or(unit);
  return build_objective(
      "gp_sample", ObjectiveKind::gp_sample, target,
      [sample, target](const Eigen::VectorXd& x) { return (*sample)(target.to_unit(x)); }, true, true);
}

double eval_objective(const ObjectiveSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.domain().dim() || !spec.domain().contains(x, 1e-12)) {
    throw InputError("query point lies outside the domain of objective '" + spec.name() + "'");
  }
  return spec.evaluate(x);
}

double observe(const ObjectiveSpec& spec, const Eigen::VectorXd& x, double sigma_n, Rng& rng) {
  if (!(sigma_n >= 0.0)) throw InputError("noise standard deviation must be nonnegative");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double eps = normal(rng);
  const double f = eval_objective(spec, x);
  return sigma_n == 0.0 ? f : f + sigma_n * eps;
}

}  // namespace rmes::bench
