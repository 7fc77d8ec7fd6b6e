#pragma once

// Benchmark objectives for maximization. Minimization benchmarks are negated
// and every objective is shifted to zero mean over a regular grid. Ground
// truth (f*, x*) lives beside the objective and is read only by the metrics.

#include "rmes/domain.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace rmes::bench {

enum class ObjectiveKind { branin, eggholder, michalewicz2, gp_sample, dataset_mean, external, custom };

struct GroundTruth {
  double max_value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd maximizer;

  [[nodiscard]] bool known() const { return std::isfinite(max_value) && maximizer.size() > 0; }
};

class ObjectiveSpec {
 public:
  using Function = std::function<double(const Eigen::VectorXd&)>;

  ObjectiveSpec(std::string name, ObjectiveKind kind, Domain domain, Function raw, double mean_shift);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] ObjectiveKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
  [[nodiscard]] double mean_shift() const noexcept { return mean_shift_; }

  /// Noiseless, shifted objective value.
  [[nodiscard]] double evaluate(const Eigen::VectorXd& x) const;
  /// Objective before the mean shift.
  [[nodiscard]] double evaluate_unshifted(const Eigen::VectorXd& x) const { return raw_(x); }

  [[nodiscard]] const GroundTruth& truth() const noexcept { return truth_; }
  void set_truth(GroundTruth truth) { truth_ = std::move(truth); }

 private:
  std::string name_;
  ObjectiveKind kind_;
  Domain domain_;
  Function raw_;
  double mean_shift_;
  GroundTruth truth_;
};

/// Canonical minimization benchmarks (not negated).
[[nodiscard]] double branin(const Eigen::VectorXd& x);
[[nodiscard]] double eggholder(const Eigen::VectorXd& x);
[[nodiscard]] double michalewicz(const Eigen::VectorXd& x, double steepness = 10.0);

/// Mean over a regular grid with ~`budget` points (inclusive endpoints).
[[nodiscard]] double grid_mean(const ObjectiveSpec::Function& f, const Domain& domain, int budget = 256 * 256);

/// Argmax over a regular grid with ~`budget` points, refined by pattern search
/// from the best grid points.
[[nodiscard]] GroundTruth compute_truth(const ObjectiveSpec::Function& f, const Domain& domain,
                                       int budget = 512 * 512, int refine_starts = 10);

/// Analytic benchmarks on their canonical domains unless `domain` is given.
[[nodiscard]] ObjectiveSpec make_branin(const std::optional<Domain>& domain = std::nullopt);
[[nodiscard]] ObjectiveSpec make_eggholder(const std::optional<Domain>& domain = std::nullopt);
[[nodiscard]] ObjectiveSpec make_michalewicz2(const std::optional<Domain>& domain = std::nullopt);
/// A GP prior draw realized with random Fourier features. The lengthscale
/// is relative to the unit box, which maps onto `domain` when given.
[[nodiscard]] ObjectiveSpec make_gp_sample(std::uint64_t seed, double lengthscale = 0.33, double signal_variance = 1.0,
                                          int dim = 2, const std::optional<Domain>& domain = std::nullopt);
/// Shifts `f` to zero grid mean when `shift` is set and computes the ground
/// truth of the shifted function when `with_truth` is set.
[[nodiscard]] ObjectiveSpec build_objective(std::string name, ObjectiveKind kind, Domain domain,
                                           ObjectiveSpec::Function f, bool shift, bool with_truth);
/// Wraps an arbitrary function; shifts it to zero grid mean and computes truth when requested.
[[nodiscard]] ObjectiveSpec make_custom(std::string name, Domain domain, ObjectiveSpec::Function f, bool shift = true,
                                       bool with_truth = true);

[[nodiscard]] double eval_objective(const ObjectiveSpec& spec, const Eigen::VectorXd& x);
/// f(x) + σ_n ε with ε a standard normal draw from `rng`.
[[nodiscard]] double observe(const ObjectiveSpec& spec, const Eigen::VectorXd& x, double sigma_n, Rng& rng);

}  // namespace rmes::bench
