#pragma once

#include <Eigen/Dense>

#include <random>

namespace rmes {

using Rng = std::mt19937_64;

/// Axis-aligned box [lower, upper] in R^d.
struct Domain {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Domain() = default;
  Domain(Eigen::VectorXd lo, Eigen::VectorXd hi);

  static Domain unit(int dim);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(lower.size()); }
  [[nodiscard]] Eigen::VectorXd width() const { return upper - lower; }
  [[nodiscard]] bool contains(const Eigen::VectorXd& x, double slack = 0.0) const;

  /// Affine maps between the box and [0, 1]^d.
  [[nodiscard]] Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;

  [[nodiscard]] Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd sample_uniform(Rng& rng) const;

  /// Throws InputError unless d >= 1 and lower < upper componentwise.
  void validate() const;
};

/// Observed data: one input per row of `inputs`, paired with `outputs`.
class Dataset {
 public:
  explicit Dataset(Domain domain);
  Dataset(Domain domain, Eigen::MatrixXd inputs, Eigen::VectorXd outputs);

  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
  [[nodiscard]] const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  [[nodiscard]] const Eigen::VectorXd& outputs() const noexcept { return outputs_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(outputs_.size()); }
  [[nodiscard]] bool empty() const noexcept { return outputs_.size() == 0; }
  [[nodiscard]] int dim() const noexcept { return domain_.dim(); }

  void add(const Eigen::VectorXd& x, double y);

 private:
  void validate() const;

  Domain domain_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd outputs_;
};

}  // namespace rmes
