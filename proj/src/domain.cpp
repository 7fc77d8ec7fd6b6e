#include "rmes/domain.hpp"

#include "rmes/errors.hpp"

#include <cmath>
#include <string>

namespace rmes {

Domain::Domain(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  validate();
}

Domain Domain::unit(int dim) {
  return Domain(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

void Domain::validate() const {
  if (lower.size() < 1) throw InputError("domain must have at least one dimension");
  if (lower.size() != upper.size()) throw InputError("domain bounds have different dimensions");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      throw InputError("domain bound " + std::to_string(i) + " is not a finite interval with lower < upper");
    }
  }
}

bool Domain::contains(const Eigen::VectorXd& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double tol = slack * (upper[i] - lower[i]);
    if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
  }
  return true;
}

Eigen::VectorXd Domain::to_unit(const Eigen::VectorXd& x) const {
  return ((x - lower).array() / (upper - lower).array()).matrix();
}

Eigen::VectorXd Domain::from_unit(const Eigen::VectorXd& u) const {
  return lower + (u.array() * (upper - lower).array()).matrix();
}

Eigen::VectorXd Domain::clamp(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd Domain::sample_uniform(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd u(dim());
  for (int i = 0; i < dim(); ++i) u[i] = unif(rng);
  return from_unit(u);
}

Dataset::Dataset(Domain domain) : domain_(std::move(domain)), inputs_(0, domain_.dim()), outputs_(0) {
  domain_.validate();
}

Dataset::Dataset(Domain domain, Eigen::MatrixXd inputs, Eigen::VectorXd outputs)
    : domain_(std::move(domain)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  domain_.validate();
  validate();
}

void Dataset::validate() const {
  if (inputs_.rows() != outputs_.size()) {
    throw InputError("dataset has " + std::to_string(inputs_.rows()) + " inputs but " +
                     std::to_string(outputs_.size()) + " outputs");
  }
  if (inputs_.rows() > 0 && inputs_.cols() != domain_.dim()) {
    throw InputError("dataset inputs do not match the domain dimension");
  }
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    if (!domain_.contains(inputs_.row(i).transpose(), 1e-12)) {
      throw InputError("dataset input " + std::to_string(i) + " lies outside the domain");
    }
    if (!std::isfinite(outputs_[i])) throw InputError("dataset output " + std::to_string(i) + " is not finite");
  }
}

void Dataset::add(const Eigen::VectorXd& x, double y) {
  if (x.size() != domain_.dim()) throw InputError("point dimension does not match the dataset");
  if (!domain_.contains(x, 1e-12)) throw InputError("point lies outside the domain");
  if (!std::isfinite(y)) throw InputError("observation is not finite");
  const Eigen::Index n = outputs_.size();
  inputs_.conservativeResize(n + 1, domain_.dim());
  inputs_.row(n) = x.transpose();
  outputs_.conservativeResize(n + 1);
  outputs_[n] = y;
}

}  // namespace rmes
