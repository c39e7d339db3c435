#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dwellopt/error.hpp"
#include "dwellopt/moea/linkage_tree.hpp"
#include "dwellopt/rng.hpp"

namespace dwellopt::moea {

/// Normal distribution over one linkage set.
struct SetDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // maximum likelihood, possibly regularized
  Eigen::MatrixXd cholesky;    // lower factor of `covariance`
  double regularization = 0.0; // diagonal term that was added, 0 if none
};

/// One distribution per linkage set, estimated from a cluster.
struct ClusterModel {
  std::vector<SetDistribution> sets;
};

/// Maximum-likelihood mean and covariance (divisor n) of `samples` restricted
/// to `indices`. A diagonal term 1e-6 * trace / |indices| is added, and
/// multiplied by ten, until the Cholesky factorization succeeds.
inline SetDistribution estimate_set(std::span<const std::vector<double>* const> samples, std::span<const std::size_t> indices) {
  if (samples.empty()) throw ContractError("estimate_set: empty cluster");
  const auto k = static_cast<Eigen::Index>(indices.size());
  const double n = static_cast<double>(samples.size());
  SetDistribution d;
  d.mean = Eigen::VectorXd::Zero(k);
  for (const auto* s : samples)
    for (Eigen::Index a = 0; a < k; ++a) d.mean[a] += (*s)[indices[static_cast<std::size_t>(a)]];
  d.mean /= n;
  d.covariance = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd centered(k);
  for (const auto* s : samples) {
    for (Eigen::Index a = 0; a < k; ++a) centered[a] = (*s)[indices[static_cast<std::size_t>(a)]] - d.mean[a];
    d.covariance.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  d.covariance = d.covariance.selfadjointView<Eigen::Lower>();
  d.covariance /= n;

  Eigen::LLT<Eigen::MatrixXd> llt(d.covariance);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
    d.cholesky = llt.matrixL();
    return d;
  }
  double lambda = std::max(1e-6 * d.covariance.trace() / static_cast<double>(k), 1e-12);
  for (;;) {
    Eigen::MatrixXd reg = d.covariance;
    reg.diagonal().array() += lambda;
    llt.compute(reg);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
      d.covariance = std::move(reg);
      d.cholesky = llt.matrixL();
      d.regularization = lambda;
      return d;
    }
    lambda *= 10.0;
  }
}

inline ClusterModel estimate_distributions(std::span<const std::vector<double>* const> samples, const LinkageTree& tree) {
  ClusterModel m;
  m.sets.reserve(tree.size());
  for (const auto& set : tree.sets) m.sets.push_back(estimate_set(samples, set));
  return m;
}

/// Draws one vector from the distribution with its covariance scaled by
/// `multiplier`: mean + sqrt(multiplier) L z, z standard normal.
inline void sample_set(const SetDistribution& d, Rng& rng, Eigen::VectorXd& out, double multiplier = 1.0) {
  const Eigen::Index k = d.mean.size();
  Eigen::VectorXd z(k);
  for (Eigen::Index a = 0; a < k; ++a) z[a] = rng.normal();
  if (multiplier != 1.0) z *= std::sqrt(multiplier);
  out.noalias() = d.mean + d.cholesky.triangularView<Eigen::Lower>() * z;
}

/// Largest absolute coordinate of L^-1 (point - mean): how far, in standard
/// deviations, `point` lies from the mean.
inline double standardized_distance(const SetDistribution& d, const Eigen::VectorXd& point) {
  const Eigen::VectorXd z = d.cholesky.triangularView<Eigen::Lower>().solve(point - d.mean);
  return z.cwiseAbs().maxCoeff();
}

}  // namespace dwellopt::moea
