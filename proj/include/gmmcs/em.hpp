#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmmcs/model.hpp"

namespace gmmcs {

struct EmResult {
  GmmSource model;
  std::vector<double> log_likelihoods;  // one entry per iteration, nondecreasing
};

/// Full-covariance EM over the columns of `data`, started from uniform
/// weights, randomly chosen sample means, and the global covariance. Every
/// M-step adds a 1e-6 ridge to keep class covariances positive definite;
/// after the final iteration each covariance is truncated to its top s_max
/// eigenvalues. Deterministic given the seed.
EmResult fit_em(const Eigen::MatrixXd& data, int num_components, int s_max, int iterations,
                std::uint64_t seed);

}  // namespace gmmcs
