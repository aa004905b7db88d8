#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmmcs/model.hpp"
#include "gmmcs/rng.hpp"

namespace gmmcs {

/// Matrix of i.i.d. standard normal entries, drawn column by column.
Eigen::MatrixXd standard_normal_matrix(int rows, int cols, Rng& rng);

/// Gaussian kernel rescaled so tr(kernel * kernelᵀ) equals `rows` exactly.
Eigen::MatrixXd random_kernel(int rows, int cols, Rng& rng);

/// `count` draws from the source, one per column.
Eigen::MatrixXd sample_gaussian(const GaussianSource& source, int count, Rng& rng);

struct GmmSamples {
  std::vector<int> labels;  // class index per column
  Eigen::MatrixXd samples;  // n x count
};

GmmSamples sample_gmm(const GmmSource& source, int count, Rng& rng);

/// G Gᵀ for G dim x dof standard normal; rank min(dim, dof) almost surely.
Eigen::MatrixXd sample_wishart(int dim, int dof, Rng& rng);

}  // namespace gmmcs
