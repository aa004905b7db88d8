#pragma once

#include <Eigen/Dense>

#include "gmmcs/analysis.hpp"
#include "gmmcs/model.hpp"

namespace gmmcs {

/// Water-filling power split over the source modes for a row budget of l.
struct WaterfillAllocation {
  double water_level = 0.0;      // common level eta over the active modes
  Eigen::VectorXd allocations;   // length l, zero beyond active_count
  int active_count = 0;
};

/// Solves max-MMSE-reduction power allocation for positive source eigenvalues
/// sorted descending: allocation_i = max(eta - sigma2 / lambda_i, 0) with
/// sum(allocations) = l. Exact active-set solve, no iteration tolerance.
WaterfillAllocation waterfill(const Eigen::VectorXd& eigenvalues, int num_rows,
                              double noise_variance);

/// Kernel whose rows are the top source eigenvectors scaled by the square
/// root of the water-filling allocations; rows beyond the active modes are
/// zero. tr(kernel * kernelT) = num_rows.
MeasurementSystem design_kernel_gaussian(const GaussianSource& source, int num_rows,
                                         double noise_variance);

/// Closed-form MMSE of the designed kernel, straight from the eigenvalues.
double designed_mmse(const GaussianSource& source, int num_rows, double noise_variance);

/// Low-noise expansion under the designed kernel: floor = eigenvalue tail sum
/// past min(s, l), slope = min(s, l)^2 / l.
Expansion expansion_designed(const GaussianSource& source, int num_rows);

/// Weighted per-class designed MMSE; lower bound for any single shared kernel.
double mse_lower_bound_designed(const GmmSource& gmm, int num_rows, double noise_variance);

/// Weighted combination of per-class designed expansions.
Expansion expansion_lower_bound_designed(const GmmSource& gmm, int num_rows);

}  // namespace gmmcs
