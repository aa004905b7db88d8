#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmmcs/spectral.hpp"

namespace gmmcs {

/// Gaussian source N(mean, covariance) with the spectral quantities every
/// estimator needs cached at construction: eigendecomposition, numerical rank,
/// symmetric square root, and the n x s factor used for sampling.
class GaussianSource {
 public:
  GaussianSource(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  int dim() const { return static_cast<int>(mean_.size()); }
  int rank() const { return rank_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const EigenDecomposition& eig() const { return eig_; }

  /// Symmetric PSD square root of the covariance.
  const Eigen::MatrixXd& sqrt_covariance() const { return sqrt_covariance_; }

  /// n x s matrix F with columns u_i * sqrt(lambda_i); F Fᵀ = covariance.
  const Eigen::MatrixXd& sample_factor() const { return sample_factor_; }

  /// Orthonormal basis of the covariance image (leading s eigenvectors).
  Eigen::MatrixXd image_basis() const { return eig_.vectors.leftCols(rank_); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  EigenDecomposition eig_;
  Eigen::MatrixXd sqrt_covariance_;
  Eigen::MatrixXd sample_factor_;
  int rank_ = 0;
};

/// Mixture of Gaussian components with class probabilities.
class GmmSource {
 public:
  GmmSource(std::vector<double> weights, std::vector<GaussianSource> components);

  int dim() const { return components_.front().dim(); }
  int num_components() const { return static_cast<int>(components_.size()); }
  int s_max() const { return s_max_; }
  double weight(int k) const { return weights_.at(k); }
  const std::vector<double>& weights() const { return weights_; }
  const GaussianSource& component(int k) const { return components_.at(k); }
  const std::vector<GaussianSource>& components() const { return components_; }

 private:
  std::vector<double> weights_;
  std::vector<GaussianSource> components_;
  int s_max_ = 0;
};

/// Measurement model y = kernel * x + w with w ~ N(0, noise_variance * I).
struct MeasurementSystem {
  MeasurementSystem(Eigen::MatrixXd kernel_in, double noise_variance_in);

  int rows() const { return static_cast<int>(kernel.rows()); }
  int cols() const { return static_cast<int>(kernel.cols()); }

  Eigen::MatrixXd kernel;
  double noise_variance;
};

/// Numerical rank of the summed covariances of components k and m.
int pair_rank(const GmmSource& gmm, int k, int m);

enum class OverlapCase { kOverlapping, kNonOverlapping };

/// Whether the covariance images of components k and m coincide,
/// detected as s_k = s_m = pair_rank(k, m).
OverlapCase overlap_case(const GmmSource& gmm, int k, int m);

/// True iff the vector lies in the image of the PSD matrix: the residual after
/// projecting onto the span of the above-tolerance eigenvectors has norm
/// <= 1e-8 times the vector norm.
bool in_image(const Eigen::VectorXd& vector, const Eigen::MatrixXd& matrix);

}  // namespace gmmcs
