#include "gmmcs/model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gmmcs {

GaussianSource::GaussianSource(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
    throw std::invalid_argument("GaussianSource: covariance shape does not match mean length");
  }
  eig_ = eig_psd(covariance_);
  rank_ = numerical_rank(eig_);
  sqrt_covariance_ =
      eig_.vectors * eig_.values.cwiseSqrt().asDiagonal() * eig_.vectors.transpose();
  sample_factor_ = eig_.vectors.leftCols(rank_) *
                   eig_.values.head(rank_).cwiseSqrt().asDiagonal();
}

GmmSource::GmmSource(std::vector<double> weights, std::vector<GaussianSource> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty() || weights_.size() != components_.size()) {
    throw std::invalid_argument("GmmSource: weights and components must be nonempty and equal length");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw std::invalid_argument("GmmSource: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GmmSource: weights must sum to 1");
  }
  const int n = components_.front().dim();
  for (const auto& c : components_) {
    if (c.dim() != n) throw std::invalid_argument("GmmSource: component dimensions differ");
    s_max_ = std::max(s_max_, c.rank());
  }
}

MeasurementSystem::MeasurementSystem(Eigen::MatrixXd kernel_in, double noise_variance_in)
    : kernel(std::move(kernel_in)), noise_variance(noise_variance_in) {
  if (kernel.rows() < 1 || kernel.cols() < 1) {
    throw std::invalid_argument("MeasurementSystem: kernel must be at least 1x1");
  }
  if (!(noise_variance > 0.0)) {
    throw std::invalid_argument("MeasurementSystem: noise variance must be positive");
  }
}

int pair_rank(const GmmSource& gmm, int k, int m) {
  if (k == m) throw std::invalid_argument("pair_rank: indices must differ");
  const Eigen::MatrixXd sum =
      gmm.component(k).covariance() + gmm.component(m).covariance();
  return numerical_rank(sum);
}

OverlapCase overlap_case(const GmmSource& gmm, int k, int m) {
  const int sk = gmm.component(k).rank();
  const int sm = gmm.component(m).rank();
  const int skm = pair_rank(gmm, k, m);
  return (sk == sm && sm == skm) ? OverlapCase::kOverlapping : OverlapCase::kNonOverlapping;
}

bool in_image(const Eigen::VectorXd& vector, const Eigen::MatrixXd& matrix) {
  const EigenDecomposition d = eig_psd(matrix);
  const int s = numerical_rank(d);
  const Eigen::MatrixXd basis = d.vectors.leftCols(s);
  const Eigen::VectorXd residual = vector - basis * (basis.transpose() * vector);
  return residual.norm() <= 1e-8 * vector.norm();
}

}  // namespace gmmcs
