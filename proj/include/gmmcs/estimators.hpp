#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gmmcs/model.hpp"

namespace gmmcs {

/// Affine conditional-mean estimator for one Gaussian class:
/// estimate(y) = offset + gain * y.
struct WienerFilter {
  Eigen::MatrixXd gain;    // n x l
  Eigen::VectorXd offset;  // mean - gain * kernel * mean
  int class_index = -1;    // -1 when not tied to a mixture class
};

/// Posterior class weights for one measurement. log_likelihoods holds the
/// unnormalized scores log p(y|c=k) + log p_k.
struct ClassPosterior {
  Eigen::VectorXd probabilities;
  Eigen::VectorXd log_likelihoods;
};

WienerFilter wiener_filter(const GaussianSource& source, const MeasurementSystem& system);

Eigen::VectorXd gaussian_estimate(const WienerFilter& filter, const Eigen::VectorXd& y);

/// Per-class filters and measurement-density factorizations cached once so
/// that repeated decoding of measurement vectors stays cheap.
class GmmDecoder {
 public:
  GmmDecoder(const GmmSource& gmm, const MeasurementSystem& system);

  int num_classes() const { return static_cast<int>(classes_.size()); }
  const WienerFilter& filter(int k) const { return classes_.at(k).filter; }

  ClassPosterior posteriors(const Eigen::VectorXd& y) const;
  int classify(const Eigen::VectorXd& y) const;
  Eigen::VectorXd classify_reconstruct(const Eigen::VectorXd& y) const;
  Eigen::VectorXd conditional_mean(const Eigen::VectorXd& y) const;

 private:
  struct ClassData {
    WienerFilter filter;
    Eigen::LLT<Eigen::MatrixXd> measurement_chol;  // of sigma2*I + kernel*Sigma_k*kernelT
    Eigen::VectorXd measurement_mean;              // kernel * mu_k
    double log_weight_norm;                        // log p_k - 0.5*log det(2*pi*Sigma_y)
  };
  std::vector<ClassData> classes_;
};

ClassPosterior class_posteriors(const GmmSource& gmm, const MeasurementSystem& system,
                                const Eigen::VectorXd& y);

/// MAP class index; ties go to the smallest index.
int map_classify(const GmmSource& gmm, const MeasurementSystem& system,
                 const Eigen::VectorXd& y);

/// Hard decision decoder: Wiener estimate under the MAP class.
Eigen::VectorXd classify_reconstruct(const GmmSource& gmm, const MeasurementSystem& system,
                                     const Eigen::VectorXd& y);

/// Exact conditional mean: posterior-weighted class Wiener estimates.
Eigen::VectorXd gmm_conditional_mean(const GmmSource& gmm, const MeasurementSystem& system,
                                     const Eigen::VectorXd& y);

/// Mixture mean and covariance collapsed to a single Gaussian.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> gmm_moments(const GmmSource& gmm);

/// Wiener estimate under the collapsed moments; the best affine estimator.
Eigen::VectorXd lmmse_estimate(const GmmSource& gmm, const MeasurementSystem& system,
                               const Eigen::VectorXd& y);

}  // namespace gmmcs
