#include "gmmcs/estimators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gmmcs/spectral.hpp"

namespace gmmcs {

namespace {

Eigen::MatrixXd measurement_covariance(const GaussianSource& source,
                                       const MeasurementSystem& system) {
  const Eigen::MatrixXd projected = system.kernel * source.covariance() * system.kernel.transpose();
  Eigen::MatrixXd cov = 0.5 * (projected + projected.transpose());
  cov.diagonal().array() += system.noise_variance;
  return cov;
}

WienerFilter filter_from_chol(const GaussianSource& source, const MeasurementSystem& system,
                              const Eigen::LLT<Eigen::MatrixXd>& chol) {
  WienerFilter f;
  f.gain = chol.solve(system.kernel * source.covariance()).transpose();
  f.offset = source.mean() - f.gain * (system.kernel * source.mean());
  return f;
}

}  // namespace

WienerFilter wiener_filter(const GaussianSource& source, const MeasurementSystem& system) {
  if (system.cols() != source.dim()) {
    throw std::invalid_argument("wiener_filter: kernel width does not match source dimension");
  }
  Eigen::LLT<Eigen::MatrixXd> chol(measurement_covariance(source, system));
  if (chol.info() != Eigen::Success) {
    throw std::runtime_error("wiener_filter: measurement covariance factorization failed");
  }
  return filter_from_chol(source, system, chol);
}

Eigen::VectorXd gaussian_estimate(const WienerFilter& filter, const Eigen::VectorXd& y) {
  if (y.size() != filter.gain.cols()) {
    throw std::invalid_argument("gaussian_estimate: measurement length does not match filter");
  }
  return filter.offset + filter.gain * y;
}

GmmDecoder::GmmDecoder(const GmmSource& gmm, const MeasurementSystem& system) {
  if (system.cols() != gmm.dim()) {
    throw std::invalid_argument("GmmDecoder: kernel width does not match source dimension");
  }
  const double l = static_cast<double>(system.rows());
  classes_.reserve(gmm.num_components());
  for (int k = 0; k < gmm.num_components(); ++k) {
    const GaussianSource& c = gmm.component(k);
    ClassData d;
    d.measurement_chol.compute(measurement_covariance(c, system));
    if (d.measurement_chol.info() != Eigen::Success) {
      throw std::runtime_error("GmmDecoder: measurement covariance factorization failed");
    }
    d.filter = filter_from_chol(c, system, d.measurement_chol);
    d.filter.class_index = k;
    d.measurement_mean = system.kernel * c.mean();
    const double log_det =
        2.0 * d.measurement_chol.matrixLLT().diagonal().array().log().sum();
    d.log_weight_norm = std::log(gmm.weight(k)) -
                        0.5 * (log_det + l * std::log(2.0 * std::numbers::pi));
    classes_.push_back(std::move(d));
  }
}

ClassPosterior GmmDecoder::posteriors(const Eigen::VectorXd& y) const {
  const int num = num_classes();
  ClassPosterior out;
  out.log_likelihoods.resize(num);
  for (int k = 0; k < num; ++k) {
    const ClassData& d = classes_[k];
    const Eigen::VectorXd centered = y - d.measurement_mean;
    const Eigen::VectorXd whitened =
        d.measurement_chol.matrixL().solve(centered);
    out.log_likelihoods(k) = d.log_weight_norm - 0.5 * whitened.squaredNorm();
  }
  const double top = out.log_likelihoods.maxCoeff();
  out.probabilities = (out.log_likelihoods.array() - top).exp();
  out.probabilities /= out.probabilities.sum();
  return out;
}

int GmmDecoder::classify(const Eigen::VectorXd& y) const {
  const ClassPosterior p = posteriors(y);
  int best = 0;
  for (int k = 1; k < num_classes(); ++k) {
    if (p.log_likelihoods(k) > p.log_likelihoods(best)) best = k;
  }
  return best;
}

Eigen::VectorXd GmmDecoder::classify_reconstruct(const Eigen::VectorXd& y) const {
  return gaussian_estimate(classes_[classify(y)].filter, y);
}

Eigen::VectorXd GmmDecoder::conditional_mean(const Eigen::VectorXd& y) const {
  const ClassPosterior p = posteriors(y);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(classes_.front().filter.gain.rows());
  for (int k = 0; k < num_classes(); ++k) {
    if (p.probabilities(k) == 0.0) continue;
    out += p.probabilities(k) * gaussian_estimate(classes_[k].filter, y);
  }
  return out;
}

ClassPosterior class_posteriors(const GmmSource& gmm, const MeasurementSystem& system,
                                const Eigen::VectorXd& y) {
  return GmmDecoder(gmm, system).posteriors(y);
}

int map_classify(const GmmSource& gmm, const MeasurementSystem& system,
                 const Eigen::VectorXd& y) {
  return GmmDecoder(gmm, system).classify(y);
}

Eigen::VectorXd classify_reconstruct(const GmmSource& gmm, const MeasurementSystem& system,
                                     const Eigen::VectorXd& y) {
  return GmmDecoder(gmm, system).classify_reconstruct(y);
}

Eigen::VectorXd gmm_conditional_mean(const GmmSource& gmm, const MeasurementSystem& system,
                                     const Eigen::VectorXd& y) {
  return GmmDecoder(gmm, system).conditional_mean(y);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> gmm_moments(const GmmSource& gmm) {
  if (gmm.num_components() == 1) {
    return {gmm.component(0).mean(), gmm.component(0).covariance()};
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(gmm.dim());
  for (int k = 0; k < gmm.num_components(); ++k) {
    mean += gmm.weight(k) * gmm.component(k).mean();
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(gmm.dim(), gmm.dim());
  for (int k = 0; k < gmm.num_components(); ++k) {
    const Eigen::VectorXd centered = gmm.component(k).mean() - mean;
    cov += gmm.weight(k) * (gmm.component(k).covariance() +
                            centered * centered.transpose());
  }
  return {std::move(mean), make_psd(cov)};
}

Eigen::VectorXd lmmse_estimate(const GmmSource& gmm, const MeasurementSystem& system,
                               const Eigen::VectorXd& y) {
  auto [mean, cov] = gmm_moments(gmm);
  const GaussianSource collapsed(std::move(mean), std::move(cov));
  return gaussian_estimate(wiener_filter(collapsed, system), y);
}

}  // namespace gmmcs
