#include "gmmcs/em.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "gmmcs/rng.hpp"
#include "gmmcs/spectral.hpp"

namespace gmmcs {

namespace {
constexpr double kRidge = 1e-6;
}

EmResult fit_em(const Eigen::MatrixXd& data, int num_components, int s_max, int iterations,
                std::uint64_t seed) {
  const int n = static_cast<int>(data.rows());
  const int count = static_cast<int>(data.cols());
  if (num_components < 1) throw std::invalid_argument("fit_em: need at least one component");
  if (count < num_components) throw std::invalid_argument("fit_em: fewer samples than components");
  if (s_max < 0 || s_max > n) throw std::invalid_argument("fit_em: s_max out of range");
  if (iterations < 1) throw std::invalid_argument("fit_em: need at least one iteration");

  Rng rng = make_rng(seed);
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::VectorXd global_mean = data.rowwise().mean();
  Eigen::MatrixXd global_cov = Eigen::MatrixXd::Zero(n, n);
  {
    const Eigen::MatrixXd centered = data.colwise() - global_mean;
    global_cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / count);
    global_cov = Eigen::MatrixXd(global_cov.selfadjointView<Eigen::Lower>());
    global_cov.diagonal().array() += kRidge;
  }

  std::vector<double> weights(num_components, 1.0 / num_components);
  std::vector<Eigen::VectorXd> means(num_components);
  std::vector<Eigen::MatrixXd> covs(num_components, global_cov);
  for (int k = 0; k < num_components; ++k) means[k] = data.col(order[k]);

  std::vector<double> log_likelihoods;
  log_likelihoods.reserve(iterations);
  Eigen::MatrixXd resp(num_components, count);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);

  for (int iter = 0; iter < iterations; ++iter) {
    // E-step: responsibilities and the data log-likelihood of current params.
    for (int k = 0; k < num_components; ++k) {
      Eigen::LLT<Eigen::MatrixXd> chol(covs[k]);
      if (chol.info() != Eigen::Success) {
        throw std::runtime_error("fit_em: covariance factorization failed");
      }
      const Eigen::MatrixXd whitened = chol.matrixL().solve(data.colwise() - means[k]);
      const double log_det = 2.0 * chol.matrixLLT().diagonal().array().log().sum();
      resp.row(k) =
          (-0.5 * (whitened.colwise().squaredNorm().array() + log_det + n * log_two_pi) +
           std::log(weights[k]))
              .matrix();
    }
    double log_likelihood = 0.0;
    for (int j = 0; j < count; ++j) {
      const double top = resp.col(j).maxCoeff();
      const double log_sum = top + std::log((resp.col(j).array() - top).exp().sum());
      log_likelihood += log_sum;
      resp.col(j) = (resp.col(j).array() - log_sum).exp().matrix();
    }
    log_likelihoods.push_back(log_likelihood);

    // M-step with ridge regularization.
    double weight_total = 0.0;
    for (int k = 0; k < num_components; ++k) {
      const double nk = resp.row(k).sum();
      weights[k] = nk / count;
      weight_total += weights[k];
      if (nk < 1e-10 * count) continue;  // collapsed component keeps its parameters
      means[k] = (data * resp.row(k).transpose()) / nk;
      const Eigen::MatrixXd centered = data.colwise() - means[k];
      const Eigen::MatrixXd scaled =
          centered * resp.row(k).array().sqrt().matrix().asDiagonal();
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
      cov.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0 / nk);
      cov = Eigen::MatrixXd(cov.selfadjointView<Eigen::Lower>());
      cov.diagonal().array() += kRidge;
      covs[k] = cov;
    }
    for (double& w : weights) w /= weight_total;
  }

  std::vector<GaussianSource> components;
  components.reserve(num_components);
  for (int k = 0; k < num_components; ++k) {
    components.emplace_back(means[k], truncate_covariance(covs[k], s_max));
  }
  return EmResult{GmmSource(std::move(weights), std::move(components)),
                  std::move(log_likelihoods)};
}

}  // namespace gmmcs
