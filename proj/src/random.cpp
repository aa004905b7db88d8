#include "gmmcs/random.hpp"

#include <cmath>
#include <stdexcept>

namespace gmmcs {

Eigen::MatrixXd standard_normal_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

Eigen::MatrixXd random_kernel(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("random_kernel: shape must be positive");
  Eigen::MatrixXd kernel = standard_normal_matrix(rows, cols, rng);
  const double trace = kernel.squaredNorm();
  if (!(trace > 0.0)) throw std::runtime_error("random_kernel: degenerate draw");
  kernel *= std::sqrt(static_cast<double>(rows) / trace);
  return kernel;
}

Eigen::MatrixXd sample_gaussian(const GaussianSource& source, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_gaussian: count must be positive");
  Eigen::MatrixXd out = source.mean().replicate(1, count);
  if (source.rank() > 0) {
    out.noalias() += source.sample_factor() *
                     standard_normal_matrix(source.rank(), count, rng);
  }
  return out;
}

GmmSamples sample_gmm(const GmmSource& source, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_gmm: count must be positive");
  std::discrete_distribution<int> categorical(source.weights().begin(), source.weights().end());
  GmmSamples out;
  out.labels.resize(count);
  out.samples.resize(source.dim(), count);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < count; ++j) {
    const int k = categorical(rng);
    out.labels[j] = k;
    const GaussianSource& c = source.component(k);
    Eigen::VectorXd z(c.rank());
    for (int i = 0; i < c.rank(); ++i) z(i) = normal(rng);
    out.samples.col(j) = c.mean() + c.sample_factor() * z;
  }
  return out;
}

Eigen::MatrixXd sample_wishart(int dim, int dof, Rng& rng) {
  if (dim < 1 || dof < 1) throw std::invalid_argument("sample_wishart: dim and dof must be positive");
  const Eigen::MatrixXd factor = standard_normal_matrix(dim, dof, rng);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  out.selfadjointView<Eigen::Lower>().rankUpdate(factor);
  return out.selfadjointView<Eigen::Lower>();
}

}  // namespace gmmcs
