#include "gmmcs/spectral.hpp"

#include <stdexcept>

namespace gmmcs {

namespace {

void check_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("eig_psd: matrix is not square");
  }
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("eig_psd: matrix is not symmetric");
  }
}

}  // namespace

EigenDecomposition eig_psd(const Eigen::MatrixXd& matrix, double tol) {
  check_symmetric(matrix);
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_psd: eigensolver failed to converge");
  }

  const int n = static_cast<int>(sym.rows());
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();

  const double lambda_max = n > 0 ? std::max(out.values(0), 0.0) : 0.0;
  for (int i = 0; i < n; ++i) {
    if (out.values(i) < -tol * lambda_max) {
      throw std::invalid_argument("eig_psd: matrix is not positive semidefinite");
    }
    if (out.values(i) < 0.0) out.values(i) = 0.0;
  }
  return out;
}

int numerical_rank(const EigenDecomposition& decomp, double rel_tol) {
  if (decomp.values.size() == 0) return 0;
  const double lambda_max = decomp.values(0);
  if (lambda_max <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < decomp.values.size(); ++i) {
    if (decomp.values(i) > rel_tol * lambda_max) ++rank;
  }
  return rank;
}

int numerical_rank(const Eigen::MatrixXd& matrix, double rel_tol) {
  return numerical_rank(eig_psd(matrix, rel_tol), rel_tol);
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& matrix) {
  const EigenDecomposition d = eig_psd(matrix);
  return d.vectors * d.values.cwiseSqrt().asDiagonal() * d.vectors.transpose();
}

Eigen::MatrixXd make_psd(const Eigen::MatrixXd& matrix) {
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const Eigen::VectorXd clamped = solver.eigenvalues().cwiseMax(0.0);
  return solver.eigenvectors() * clamped.asDiagonal() * solver.eigenvectors().transpose();
}

Eigen::MatrixXd truncate_covariance(const Eigen::MatrixXd& covariance, int s_max) {
  const int n = static_cast<int>(covariance.rows());
  if (s_max < 0 || s_max > n) {
    throw std::invalid_argument("truncate_covariance: s_max out of range");
  }
  const EigenDecomposition d = eig_psd(covariance);
  Eigen::VectorXd kept = d.values;
  kept.tail(n - s_max).setZero();
  return d.vectors * kept.asDiagonal() * d.vectors.transpose();
}

}  // namespace gmmcs
