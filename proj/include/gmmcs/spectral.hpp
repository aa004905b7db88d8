#pragma once

#include <Eigen/Dense>

namespace gmmcs {

// Relative tolerance used everywhere a numerical rank or PSD check appears:
// an eigenvalue counts as zero when it is <= kRankTol * lambda_max.
inline constexpr double kRankTol = 1e-10;

/// Eigendecomposition of a symmetric PSD matrix, eigenvalues sorted
/// descending, eigenvectors in matching column order.
struct EigenDecomposition {
  Eigen::MatrixXd vectors;  // orthogonal, columns are eigenvectors
  Eigen::VectorXd values;   // descending, negatives clamped to zero
};

/// Decomposes a symmetric PSD matrix. Eigenvalues in [-tol*lambda_max, 0)
/// are clamped to zero; anything below that threshold is rejected.
/// Throws std::invalid_argument on non-symmetric or non-PSD input.
EigenDecomposition eig_psd(const Eigen::MatrixXd& matrix, double tol = kRankTol);

/// Number of eigenvalues above rel_tol * lambda_max. Zero matrix -> 0.
int numerical_rank(const EigenDecomposition& decomp, double rel_tol = kRankTol);

int numerical_rank(const Eigen::MatrixXd& matrix, double rel_tol = kRankTol);

/// Symmetric PSD square root V sqrt(D) V^T.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& matrix);

/// Nearest-PSD repair: symmetrize and clamp all negative eigenvalues to
/// zero. For matrices assembled from moment arithmetic, where rounding can
/// push small eigenvalues slightly negative.
Eigen::MatrixXd make_psd(const Eigen::MatrixXd& matrix);

/// Keeps the top s_max eigenvalues and zeroes the rest (best low-rank
/// PSD approximation in Frobenius norm).
Eigen::MatrixXd truncate_covariance(const Eigen::MatrixXd& covariance, int s_max);

}  // namespace gmmcs
