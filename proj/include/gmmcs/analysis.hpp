#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "gmmcs/estimators.hpp"
#include "gmmcs/model.hpp"

namespace gmmcs {

enum class FloorRegime { kFloorPresent, kFloorAbsent };

/// Low-noise expansion mse(sigma2) ~ floor + slope * sigma2. The regime flag
/// classifies the floor against 1e-9 times the source power `power_scale`.
struct Expansion {
  double floor = 0.0;
  double slope = 0.0;
  double power_scale = 0.0;
  FloorRegime regime = FloorRegime::kFloorAbsent;
};

Expansion make_expansion(double floor, double slope, double power_scale);

struct MonteCarloResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Closed-form Gaussian MMSE. Evaluated as
/// |(I - W K) sqrt(Sigma)|_F^2 + sigma2 * |W|_F^2 with W the Wiener gain,
/// which is algebraically equal to tr(Sigma) - tr(W K Sigma) but stays
/// accurate when sigma2 is tiny because both terms are nonnegative.
double gaussian_mmse(const GaussianSource& source, const MeasurementSystem& system);

/// sqrt(Sigma) * kernelT * kernel * sqrt(Sigma), symmetric PSD.
Eigen::MatrixXd sigma_matrix(const GaussianSource& source, const Eigen::MatrixXd& kernel);

/// Same MMSE computed through the eigenvalues of sigma_matrix; independent
/// oracle for gaussian_mmse.
double gaussian_mmse_spectral(const GaussianSource& source, const MeasurementSystem& system);

/// Floor and slope of the low-noise Gaussian MMSE expansion.
Expansion expansion_gaussian(const GaussianSource& source, const Eigen::MatrixXd& kernel);

/// Weighted sum of per-class Gaussian MMSE values; lower bound for the GMM MMSE.
double mse_lower_bound(const GmmSource& gmm, const MeasurementSystem& system);

/// Weighted combination of per-class expansions.
Expansion expansion_lower_bound(const GmmSource& gmm, const Eigen::MatrixXd& kernel);

enum class EstimatorKind { kConditionalMean, kClassifyReconstruct, kLmmse };

/// Empirical MSE of the chosen decoder over fresh GMM draws. The sample
/// budget is split across `workers` substreams derived from `seed`; the draws
/// depend only on (gmm, system, samples, seed, workers), never on the
/// estimator, so runs with equal seeds share samples exactly.
MonteCarloResult monte_carlo_mse(const GmmSource& gmm, const MeasurementSystem& system,
                                 EstimatorKind estimator, std::int64_t samples,
                                 std::uint64_t seed, int workers = 1);

/// MSE of estimating a class-k signal with the class-m Wiener filter,
/// in the grouped form tr(E Sigma_k ET) + |E d|^2 + sigma2 tr(W WT)
/// with E = I - W_m K and d = mu_k - mu_m.
double mismatched_mse(const GmmSource& gmm, int k, int m, const MeasurementSystem& system);

/// Monte Carlo MSE of the classify-then-reconstruct decoder.
MonteCarloResult mse_cr_upper_bound(const GmmSource& gmm, const MeasurementSystem& system,
                                    std::int64_t samples, std::uint64_t seed, int workers = 1);

struct DecayDiagnostics {
  double floor_estimate = 0.0;  // mse at the smallest noise level
  double decay_exponent = 0.0;  // slope of log10(mse - floor) vs log10(sigma2)
  bool floor_present = false;   // floor_estimate >= 1e-9 * power_scale
};

/// Fits the decay exponent over the 3 smallest noise levels of a sweep given
/// as (sigma2, mse) pairs sorted by strictly descending sigma2. When the
/// smallest-noise mse sits above the floor-present threshold, the residual
/// regression subtracts `expansion_floor`; points whose residual is not
/// positive are dropped, and with fewer than 2 usable points the exponent is
/// reported as 0.
DecayDiagnostics decay_diagnostics(const std::vector<std::pair<double, double>>& sweep,
                                   double power_scale, double expansion_floor = 0.0);

}  // namespace gmmcs
