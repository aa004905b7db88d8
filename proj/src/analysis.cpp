#include "gmmcs/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "gmmcs/rng.hpp"
#include "gmmcs/spectral.hpp"

namespace gmmcs {

Expansion make_expansion(double floor, double slope, double power_scale) {
  Expansion e;
  e.floor = floor;
  e.slope = slope;
  e.power_scale = power_scale;
  e.regime = floor < 1e-9 * power_scale ? FloorRegime::kFloorAbsent
                                        : FloorRegime::kFloorPresent;
  return e;
}

double gaussian_mmse(const GaussianSource& source, const MeasurementSystem& system) {
  const WienerFilter f = wiener_filter(source, system);
  const Eigen::MatrixXd residual_map =
      Eigen::MatrixXd::Identity(source.dim(), source.dim()) - f.gain * system.kernel;
  return (residual_map * source.sqrt_covariance()).squaredNorm() +
         system.noise_variance * f.gain.squaredNorm();
}

Eigen::MatrixXd sigma_matrix(const GaussianSource& source, const Eigen::MatrixXd& kernel) {
  if (kernel.cols() != source.dim()) {
    throw std::invalid_argument("sigma_matrix: kernel width does not match source dimension");
  }
  const Eigen::MatrixXd projected = kernel * source.sqrt_covariance();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(source.dim(), source.dim());
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(projected.transpose());
  return sigma.selfadjointView<Eigen::Lower>();
}

double gaussian_mmse_spectral(const GaussianSource& source, const MeasurementSystem& system) {
  const EigenDecomposition d = eig_psd(sigma_matrix(source, system.kernel));
  const int sensed = numerical_rank(d);
  const Eigen::MatrixXd projected = source.sqrt_covariance() * d.vectors;
  double total = 0.0;
  for (int i = 0; i < source.dim(); ++i) {
    const double energy = projected.col(i).squaredNorm();
    if (i < sensed) {
      total += energy / (1.0 + d.values(i) / system.noise_variance);
    } else {
      total += energy;
    }
  }
  return total;
}

Expansion expansion_gaussian(const GaussianSource& source, const Eigen::MatrixXd& kernel) {
  const Eigen::MatrixXd sigma = sigma_matrix(source, kernel);
  const EigenDecomposition d = eig_psd(sigma);
  const int sensed = numerical_rank(d);

  double slope = 0.0;
  for (int i = 0; i < sensed; ++i) {
    const double energy = (source.sqrt_covariance() * d.vectors.col(i)).squaredNorm();
    slope += energy / d.values(i);
  }

  // The unsensed directions inside Im(Sigma_x): reduce sigma to the image
  // basis, take its null-space eigenvectors, and lift them back.
  const Eigen::MatrixXd basis = source.image_basis();
  const Eigen::MatrixXd reduced = basis.transpose() * sigma * basis;
  double floor = 0.0;
  if (source.rank() > 0) {
    const EigenDecomposition dr = eig_psd(0.5 * (reduced + reduced.transpose()));
    const int reduced_rank = numerical_rank(dr);
    for (int j = reduced_rank; j < source.rank(); ++j) {
      const Eigen::VectorXd lifted = basis * dr.vectors.col(j);
      floor += (source.sqrt_covariance() * lifted).squaredNorm();
    }
  }
  return make_expansion(floor, slope, source.covariance().trace());
}

double mse_lower_bound(const GmmSource& gmm, const MeasurementSystem& system) {
  double total = 0.0;
  for (int k = 0; k < gmm.num_components(); ++k) {
    if (gmm.weight(k) == 0.0) continue;
    total += gmm.weight(k) * gaussian_mmse(gmm.component(k), system);
  }
  return total;
}

Expansion expansion_lower_bound(const GmmSource& gmm, const Eigen::MatrixXd& kernel) {
  double floor = 0.0;
  double slope = 0.0;
  double power = 0.0;
  for (int k = 0; k < gmm.num_components(); ++k) {
    if (gmm.weight(k) == 0.0) continue;
    const Expansion e = expansion_gaussian(gmm.component(k), kernel);
    floor += gmm.weight(k) * e.floor;
    slope += gmm.weight(k) * e.slope;
    power += gmm.weight(k) * e.power_scale;
  }
  return make_expansion(floor, slope, power);
}

namespace {

struct ErrorAccumulator {
  std::int64_t count = 0;
  double sum = 0.0;
  double sum_squares = 0.0;

  void add(double value) {
    ++count;
    sum += value;
    sum_squares += value * value;
  }
  void merge(const ErrorAccumulator& other) {
    count += other.count;
    sum += other.sum;
    sum_squares += other.sum_squares;
  }
};

MonteCarloResult finish(const ErrorAccumulator& acc, std::uint64_t seed) {
  MonteCarloResult out;
  out.samples = acc.count;
  out.seed = seed;
  out.estimate = acc.sum / static_cast<double>(acc.count);
  const double variance =
      (acc.sum_squares - static_cast<double>(acc.count) * out.estimate * out.estimate) /
      static_cast<double>(acc.count - 1);
  out.std_error = std::sqrt(std::max(variance, 0.0) / static_cast<double>(acc.count));
  return out;
}

}  // namespace

MonteCarloResult monte_carlo_mse(const GmmSource& gmm, const MeasurementSystem& system,
                                 EstimatorKind estimator, std::int64_t samples,
                                 std::uint64_t seed, int workers) {
  if (samples < 100) throw std::invalid_argument("monte_carlo_mse: need at least 100 samples");
  if (workers < 1) throw std::invalid_argument("monte_carlo_mse: workers must be positive");

  const GmmDecoder decoder(gmm, system);
  WienerFilter lmmse_filter;
  if (estimator == EstimatorKind::kLmmse) {
    auto [mean, cov] = gmm_moments(gmm);
    lmmse_filter = wiener_filter(GaussianSource(std::move(mean), std::move(cov)), system);
  }

  const int l = system.rows();
  ErrorAccumulator total;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t chunk =
        samples / workers + (w < samples % workers ? 1 : 0);
    if (chunk == 0) continue;
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(w));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::discrete_distribution<int> categorical(gmm.weights().begin(), gmm.weights().end());
    const double noise_sd = std::sqrt(system.noise_variance);
    ErrorAccumulator acc;
    Eigen::VectorXd x(gmm.dim());
    Eigen::VectorXd y(l);
    for (std::int64_t i = 0; i < chunk; ++i) {
      const GaussianSource& c = gmm.component(categorical(rng));
      x = c.mean();
      for (int r = 0; r < c.rank(); ++r) x += normal(rng) * c.sample_factor().col(r);
      y.noalias() = system.kernel * x;
      for (int j = 0; j < l; ++j) y(j) += noise_sd * normal(rng);
      Eigen::VectorXd estimate;
      switch (estimator) {
        case EstimatorKind::kConditionalMean:
          estimate = decoder.conditional_mean(y);
          break;
        case EstimatorKind::kClassifyReconstruct:
          estimate = decoder.classify_reconstruct(y);
          break;
        case EstimatorKind::kLmmse:
          estimate = gaussian_estimate(lmmse_filter, y);
          break;
      }
      acc.add((x - estimate).squaredNorm());
    }
    total.merge(acc);
  }
  return finish(total, seed);
}

double mismatched_mse(const GmmSource& gmm, int k, int m, const MeasurementSystem& system) {
  const GaussianSource& source_k = gmm.component(k);
  const GaussianSource& source_m = gmm.component(m);
  const WienerFilter f = wiener_filter(source_m, system);
  const Eigen::MatrixXd residual_map =
      Eigen::MatrixXd::Identity(gmm.dim(), gmm.dim()) - f.gain * system.kernel;
  const Eigen::VectorXd mean_gap = source_k.mean() - source_m.mean();
  return (residual_map * source_k.sqrt_covariance()).squaredNorm() +
         (residual_map * mean_gap).squaredNorm() +
         system.noise_variance * f.gain.squaredNorm();
}

MonteCarloResult mse_cr_upper_bound(const GmmSource& gmm, const MeasurementSystem& system,
                                    std::int64_t samples, std::uint64_t seed, int workers) {
  return monte_carlo_mse(gmm, system, EstimatorKind::kClassifyReconstruct, samples, seed,
                         workers);
}

DecayDiagnostics decay_diagnostics(const std::vector<std::pair<double, double>>& sweep,
                                   double power_scale, double expansion_floor) {
  if (sweep.size() < 4) {
    throw std::invalid_argument("decay_diagnostics: need at least 4 grid points");
  }
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (!(sweep[i].first < sweep[i - 1].first)) {
      throw std::invalid_argument("decay_diagnostics: noise grid must be strictly descending");
    }
  }

  DecayDiagnostics out;
  out.floor_estimate = sweep.back().second;
  out.floor_present = out.floor_estimate >= 1e-9 * power_scale;
  const double floor_guess = out.floor_present ? expansion_floor : 0.0;

  std::vector<double> log_noise;
  std::vector<double> log_residual;
  for (std::size_t i = sweep.size() - 3; i < sweep.size(); ++i) {
    const double residual = sweep[i].second - floor_guess;
    if (residual <= 0.0) continue;
    log_noise.push_back(std::log10(sweep[i].first));
    log_residual.push_back(std::log10(residual));
  }
  if (log_noise.size() < 2) return out;

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < log_noise.size(); ++i) {
    mean_x += log_noise[i];
    mean_y += log_residual[i];
  }
  mean_x /= static_cast<double>(log_noise.size());
  mean_y /= static_cast<double>(log_noise.size());
  double covariance = 0.0;
  double variance = 0.0;
  for (std::size_t i = 0; i < log_noise.size(); ++i) {
    covariance += (log_noise[i] - mean_x) * (log_residual[i] - mean_y);
    variance += (log_noise[i] - mean_x) * (log_noise[i] - mean_x);
  }
  out.decay_exponent = covariance / variance;
  return out;
}

}  // namespace gmmcs
