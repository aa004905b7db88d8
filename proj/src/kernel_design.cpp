#include "gmmcs/kernel_design.hpp"

#include <cmath>
#include <stdexcept>

namespace gmmcs {

WaterfillAllocation waterfill(const Eigen::VectorXd& eigenvalues, int num_rows,
                              double noise_variance) {
  const int s = static_cast<int>(eigenvalues.size());
  if (s < 1) throw std::invalid_argument("waterfill: need at least one eigenvalue");
  if (num_rows < 1) throw std::invalid_argument("waterfill: num_rows must be positive");
  if (!(noise_variance > 0.0)) throw std::invalid_argument("waterfill: noise variance must be positive");
  for (int i = 0; i < s; ++i) {
    if (!(eigenvalues(i) > 0.0)) throw std::invalid_argument("waterfill: eigenvalues must be positive");
    if (i > 0 && eigenvalues(i) > eigenvalues(i - 1)) {
      throw std::invalid_argument("waterfill: eigenvalues must be sorted descending");
    }
  }

  const int max_active = std::min(s, num_rows);
  double inverse_sum = 0.0;
  for (int i = 0; i < max_active; ++i) inverse_sum += 1.0 / eigenvalues(i);

  // Largest candidate count wins; a = 1 always satisfies the level condition.
  int active = 1;
  double level = 0.0;
  for (int a = max_active; a >= 1; --a) {
    level = (num_rows + noise_variance * inverse_sum) / a;
    if (level > noise_variance / eigenvalues(a - 1)) {
      active = a;
      break;
    }
    inverse_sum -= 1.0 / eigenvalues(a - 1);
  }

  WaterfillAllocation out;
  out.water_level = level;
  out.active_count = active;
  out.allocations = Eigen::VectorXd::Zero(num_rows);
  for (int i = 0; i < active; ++i) {
    out.allocations(i) = level - noise_variance / eigenvalues(i);
  }
  return out;
}

MeasurementSystem design_kernel_gaussian(const GaussianSource& source, int num_rows,
                                         double noise_variance) {
  if (source.rank() < 1) {
    throw std::invalid_argument("design_kernel_gaussian: source covariance is zero");
  }
  const WaterfillAllocation wf =
      waterfill(source.eig().values.head(source.rank()), num_rows, noise_variance);
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(num_rows, source.dim());
  for (int i = 0; i < wf.active_count; ++i) {
    kernel.row(i) = std::sqrt(wf.allocations(i)) * source.eig().vectors.col(i).transpose();
  }
  return MeasurementSystem(std::move(kernel), noise_variance);
}

double designed_mmse(const GaussianSource& source, int num_rows, double noise_variance) {
  const int s = source.rank();
  if (s == 0) return 0.0;
  const Eigen::VectorXd lambda = source.eig().values.head(s);
  const WaterfillAllocation wf = waterfill(lambda, num_rows, noise_variance);
  const int sensed = std::min(s, num_rows);
  double total = 0.0;
  for (int i = 0; i < sensed; ++i) {
    total += lambda(i) / (1.0 + lambda(i) * wf.allocations(i) / noise_variance);
  }
  for (int i = sensed; i < s; ++i) total += lambda(i);
  return total;
}

Expansion expansion_designed(const GaussianSource& source, int num_rows) {
  if (num_rows < 1) throw std::invalid_argument("expansion_designed: num_rows must be positive");
  const int s = source.rank();
  const int sensed = std::min(s, num_rows);
  double floor = 0.0;
  for (int i = sensed; i < s; ++i) floor += source.eig().values(i);
  const double slope =
      static_cast<double>(sensed) * static_cast<double>(sensed) / num_rows;
  return make_expansion(floor, slope, source.covariance().trace());
}

double mse_lower_bound_designed(const GmmSource& gmm, int num_rows, double noise_variance) {
  double total = 0.0;
  for (int k = 0; k < gmm.num_components(); ++k) {
    if (gmm.weight(k) == 0.0) continue;
    total += gmm.weight(k) * designed_mmse(gmm.component(k), num_rows, noise_variance);
  }
  return total;
}

Expansion expansion_lower_bound_designed(const GmmSource& gmm, int num_rows) {
  double floor = 0.0;
  double slope = 0.0;
  double power = 0.0;
  for (int k = 0; k < gmm.num_components(); ++k) {
    if (gmm.weight(k) == 0.0) continue;
    const Expansion e = expansion_designed(gmm.component(k), num_rows);
    floor += gmm.weight(k) * e.floor;
    slope += gmm.weight(k) * e.slope;
    power += gmm.weight(k) * e.power_scale;
  }
  return make_expansion(floor, slope, power);
}

}  // namespace gmmcs
