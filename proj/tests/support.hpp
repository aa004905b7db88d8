#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gmmcs/analysis.hpp"
#include "gmmcs/estimators.hpp"
#include "gmmcs/model.hpp"
#include "gmmcs/random.hpp"
#include "gmmcs/rng.hpp"

namespace gmmcs::testing {

/// PSD matrix of the requested rank built as a factor product.
inline Eigen::MatrixXd random_psd(int n, int rank, Rng& rng) {
  if (rank == 0) return Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd factor = standard_normal_matrix(n, rank, rng);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  out.selfadjointView<Eigen::Lower>().rankUpdate(factor);
  return out.selfadjointView<Eigen::Lower>();
}

inline Eigen::VectorXd random_vector(int n, Rng& rng) {
  return standard_normal_matrix(n, 1, rng).col(0);
}

inline GaussianSource random_source(int n, int rank, Rng& rng, bool zero_mean = false) {
  Eigen::VectorXd mean =
      zero_mean ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(random_vector(n, rng));
  return GaussianSource(std::move(mean), random_psd(n, rank, rng));
}

inline GmmSource wrap_gaussian(GaussianSource source) {
  std::vector<GaussianSource> components;
  components.push_back(std::move(source));
  return GmmSource({1.0}, std::move(components));
}

inline GmmSource random_gmm(int n, const std::vector<int>& ranks, Rng& rng,
                            bool zero_mean = false) {
  std::vector<GaussianSource> components;
  std::vector<double> weights(ranks.size(), 1.0 / ranks.size());
  components.reserve(ranks.size());
  for (int rank : ranks) components.push_back(random_source(n, rank, rng, zero_mean));
  return GmmSource(std::move(weights), std::move(components));
}

/// Water level found by bisection on the budget equation; independent of the
/// active-set solver.
inline double bisect_water_level(const Eigen::VectorXd& eigenvalues, int num_rows,
                                 double noise_variance) {
  const int modes = std::min<int>(eigenvalues.size(), num_rows);
  const auto spent = [&](double level) {
    double total = 0.0;
    for (int i = 0; i < modes; ++i) {
      total += std::max(level - noise_variance / eigenvalues(i), 0.0);
    }
    return total;
  };
  double lo = 0.0;
  double hi = num_rows + noise_variance / eigenvalues(eigenvalues.size() - 1) + 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (spent(mid) < num_rows) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Empirical MSE of reconstructing class-k draws with an arbitrary filter.
inline MonteCarloResult mc_filter_mse(const GaussianSource& source,
                                      const MeasurementSystem& system,
                                      const WienerFilter& filter, int samples,
                                      std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_sd = std::sqrt(system.noise_variance);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd x = source.mean();
    for (int r = 0; r < source.rank(); ++r) x += normal(rng) * source.sample_factor().col(r);
    Eigen::VectorXd y = system.kernel * x;
    for (int j = 0; j < system.rows(); ++j) y(j) += noise_sd * normal(rng);
    const double err = (x - gaussian_estimate(filter, y)).squaredNorm();
    sum += err;
    sum_sq += err * err;
  }
  MonteCarloResult out;
  out.samples = samples;
  out.seed = seed;
  out.estimate = sum / samples;
  const double variance = (sum_sq - samples * out.estimate * out.estimate) / (samples - 1);
  out.std_error = std::sqrt(std::max(variance, 0.0) / samples);
  return out;
}

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

inline double csv_number(const CsvTable& table, std::size_t row, int col) {
  return std::strtod(table.rows.at(row).at(static_cast<std::size_t>(col)).c_str(), nullptr);
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t colon = line.find(':');
      if (colon != std::string::npos) {
        std::string key = line.substr(2, colon - 2);
        std::string value = line.substr(colon + 1);
        if (!value.empty() && value[0] == ' ') value.erase(0, 1);
        table.meta[key] = value;
      }
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream parts(line);
    std::string field;
    while (std::getline(parts, field, ',')) fields.push_back(field);
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

}  // namespace gmmcs::testing
