#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmmcs/analysis.hpp"
#include "gmmcs/random.hpp"
#include "gmmcs/spectral.hpp"
#include "support.hpp"

using namespace gmmcs;
using namespace gmmcs::testing;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GmmSource two_wishart_model(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<GaussianSource> comps;
  comps.emplace_back(VectorXd::Zero(4), sample_wishart(4, 2, rng));
  comps.emplace_back(VectorXd::Zero(4), sample_wishart(4, 2, rng));
  return GmmSource({0.5, 0.5}, std::move(comps));
}

}  // namespace

TEST_CASE("gaussian_mmse base cases") {
  GaussianSource unit(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  CHECK(gaussian_mmse(unit, {MatrixXd::Identity(2, 2), 1.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  Rng rng = make_rng(71);
  GaussianSource src = random_source(4, 3, rng);
  CHECK(gaussian_mmse(src, {MatrixXd::Zero(2, 4), 0.5}) ==
        doctest::Approx(src.covariance().trace()).epsilon(1e-12));
}

TEST_CASE("sigma_matrix shape and rank") {
  GaussianSource unit(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
  CHECK((sigma_matrix(unit, MatrixXd::Identity(3, 3)) - MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  GaussianSource zero(VectorXd::Zero(3), MatrixXd::Zero(3, 3));
  CHECK(sigma_matrix(zero, MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("closed form equals the spectral oracle") {
  Rng rng = make_rng(72);
  const std::vector<double> sigmas = {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2};
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> pick_n(2, 8);
    const int n = pick_n(rng);
    std::uniform_int_distribution<int> pick_s(1, n);
    std::uniform_int_distribution<int> pick_l(1, n + 2);
    GaussianSource src = random_source(n, pick_s(rng), rng);
    MatrixXd phi = random_kernel(pick_l(rng), n, rng);
    for (double s2 : sigmas) {
      const double a = gaussian_mmse(src, {phi, s2});
      const double b = gaussian_mmse_spectral(src, {phi, s2});
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("spectral oracle vanishes past the transition") {
  GaussianSource unit(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  CHECK(gaussian_mmse_spectral(unit, {MatrixXd::Identity(2, 2), 1.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  Rng rng = make_rng(73);
  GaussianSource src = random_source(5, 3, rng);
  MatrixXd phi = random_kernel(4, 5, rng);
  CHECK(gaussian_mmse_spectral(src, {phi, 1e-12}) < 1e-9 * src.covariance().trace());
}

TEST_CASE("expansion_gaussian hand case: one sensed axis of two") {
  GaussianSource unit(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  MatrixXd phi(1, 2);
  phi << 1.0, 0.0;
  Expansion ex = expansion_gaussian(unit, phi);
  CHECK(ex.floor == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ex.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ex.regime == FloorRegime::kFloorPresent);
}

TEST_CASE("expansion floor empties at the transition") {
  Rng rng = make_rng(74);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + t % 4;
    const int s = 1 + t % n;
    GaussianSource src = random_source(n, s, rng);
    MatrixXd phi = random_kernel(s + t % 3, n, rng);
    Expansion ex = expansion_gaussian(src, phi);
    CHECK(ex.floor < 1e-12);
    CHECK(ex.slope > 0.0);
    CHECK(ex.regime == FloorRegime::kFloorAbsent);
  }
}

TEST_CASE("expansion matches the closed form to first order") {
  Rng rng = make_rng(1375);
  GaussianSource src = random_source(5, 4, rng, true);
  MatrixXd phi = random_kernel(3, 5, rng);
  Expansion ex = expansion_gaussian(src, phi);
  CHECK(ex.regime == FloorRegime::kFloorPresent);
  const double s2 = 1e-6;
  const double exact = gaussian_mmse(src, {phi, s2});
  CHECK(std::abs(exact - ex.floor - ex.slope * s2) <= 0.01 * ex.slope * s2);
}

TEST_CASE("expansion remainder stays under 2 percent at scaled noise") {
  Rng rng = make_rng(76);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + t % 5;
    const int s = 1 + t % n;
    GaussianSource src = random_source(n, s, rng, true);
    MatrixXd phi = random_kernel(1 + t % (n + 1), n, rng);
    Expansion ex = expansion_gaussian(src, phi);
    const MatrixXd root = matrix_sqrt_psd(src.covariance());
    const EigenDecomposition sensed = eig_psd(MatrixXd(root * phi.transpose() * phi * root));
    const int rank = numerical_rank(sensed);
    if (rank == 0) continue;
    const double s2 = 1e-6 * sensed.values(rank - 1);
    const double exact = gaussian_mmse(src, {phi, s2});
    CHECK(std::abs(exact - ex.floor - ex.slope * s2) <= 0.02 * ex.slope * s2);
  }
}

TEST_CASE("expansion floor is invariant in the basis and the noise limit") {
  Rng rng = make_rng(77);
  for (int t = 0; t < 20; ++t) {
    const int n = 5;
    const int s = 3 + t % 2;
    GaussianSource src = random_source(n, s, rng, true);
    const int ell = 1 + t % s;
    MatrixXd phi = random_kernel(ell, n, rng);
    Expansion ex = expansion_gaussian(src, phi);

    // Rebuild the unsensed basis by hand, remix it with a random orthogonal
    // matrix, and recompute the floor as captured source energy.
    MatrixXd b = src.image_basis();
    MatrixXd reduced = b.transpose() * sigma_matrix(src, phi) * b;
    EigenDecomposition rd = eig_psd(MatrixXd(0.5 * (reduced + reduced.transpose())));
    const int sensed = numerical_rank(rd);
    const int null_dim = s - sensed;
    if (null_dim == 0) {
      CHECK(ex.floor < 1e-12);
      continue;
    }
    MatrixXd lifted = b * rd.vectors.rightCols(null_dim);
    MatrixXd remix = Eigen::HouseholderQR<MatrixXd>(
                         standard_normal_matrix(null_dim, null_dim, rng))
                         .householderQ();
    MatrixXd mixed = lifted * remix;
    const double floor_again =
        (matrix_sqrt_psd(src.covariance()) * mixed).squaredNorm();
    CHECK(floor_again ==
          doctest::Approx(ex.floor).epsilon(1e-9).scale(src.covariance().trace()));

    // Noise-limit oracle: the closed form at sigma2 = 1e-13 sits on the floor.
    const double limit = gaussian_mmse(src, {phi, 1e-13});
    CHECK(std::abs(limit - ex.floor) <=
          2e-13 * ex.slope + 1e-12 * src.covariance().trace());
  }
}

TEST_CASE("mse_lower_bound reduces to the Gaussian closed form") {
  Rng rng = make_rng(78);
  GaussianSource src = random_source(4, 3, rng);
  MeasurementSystem sys(random_kernel(3, 4, rng), 0.01);
  CHECK(mse_lower_bound(wrap_gaussian(src), sys) ==
        doctest::Approx(gaussian_mmse(src, sys)).epsilon(1e-14));
  GmmSource twin({0.4, 0.6}, {src, src});
  CHECK(mse_lower_bound(twin, sys) ==
        doctest::Approx(gaussian_mmse(src, sys)).epsilon(1e-12));
}

TEST_CASE("lower bound collapses while the estimator floors") {
  GmmSource gmm = two_wishart_model(7);
  Rng krng = make_stream(110, 2);
  MeasurementSystem sys(random_kernel(2, 4, krng), 1e-8);
  const double lb = mse_lower_bound(gmm, sys);
  CHECK(lb < 1e-6);
  MonteCarloResult cm =
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 4000, 909);
  CHECK(cm.estimate > 10.0 * cm.std_error);
  CHECK(cm.estimate > lb);
}

TEST_CASE("expansion_lower_bound mixes class expansions linearly") {
  Rng rng = make_rng(79);
  GaussianSource a = random_source(5, 2, rng, true);
  GaussianSource b = random_source(5, 3, rng, true);
  MatrixXd phi = random_kernel(2, 5, rng);
  GmmSource gmm({0.5, 0.5}, {a, b});
  Expansion mixed = expansion_lower_bound(gmm, phi);
  Expansion ea = expansion_gaussian(a, phi);
  Expansion eb = expansion_gaussian(b, phi);
  CHECK(mixed.floor == doctest::Approx(0.5 * ea.floor + 0.5 * eb.floor).epsilon(1e-12));
  CHECK(mixed.slope == doctest::Approx(0.5 * ea.slope + 0.5 * eb.slope).epsilon(1e-12));

  Expansion single = expansion_lower_bound(wrap_gaussian(a), phi);
  CHECK(single.floor == doctest::Approx(ea.floor).epsilon(1e-14));
  CHECK(single.slope == doctest::Approx(ea.slope).epsilon(1e-14));

  // First-order remainder against the exact lower bound.
  const double s2 = 1e-6;
  const double exact = mse_lower_bound(gmm, {phi, s2});
  CHECK(std::abs(exact - mixed.floor - mixed.slope * s2) <= 0.01 * mixed.slope * s2);
}

TEST_CASE("monte_carlo_mse matches closed forms and stays deterministic") {
  Rng rng = make_rng(80);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 5;
    std::uniform_int_distribution<int> pick_s(1, n);
    GaussianSource src = random_source(n, pick_s(rng), rng);
    MatrixXd phi = random_kernel(1 + t % (n + 1), n, rng);
    std::uniform_real_distribution<double> pick_logs2(-4.0, 0.0);
    MeasurementSystem sys(phi, std::pow(10.0, pick_logs2(rng)));
    MonteCarloResult mc = monte_carlo_mse(wrap_gaussian(src), sys,
                                          EstimatorKind::kConditionalMean, 10000,
                                          derive_seed(81, t));
    CHECK(std::abs(mc.estimate - gaussian_mmse(src, sys)) <= 3.0 * mc.std_error);
  }

  GmmSource gmm = two_wishart_model(7);
  MeasurementSystem sys(random_kernel(3, 4, rng), 0.1);
  MonteCarloResult once =
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 5000, 424242);
  MonteCarloResult twice =
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 5000, 424242);
  CHECK(once.estimate == twice.estimate);
  CHECK(once.std_error == twice.std_error);
  CHECK(once.samples == 5000);

  MonteCarloResult split =
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 5000, 424242, 3);
  MonteCarloResult split_again =
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 5000, 424242, 3);
  CHECK(split.estimate == split_again.estimate);
  CHECK(split.samples == 5000);

  CHECK_THROWS_AS(
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 50, 1),
      std::invalid_argument);
}

TEST_CASE("huge noise pushes the error to the source power") {
  Rng rng = make_rng(82);
  GmmSource gmm = random_gmm(3, {2, 3}, rng, true);
  MeasurementSystem sys(random_kernel(2, 3, rng), 1e6);
  MonteCarloResult mc =
      monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 20000, 5150);
  auto [mean, cov] = gmm_moments(gmm);
  CHECK(std::abs(mc.estimate - cov.trace()) <= 3.0 * mc.std_error);
}

TEST_CASE("mismatched_mse with matching classes is the Gaussian MMSE") {
  Rng rng = make_rng(83);
  for (int t = 0; t < 10; ++t) {
    GmmSource gmm = random_gmm(5, {2, 3}, rng);
    MeasurementSystem sys(random_kernel(3, 5, rng), 0.02);
    for (int k = 0; k < 2; ++k) {
      const double a = mismatched_mse(gmm, k, k, sys);
      const double b = gaussian_mmse(gmm.component(k), sys);
      CHECK(std::abs(a - b) <= 1e-10 * std::max(b, 1e-300));
    }
  }
  GaussianSource shared = random_source(4, 2, rng);
  GmmSource twin({0.5, 0.5}, {shared, shared});
  MeasurementSystem sys(random_kernel(3, 4, rng), 0.1);
  CHECK(mismatched_mse(twin, 0, 1, sys) ==
        doctest::Approx(gaussian_mmse(shared, sys)).epsilon(1e-12));
}

TEST_CASE("mismatched_mse matches a Monte Carlo filter oracle") {
  Rng rng = make_rng(84);
  for (int t = 0; t < 5; ++t) {
    GmmSource gmm = random_gmm(4, {2, 2}, rng);
    MeasurementSystem sys(random_kernel(3, 4, rng), 0.05);
    WienerFilter wm = wiener_filter(gmm.component(1), sys);
    const double closed = mismatched_mse(gmm, 0, 1, sys);
    MonteCarloResult mc =
        mc_filter_mse(gmm.component(0), sys, wm, 20000, derive_seed(85, t));
    CHECK(std::abs(mc.estimate - closed) <= 3.0 * mc.std_error);
  }
}

TEST_CASE("mismatched_mse vanishes for overlapping classes at low noise") {
  Rng rng = make_rng(86);
  for (int t = 0; t < 10; ++t) {
    const int n = 6, s = 3;
    MatrixXd g = standard_normal_matrix(n, s, rng);
    MatrixXd a1 = standard_normal_matrix(s, s, rng);
    MatrixXd a2 = standard_normal_matrix(s, s, rng);
    MatrixXd c1 = g * a1 * a1.transpose() * g.transpose();
    MatrixXd c2 = g * a2 * a2.transpose() * g.transpose();
    std::vector<GaussianSource> comps;
    comps.emplace_back(VectorXd(g * random_vector(s, rng)), 0.5 * (c1 + c1.transpose()));
    comps.emplace_back(VectorXd(g * random_vector(s, rng)), 0.5 * (c2 + c2.transpose()));
    GmmSource gmm({0.5, 0.5}, std::move(comps));
    CHECK(overlap_case(gmm, 0, 1) == OverlapCase::kOverlapping);
    MatrixXd phi = random_kernel(s + 1, n, rng);
    CHECK(mismatched_mse(gmm, 0, 1, {phi, 1e-8}) < 1e-5);
    CHECK(mismatched_mse(gmm, 0, 1, {phi, 1e-10}) <
          1e-6 * gmm.component(0).covariance().trace());
  }
}

TEST_CASE("cr upper bound brackets the Gaussian closed form for one class") {
  Rng rng = make_rng(87);
  GaussianSource src = random_source(4, 3, rng);
  MeasurementSystem sys(random_kernel(3, 4, rng), 0.05);
  MonteCarloResult cr = mse_cr_upper_bound(wrap_gaussian(src), sys, 10000, 606);
  CHECK(std::abs(cr.estimate - gaussian_mmse(src, sys)) <= 3.0 * cr.std_error);
}

TEST_CASE("sandwich holds on shared samples") {
  Rng rng = make_rng(88);
  GmmSource gmm = random_gmm(4, {2, 3}, rng);
  for (double s2 : {1e-1, 1e-3, 1e-5}) {
    MeasurementSystem sys(random_kernel(3, 4, rng), s2);
    const std::uint64_t seed = derive_seed(89, static_cast<std::uint64_t>(s2 * 1e6));
    MonteCarloResult cm =
        monte_carlo_mse(gmm, sys, EstimatorKind::kConditionalMean, 10000, seed);
    MonteCarloResult cr = mse_cr_upper_bound(gmm, sys, 10000, seed);
    MonteCarloResult lm = monte_carlo_mse(gmm, sys, EstimatorKind::kLmmse, 10000, seed);
    CHECK(mse_lower_bound(gmm, sys) <= cm.estimate + 3.0 * cm.std_error);
    CHECK(cm.estimate <= cr.estimate + 3.0 * (cm.std_error + cr.std_error));
    CHECK(cm.estimate <= lm.estimate + 3.0 * (cm.std_error + lm.std_error));
  }
}

TEST_CASE("gaussian_mmse is monotone in noise and measurements") {
  Rng rng = make_rng(90);
  GaussianSource src = random_source(5, 4, rng);
  MatrixXd phi = random_kernel(3, 5, rng);
  double previous = 0.0;
  for (double s2 : {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2}) {
    const double value = gaussian_mmse(src, {phi, s2});
    CHECK(value >= previous - 1e-12);
    previous = value;
  }

  MatrixXd grown = random_kernel(1, 5, rng);
  double last = gaussian_mmse(src, {grown, 0.01});
  for (int extra = 0; extra < 6; ++extra) {
    MatrixXd next(grown.rows() + 1, 5);
    next.topRows(grown.rows()) = grown;
    next.bottomRows(1) = random_kernel(1, 5, rng);
    grown = next;
    const double value = gaussian_mmse(src, {grown, 0.01});
    CHECK(value <= last + 1e-12);
    last = value;
  }
}

TEST_CASE("floors track the rank threshold over many kernels") {
  Rng rng = make_rng(91);
  GaussianSource src = random_source(5, 3, rng);
  for (int t = 0; t < 50; ++t) {
    Rng krng = make_stream(92, static_cast<std::uint64_t>(t));
    for (int ell = 1; ell <= 5; ++ell) {
      Expansion ex = expansion_gaussian(src, random_kernel(ell, 5, krng));
      if (ell >= 3) {
        CHECK(ex.floor < 1e-12);
      } else {
        CHECK(ex.floor > 1e-12);
      }
    }
  }
}

TEST_CASE("mixture floors vanish past s_max and persist below it") {
  GmmSource gmm = two_wishart_model(7);
  Rng krng = make_stream(93, 0);
  MeasurementSystem below(random_kernel(1, 4, krng), 1e-8);
  MonteCarloResult cm_below =
      monte_carlo_mse(gmm, below, EstimatorKind::kConditionalMean, 4000, 313);
  CHECK(cm_below.estimate > 10.0 * cm_below.std_error);

  MeasurementSystem above(random_kernel(3, 4, krng), 1e-8);
  MonteCarloResult cm_above =
      monte_carlo_mse(gmm, above, EstimatorKind::kConditionalMean, 4000, 313);
  CHECK(cm_above.estimate < 1e-3);
}

TEST_CASE("decay_diagnostics recovers synthetic power laws") {
  std::vector<std::pair<double, double>> quadratic;
  for (double s2 : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
    quadratic.emplace_back(s2, 3.0 * s2);
  }
  DecayDiagnostics d = decay_diagnostics(quadratic, 1.0);
  CHECK_FALSE(d.floor_present);
  CHECK(d.decay_exponent == doctest::Approx(1.0).epsilon(0.01));

  std::vector<std::pair<double, double>> floored;
  for (double s2 : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    floored.emplace_back(s2, 0.2 + s2);
  }
  DecayDiagnostics f = decay_diagnostics(floored, 1.0, 0.2);
  CHECK(f.floor_present);
  CHECK(f.floor_estimate == doctest::Approx(0.2).epsilon(1e-4));
  CHECK(f.decay_exponent == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("decay_diagnostics validates its grid") {
  std::vector<std::pair<double, double>> short_grid = {{1e-2, 1.0}, {1e-3, 0.5}, {1e-4, 0.2}};
  CHECK_THROWS_AS(decay_diagnostics(short_grid, 1.0), std::invalid_argument);
  std::vector<std::pair<double, double>> unsorted = {
      {1e-2, 1.0}, {1e-4, 0.5}, {1e-3, 0.2}, {1e-5, 0.1}};
  CHECK_THROWS_AS(decay_diagnostics(unsorted, 1.0), std::invalid_argument);
}
