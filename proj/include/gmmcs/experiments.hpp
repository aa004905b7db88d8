#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gmmcs {

enum class KernelMode { kRandom, kDesigned, kFixed };

/// One CSV table of quantities over an (ell, sigma2) grid. One kernel is
/// drawn per ell and reused across the sigma2 grid; all Monte Carlo
/// quantities at a grid point share one derived seed, so their samples pair.
struct SweepSpec {
  std::string model_path;
  std::vector<int> ells;
  std::vector<double> sigma2_grid;
  std::vector<std::string> quantities;  // empty picks defaults for the model
  std::int64_t mc_samples = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  KernelMode kernel_mode = KernelMode::kRandom;
  std::string kernel_path;  // consulted when kernel_mode == kFixed
};

/// kind "gaussian": one zero-mean class with a Wishart(n, dof) covariance.
/// kind "gmm-wishart": num_components zero-mean equal-weight classes with
/// independent Wishart(n, dof) covariances.
void run_gen_model(const std::string& kind, int n, int num_components, int dof,
                   std::uint64_t seed, const std::string& out_path);

void run_sweep(const SweepSpec& spec, const std::string& out_path);

/// Error-floor scan over ell in [ell_min, ell_max]. Single-class models use
/// the closed-form expansion floor averaged over `trials` random kernels;
/// mixtures use conditional-mean Monte Carlo at sigma2_probe and call the
/// floor present when the estimate exceeds 10 standard errors. The row at
/// ell = s_max of a mixture is reported but not classified.
void run_phase_scan(const std::string& model_path, int ell_min, int ell_max,
                    double sigma2_probe, int trials, std::int64_t mc_samples,
                    std::uint64_t seed, const std::string& out_path);

/// Designed-kernel value and expansion against random-kernel statistics.
void run_design_compare(const std::string& model_path, const std::vector<int>& ells,
                        const std::vector<double>& sigma2_grid, int random_trials,
                        std::uint64_t seed, const std::string& out_path);

struct PatchPipelineSpec {
  std::string image_path;
  std::string model_path;
  int patch_size = 8;
  int s_max = -1;  // -1 keeps class covariances as loaded
  std::vector<int> ells;
  std::vector<double> sigma2_grid;
  std::uint64_t seed = 1;
  std::string out_dir;  // reconstructed PGMs land here when nonempty
};

void run_image_pipeline(const PatchPipelineSpec& spec, const std::string& out_csv);

/// Fits a GMM to patches (PGM input: extracted 8x8-style patches; CSV input:
/// one sample per row), writes the model file, returns the per-iteration
/// log-likelihood trace.
std::vector<double> run_fit_em(const std::string& data_path, int patch_size,
                               int num_components, int s_max, int iterations,
                               std::uint64_t seed, const std::string& out_path);

}  // namespace gmmcs
