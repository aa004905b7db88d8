#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmmcs/experiments.hpp"
#include "gmmcs/io.hpp"

namespace {

gmmcs::KernelMode parse_kernel_mode(const std::string& text, std::string* fixed_path) {
  if (text == "random") return gmmcs::KernelMode::kRandom;
  if (text == "designed") return gmmcs::KernelMode::kDesigned;
  if (text.rfind("fixed:", 0) == 0) {
    *fixed_path = text.substr(6);
    if (fixed_path->empty()) throw std::invalid_argument("--kernel fixed: needs a path");
    return gmmcs::KernelMode::kFixed;
  }
  throw std::invalid_argument("--kernel must be random, designed, or fixed:PATH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal reconstruction experiments for Gaussian and GMM sources "
               "under noisy compressive measurements"};
  app.require_subcommand(1);

  // gen-model
  std::string gen_kind = "gaussian";
  int gen_n = 4;
  int gen_components = 1;
  int gen_dof = 2;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-model", "Write a synthetic Wishart model file");
  gen->add_option("--kind", gen_kind, "gaussian or gmm-wishart");
  gen->add_option("--n", gen_n, "signal dimension")->required();
  gen->add_option("--components,-K", gen_components, "number of classes");
  gen->add_option("--dof", gen_dof, "Wishart degrees of freedom")->required();
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output model path")->required();

  // sweep
  gmmcs::SweepSpec sweep;
  std::string sweep_kernel = "random";
  std::string sweep_out;
  CLI::App* sw = app.add_subcommand("sweep", "Quantities over an (ell, sigma2) grid");
  sw->add_option("--model", sweep.model_path, "model JSON path")->required();
  sw->add_option("--ell", sweep.ells, "measurement counts")->delimiter(',');
  sw->add_option("--sigma2-grid", sweep.sigma2_grid, "noise variances")
      ->delimiter(',')
      ->required();
  sw->add_option("--quantities", sweep.quantities,
                 "subset of closed_form lower_bound cr_upper lmmse conditional_mean_mc "
                 "designed lbd")
      ->delimiter(',');
  sw->add_option("--mc-samples", sweep.mc_samples, "Monte Carlo samples per grid point");
  sw->add_option("--seed", sweep.seed, "random seed");
  sw->add_option("--workers", sweep.workers, "Monte Carlo substreams");
  sw->add_option("--kernel", sweep_kernel, "random, designed, or fixed:PATH");
  sw->add_option("--out", sweep_out, "output CSV path")->required();

  // phase-scan
  std::string scan_model;
  int scan_ell_min = 1;
  int scan_ell_max = 1;
  double scan_probe = 1e-8;
  int scan_trials = 1;
  std::int64_t scan_samples = 10000;
  std::uint64_t scan_seed = 1;
  std::string scan_out;
  CLI::App* scan = app.add_subcommand("phase-scan", "Error floor vs measurement count");
  scan->add_option("--model", scan_model, "model JSON path")->required();
  scan->add_option("--ell-min", scan_ell_min, "smallest ell")->required();
  scan->add_option("--ell-max", scan_ell_max, "largest ell")->required();
  scan->add_option("--sigma2-probe", scan_probe, "noise level for Monte Carlo floors");
  scan->add_option("--trials", scan_trials, "random kernels per ell");
  scan->add_option("--mc-samples", scan_samples, "Monte Carlo samples per kernel");
  scan->add_option("--seed", scan_seed, "random seed");
  scan->add_option("--out", scan_out, "output CSV path")->required();

  // design-compare
  std::string cmp_model;
  std::vector<int> cmp_ells;
  std::vector<double> cmp_grid;
  int cmp_trials = 50;
  std::uint64_t cmp_seed = 1;
  std::string cmp_out;
  CLI::App* cmp = app.add_subcommand("design-compare",
                                     "Designed kernel against random kernel statistics");
  cmp->add_option("--model", cmp_model, "model JSON path")->required();
  cmp->add_option("--ell", cmp_ells, "measurement counts")->delimiter(',')->required();
  cmp->add_option("--sigma2-grid", cmp_grid, "noise variances")->delimiter(',')->required();
  cmp->add_option("--trials", cmp_trials, "random kernels per ell");
  cmp->add_option("--seed", cmp_seed, "random seed");
  cmp->add_option("--out", cmp_out, "output CSV path")->required();

  // image-pipeline
  gmmcs::PatchPipelineSpec pipe;
  std::string pipe_out;
  CLI::App* ip = app.add_subcommand("image-pipeline",
                                    "Patch-wise compressive reconstruction of a PGM image");
  ip->add_option("--image", pipe.image_path, "input PGM (P2 or P5)")->required();
  ip->add_option("--model", pipe.model_path, "prior model JSON path")->required();
  ip->add_option("--patch-size", pipe.patch_size, "patch edge length");
  ip->add_option("--s-max", pipe.s_max, "kept principal components per class");
  ip->add_option("--ell", pipe.ells, "measurement counts")->delimiter(',')->required();
  ip->add_option("--sigma2-grid", pipe.sigma2_grid, "noise variances")
      ->delimiter(',')
      ->required();
  ip->add_option("--seed", pipe.seed, "random seed");
  ip->add_option("--out-dir", pipe.out_dir, "directory for reconstructed PGMs");
  ip->add_option("--out", pipe_out, "output CSV path")->required();

  // fit-em
  std::string em_data;
  int em_patch = 8;
  int em_components = 1;
  int em_smax = -1;
  int em_iterations = 25;
  std::uint64_t em_seed = 1;
  std::string em_out;
  CLI::App* em = app.add_subcommand("fit-em", "Fit a GMM prior to patches by EM");
  em->add_option("--data", em_data, "PGM image (patches extracted) or CSV of row samples")
      ->required();
  em->add_option("--patch-size", em_patch, "patch edge length for PGM input");
  em->add_option("--components,-K", em_components, "number of classes")->required();
  em->add_option("--s-max", em_smax, "covariance rank cap (-1 keeps full rank)");
  em->add_option("--iterations", em_iterations, "EM iterations");
  em->add_option("--seed", em_seed, "random seed");
  em->add_option("--out", em_out, "output model path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      if (gen_kind == "gaussian") gen_components = 1;
      gmmcs::run_gen_model(gen_kind, gen_n, gen_components, gen_dof, gen_seed, gen_out);
    } else if (sw->parsed()) {
      sweep.kernel_mode = parse_kernel_mode(sweep_kernel, &sweep.kernel_path);
      gmmcs::run_sweep(sweep, sweep_out);
    } else if (scan->parsed()) {
      gmmcs::run_phase_scan(scan_model, scan_ell_min, scan_ell_max, scan_probe, scan_trials,
                            scan_samples, scan_seed, scan_out);
    } else if (cmp->parsed()) {
      gmmcs::run_design_compare(cmp_model, cmp_ells, cmp_grid, cmp_trials, cmp_seed, cmp_out);
    } else if (ip->parsed()) {
      gmmcs::run_image_pipeline(pipe, pipe_out);
    } else if (em->parsed()) {
      const std::vector<double> trace = gmmcs::run_fit_em(em_data, em_patch, em_components,
                                                          em_smax, em_iterations, em_seed, em_out);
      for (std::size_t i = 0; i < trace.size(); ++i) {
        std::cout << "iteration " << i + 1 << " log_likelihood "
                  << gmmcs::format_double(trace[i]) << "\n";
      }
    }
  } catch (const gmmcs::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
