#include "gmmcs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gmmcs/analysis.hpp"
#include "gmmcs/em.hpp"
#include "gmmcs/estimators.hpp"
#include "gmmcs/image.hpp"
#include "gmmcs/io.hpp"
#include "gmmcs/kernel_design.hpp"
#include "gmmcs/model.hpp"
#include "gmmcs/random.hpp"
#include "gmmcs/rng.hpp"

namespace gmmcs {

namespace {

std::string format_int(std::int64_t value) { return std::to_string(value); }

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

double mixture_power(const GmmSource& gmm) {
  double power = 0.0;
  for (int k = 0; k < gmm.num_components(); ++k) {
    power += gmm.weight(k) * gmm.component(k).covariance().trace();
  }
  return power;
}

}  // namespace

void run_gen_model(const std::string& kind, int n, int num_components, int dof,
                   std::uint64_t seed, const std::string& out_path) {
  if (n < 1) throw std::invalid_argument("gen-model: n must be positive");
  if (dof < 1) throw std::invalid_argument("gen-model: dof must be positive");
  Rng rng = make_rng(seed);
  std::vector<double> weights;
  std::vector<GaussianSource> components;
  if (kind == "gaussian") {
    weights.push_back(1.0);
    components.emplace_back(Eigen::VectorXd::Zero(n), sample_wishart(n, dof, rng));
  } else if (kind == "gmm-wishart") {
    if (num_components < 1) throw std::invalid_argument("gen-model: K must be positive");
    for (int k = 0; k < num_components; ++k) {
      weights.push_back(1.0 / num_components);
      components.emplace_back(Eigen::VectorXd::Zero(n), sample_wishart(n, dof, rng));
    }
  } else {
    throw std::invalid_argument("gen-model: kind must be gaussian or gmm-wishart");
  }
  save_model(GmmSource(std::move(weights), std::move(components)), out_path);
}

namespace {

struct SweepRow {
  int ell;
  double sigma2;
  std::string quantity;
  double value;
  double std_error;
};

const std::set<std::string> kClosedQuantities = {"closed_form", "lower_bound", "designed",
                                                 "lbd"};
const std::set<std::string> kMcQuantities = {"conditional_mean_mc", "cr_upper", "lmmse"};

}  // namespace

void run_sweep(const SweepSpec& spec, const std::string& out_path) {
  const GmmSource model = load_model(spec.model_path);
  const bool single_class = model.num_components() == 1;

  std::vector<std::string> quantities = spec.quantities;
  if (quantities.empty()) {
    quantities = single_class
                     ? std::vector<std::string>{"closed_form"}
                     : std::vector<std::string>{"lower_bound", "conditional_mean_mc",
                                                "cr_upper", "lmmse"};
  }
  bool any_mc = false;
  for (const std::string& q : quantities) {
    if (kMcQuantities.count(q)) {
      any_mc = true;
    } else if (!kClosedQuantities.count(q)) {
      throw std::invalid_argument("sweep: unknown quantity: " + q);
    }
    if ((q == "closed_form" || q == "designed") && !single_class) {
      throw std::invalid_argument("sweep: quantity " + q + " needs a single-class model");
    }
  }
  if (any_mc && spec.mc_samples < 100) {
    throw std::invalid_argument("sweep: mc_samples must be at least 100");
  }
  if (spec.sigma2_grid.empty()) throw std::invalid_argument("sweep: sigma2 grid is empty");
  for (double s2 : spec.sigma2_grid) {
    if (!(s2 > 0.0)) throw std::invalid_argument("sweep: sigma2 values must be positive");
  }
  if (spec.kernel_mode == KernelMode::kDesigned && !single_class) {
    throw std::invalid_argument("sweep: designed kernel mode needs a single-class model");
  }

  Eigen::MatrixXd fixed_kernel;
  std::vector<int> ells = spec.ells;
  if (spec.kernel_mode == KernelMode::kFixed) {
    fixed_kernel = load_kernel(spec.kernel_path);
    if (fixed_kernel.cols() != model.dim()) {
      throw std::invalid_argument("sweep: fixed kernel width does not match model dimension");
    }
    if (ells.empty()) ells.push_back(static_cast<int>(fixed_kernel.rows()));
    for (int ell : ells) {
      if (ell != fixed_kernel.rows()) {
        throw std::invalid_argument("sweep: fixed kernel rows do not match requested ell");
      }
    }
  }
  if (ells.empty()) throw std::invalid_argument("sweep: ell list is empty");
  for (int ell : ells) {
    if (ell < 1) throw std::invalid_argument("sweep: ell values must be positive");
  }

  std::vector<SweepRow> rows;
  for (std::size_t iell = 0; iell < ells.size(); ++iell) {
    const int ell = ells[iell];
    const std::uint64_t ell_base = derive_seed(spec.seed, iell);
    Eigen::MatrixXd kernel;
    if (spec.kernel_mode == KernelMode::kFixed) {
      kernel = fixed_kernel;
    } else if (spec.kernel_mode == KernelMode::kRandom) {
      Rng krng(derive_seed(ell_base, 0));
      kernel = random_kernel(ell, model.dim(), krng);
    }
    for (std::size_t isig = 0; isig < spec.sigma2_grid.size(); ++isig) {
      const double sigma2 = spec.sigma2_grid[isig];
      const std::uint64_t point_seed = derive_seed(ell_base, 1 + isig);
      const MeasurementSystem system =
          spec.kernel_mode == KernelMode::kDesigned
              ? design_kernel_gaussian(model.component(0), ell, sigma2)
              : MeasurementSystem(kernel, sigma2);
      for (const std::string& q : quantities) {
        SweepRow row{ell, sigma2, q, 0.0, 0.0};
        if (q == "closed_form") {
          row.value = gaussian_mmse(model.component(0), system);
        } else if (q == "lower_bound") {
          row.value = mse_lower_bound(model, system);
        } else if (q == "designed") {
          row.value = designed_mmse(model.component(0), ell, sigma2);
        } else if (q == "lbd") {
          row.value = mse_lower_bound_designed(model, ell, sigma2);
        } else {
          EstimatorKind kind = EstimatorKind::kConditionalMean;
          if (q == "cr_upper") kind = EstimatorKind::kClassifyReconstruct;
          if (q == "lmmse") kind = EstimatorKind::kLmmse;
          const MonteCarloResult mc = monte_carlo_mse(model, system, kind, spec.mc_samples,
                                                      point_seed, spec.workers);
          row.value = mc.estimate;
          row.std_error = mc.std_error;
        }
        rows.push_back(std::move(row));
      }
    }
  }

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.ell != b.ell) return a.ell < b.ell;
    if (a.sigma2 != b.sigma2) return a.sigma2 > b.sigma2;
    return a.quantity < b.quantity;
  });

  CsvBuilder csv;
  csv.comment(kVersion);
  csv.comment("command: sweep");
  csv.comment("model: " + spec.model_path);
  csv.comment("seed: " + format_int(static_cast<std::int64_t>(spec.seed)));
  csv.comment("mc_samples: " + format_int(spec.mc_samples));
  csv.comment("workers: " + format_int(spec.workers));
  const std::string mode = spec.kernel_mode == KernelMode::kRandom     ? "random"
                           : spec.kernel_mode == KernelMode::kDesigned ? "designed"
                                                                       : "fixed:" + spec.kernel_path;
  csv.comment("kernel: " + mode);
  csv.comment("quantities: " + join(quantities, ' '));
  csv.row({"ell", "sigma2", "quantity", "value", "std_error", "seed"});
  for (const SweepRow& row : rows) {
    csv.row({format_int(row.ell), format_double(row.sigma2), row.quantity,
             format_double(row.value), format_double(row.std_error),
             format_int(static_cast<std::int64_t>(spec.seed))});
  }
  write_text_file(out_path, csv.str());
}

void run_phase_scan(const std::string& model_path, int ell_min, int ell_max,
                    double sigma2_probe, int trials, std::int64_t mc_samples,
                    std::uint64_t seed, const std::string& out_path) {
  if (ell_min < 1 || ell_max < ell_min) throw std::invalid_argument("phase-scan: bad ell range");
  if (!(sigma2_probe > 0.0)) throw std::invalid_argument("phase-scan: sigma2 probe must be positive");
  if (trials < 1) throw std::invalid_argument("phase-scan: trials must be positive");
  const GmmSource model = load_model(model_path);
  const bool single_class = model.num_components() == 1;
  const double power = mixture_power(model);

  CsvBuilder csv;
  csv.comment(kVersion);
  csv.comment("command: phase-scan");
  csv.comment("model: " + model_path);
  csv.comment("seed: " + format_int(static_cast<std::int64_t>(seed)));
  csv.comment("sigma2_probe: " + format_double(sigma2_probe));
  csv.comment("trials: " + format_int(trials));
  csv.comment("s_max: " + format_int(model.s_max()));
  csv.row({"ell", "floor_estimate", "floor_present"});

  for (int ell = ell_min; ell <= ell_max; ++ell) {
    const std::uint64_t ell_base = derive_seed(seed, static_cast<std::uint64_t>(ell));
    std::string present;
    double floor_estimate = 0.0;
    if (single_class) {
      double total = 0.0;
      for (int t = 0; t < trials; ++t) {
        Rng krng(derive_seed(ell_base, 2 * t));
        const Eigen::MatrixXd kernel = random_kernel(ell, model.dim(), krng);
        total += expansion_gaussian(model.component(0), kernel).floor;
      }
      floor_estimate = total / trials;
      present = floor_estimate >= 1e-9 * power ? "1" : "0";
    } else {
      double total = 0.0;
      double variance = 0.0;
      double lower_bound_floor = 0.0;
      double lower_bound_value = 0.0;
      for (int t = 0; t < trials; ++t) {
        Rng krng(derive_seed(ell_base, 2 * t));
        const Eigen::MatrixXd kernel = random_kernel(ell, model.dim(), krng);
        const MeasurementSystem system(kernel, sigma2_probe);
        const MonteCarloResult mc =
            monte_carlo_mse(model, system, EstimatorKind::kConditionalMean, mc_samples,
                            derive_seed(ell_base, 2 * t + 1));
        total += mc.estimate;
        variance += mc.std_error * mc.std_error;
        lower_bound_floor += expansion_lower_bound(model, kernel).floor;
        lower_bound_value += mse_lower_bound(model, system);
      }
      floor_estimate = total / trials;
      const double std_error = std::sqrt(variance) / trials;
      lower_bound_floor /= trials;
      lower_bound_value /= trials;
      if (ell == model.s_max()) {
        present = "na";
      } else if (lower_bound_floor >= 1e-9 * power) {
        // The per-class bound already floors, so the mixture MMSE must.
        present = "1";
      } else {
        // The bound decays; the actual floor persists only when the estimate
        // sits significantly above the bound at the probe noise.
        present = floor_estimate - lower_bound_value > 10.0 * std_error ? "1" : "0";
      }
    }
    csv.row({format_int(ell), format_double(floor_estimate), present});
  }
  write_text_file(out_path, csv.str());
}

void run_design_compare(const std::string& model_path, const std::vector<int>& ells,
                        const std::vector<double>& sigma2_grid, int random_trials,
                        std::uint64_t seed, const std::string& out_path) {
  if (ells.empty() || sigma2_grid.empty()) {
    throw std::invalid_argument("design-compare: ell list and sigma2 grid must be nonempty");
  }
  if (random_trials < 1) throw std::invalid_argument("design-compare: trials must be positive");
  const GmmSource model = load_model(model_path);
  const bool single_class = model.num_components() == 1;

  CsvBuilder csv;
  csv.comment(kVersion);
  csv.comment("command: design-compare");
  csv.comment("model: " + model_path);
  csv.comment("seed: " + format_int(static_cast<std::int64_t>(seed)));
  csv.comment("random_trials: " + format_int(random_trials));
  std::vector<std::string> header = {"ell",           "sigma2",         "designed",
                                     "random_mean",   "random_min",     "random_max",
                                     "designed_floor", "designed_slope", "random_floor_mean",
                                     "random_slope_mean"};
  if (!single_class) header.push_back("lbd");
  csv.row(header);

  for (std::size_t iell = 0; iell < ells.size(); ++iell) {
    const int ell = ells[iell];
    if (ell < 1) throw std::invalid_argument("design-compare: ell values must be positive");
    std::vector<Eigen::MatrixXd> kernels;
    kernels.reserve(random_trials);
    const std::uint64_t ell_base = derive_seed(seed, iell);
    for (int t = 0; t < random_trials; ++t) {
      Rng krng(derive_seed(ell_base, static_cast<std::uint64_t>(t)));
      kernels.push_back(random_kernel(ell, model.dim(), krng));
    }

    const Expansion designed_exp = single_class
                                       ? expansion_designed(model.component(0), ell)
                                       : expansion_lower_bound_designed(model, ell);
    double random_floor = 0.0;
    double random_slope = 0.0;
    for (const Eigen::MatrixXd& kernel : kernels) {
      const Expansion e = single_class ? expansion_gaussian(model.component(0), kernel)
                                       : expansion_lower_bound(model, kernel);
      random_floor += e.floor;
      random_slope += e.slope;
    }
    random_floor /= random_trials;
    random_slope /= random_trials;

    for (double sigma2 : sigma2_grid) {
      if (!(sigma2 > 0.0)) {
        throw std::invalid_argument("design-compare: sigma2 values must be positive");
      }
      const double designed = single_class
                                  ? designed_mmse(model.component(0), ell, sigma2)
                                  : mse_lower_bound_designed(model, ell, sigma2);
      double mean = 0.0;
      double lo = 0.0;
      double hi = 0.0;
      for (int t = 0; t < random_trials; ++t) {
        const MeasurementSystem system(kernels[t], sigma2);
        const double value = single_class ? gaussian_mmse(model.component(0), system)
                                          : mse_lower_bound(model, system);
        mean += value;
        lo = t == 0 ? value : std::min(lo, value);
        hi = t == 0 ? value : std::max(hi, value);
      }
      mean /= random_trials;
      std::vector<std::string> row = {format_int(ell),
                                      format_double(sigma2),
                                      format_double(designed),
                                      format_double(mean),
                                      format_double(lo),
                                      format_double(hi),
                                      format_double(designed_exp.floor),
                                      format_double(designed_exp.slope),
                                      format_double(random_floor),
                                      format_double(random_slope)};
      if (!single_class) row.push_back(format_double(designed));
      csv.row(row);
    }
  }
  write_text_file(out_path, csv.str());
}

namespace {

GmmSource truncate_model(const GmmSource& model, int s_max) {
  if (s_max < 0) return model;
  std::vector<GaussianSource> components;
  components.reserve(model.num_components());
  for (int k = 0; k < model.num_components(); ++k) {
    components.emplace_back(model.component(k).mean(),
                            truncate_covariance(model.component(k).covariance(), s_max));
  }
  return GmmSource(model.weights(), std::move(components));
}

}  // namespace

void run_image_pipeline(const PatchPipelineSpec& spec, const std::string& out_csv) {
  if (spec.patch_size < 1) throw std::invalid_argument("image-pipeline: bad patch size");
  if (spec.ells.empty() || spec.sigma2_grid.empty()) {
    throw std::invalid_argument("image-pipeline: ell list and sigma2 grid must be nonempty");
  }
  const GrayImage raw = load_pgm(spec.image_path);
  GrayImage image = raw;
  image.height = (raw.height / spec.patch_size) * spec.patch_size;
  image.width = (raw.width / spec.patch_size) * spec.patch_size;
  if (image.height < spec.patch_size || image.width < spec.patch_size) {
    throw std::invalid_argument("image-pipeline: image smaller than one patch");
  }
  image.pixels = raw.pixels.topLeftCorner(image.height, image.width);

  const int n = spec.patch_size * spec.patch_size;
  const GmmSource loaded = load_model(spec.model_path);
  if (loaded.dim() != n) {
    throw std::invalid_argument("image-pipeline: prior dimension does not match patch size");
  }
  const GmmSource prior = truncate_model(loaded, spec.s_max);

  const Eigen::MatrixXd patches = extract_patches(image, spec.patch_size);
  const int num_patches = static_cast<int>(patches.cols());

  // Ground truth: each clean patch projected onto the affine span of its
  // MAP class under a near-noiseless identity probe.
  const MeasurementSystem probe(Eigen::MatrixXd::Identity(n, n), 1e-6);
  const GmmDecoder probe_decoder(prior, probe);
  Eigen::MatrixXd truth(n, num_patches);
  for (int j = 0; j < num_patches; ++j) {
    const int c = probe_decoder.classify(patches.col(j));
    const GaussianSource& cls = prior.component(c);
    const Eigen::MatrixXd basis = cls.image_basis();
    const Eigen::VectorXd centered = patches.col(j) - cls.mean();
    truth.col(j) = cls.mean() + basis * (basis.transpose() * centered);
  }
  const double projection_psnr = psnr(truth, patches);

  const bool save_images = !spec.out_dir.empty();
  if (save_images) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + spec.out_dir);
    save_pgm(assemble_patches(truth, spec.patch_size, image.width, image.height),
             spec.out_dir + "/projection.pgm");
  }

  CsvBuilder csv;
  csv.comment(kVersion);
  csv.comment("command: image-pipeline");
  csv.comment("image: " + spec.image_path);
  csv.comment("model: " + spec.model_path);
  csv.comment("seed: " + format_int(static_cast<std::int64_t>(spec.seed)));
  csv.comment("patch_size: " + format_int(spec.patch_size));
  csv.comment("s_max: " + format_int(spec.s_max));
  csv.comment("projection_psnr: " + format_double(projection_psnr));
  csv.row({"sigma2", "ell", "psnr"});

  for (std::size_t iell = 0; iell < spec.ells.size(); ++iell) {
    const int ell = spec.ells[iell];
    if (ell < 1) throw std::invalid_argument("image-pipeline: ell values must be positive");
    const std::uint64_t ell_base = derive_seed(spec.seed, iell);
    Rng krng(derive_seed(ell_base, 0));
    const Eigen::MatrixXd kernel = random_kernel(ell, n, krng);
    Rng nrng(derive_seed(ell_base, 1));
    // Unit-scale noise drawn once per ell and rescaled across the grid keeps
    // the PSNR-vs-noise curve monotone.
    const Eigen::MatrixXd unit_noise = standard_normal_matrix(ell, num_patches, nrng);

    std::vector<double> grid = spec.sigma2_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    for (std::size_t isig = 0; isig < grid.size(); ++isig) {
      const double sigma2 = grid[isig];
      if (!(sigma2 > 0.0)) {
        throw std::invalid_argument("image-pipeline: sigma2 values must be positive");
      }
      const MeasurementSystem system(kernel, sigma2);
      const GmmDecoder decoder(prior, system);
      const double noise_sd = std::sqrt(sigma2);
      Eigen::MatrixXd recon(n, num_patches);
      for (int j = 0; j < num_patches; ++j) {
        const Eigen::VectorXd y = kernel * truth.col(j) + noise_sd * unit_noise.col(j);
        recon.col(j) = decoder.conditional_mean(y);
      }
      csv.row({format_double(sigma2), format_int(ell), format_double(psnr(recon, truth))});
      if (save_images) {
        save_pgm(assemble_patches(recon, spec.patch_size, image.width, image.height),
                 spec.out_dir + "/recon_ell" + std::to_string(ell) + "_s" +
                     std::to_string(isig) + ".pgm");
      }
    }
  }
  write_text_file(out_csv, csv.str());
}

namespace {

Eigen::MatrixXd load_csv_samples(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw std::invalid_argument("fit-em: non-numeric CSV field: " + field);
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("fit-em: ragged CSV rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("fit-em: no samples in " + path);
  Eigen::MatrixXd data(rows.front().size(), rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    }
  }
  return data;
}

bool ends_with(const std::string& text, const std::string& suffix) {
  return text.size() >= suffix.size() &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<double> run_fit_em(const std::string& data_path, int patch_size,
                               int num_components, int s_max, int iterations,
                               std::uint64_t seed, const std::string& out_path) {
  Eigen::MatrixXd data;
  if (ends_with(data_path, ".pgm")) {
    data = extract_patches(load_pgm(data_path), patch_size);
  } else {
    data = load_csv_samples(data_path);
  }
  if (s_max < 0) s_max = static_cast<int>(data.rows());
  EmResult result = fit_em(data, num_components, s_max, iterations, seed);
  save_model(result.model, out_path);
  return result.log_likelihoods;
}

}  // namespace gmmcs
