#pragma once

#include <Eigen/Dense>
#include <string>

namespace gmmcs {

/// 8-bit grayscale image held as doubles in [0, 255].
struct GrayImage {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd pixels;  // height x width
};

/// Reads PGM, ASCII (P2) or binary (P5), maxval up to 255.
GrayImage load_pgm(const std::string& path);

/// Writes binary PGM (P5) with maxval 255; values rounded and clamped.
void save_pgm(const GrayImage& image, const std::string& path);

/// Non-overlapping patch_size x patch_size patches as columns. The image is
/// cropped to whole patches; patches scan left to right, then top to bottom;
/// pixels within a patch stack column by column.
Eigen::MatrixXd extract_patches(const GrayImage& image, int patch_size);

/// Inverse of extract_patches for the cropped width x height geometry.
GrayImage assemble_patches(const Eigen::MatrixXd& patches, int patch_size, int width,
                           int height);

/// 10 log10(peak^2 / mean squared difference); +inf for identical inputs.
double psnr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double peak = 255.0);

}  // namespace gmmcs
