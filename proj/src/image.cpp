#include "gmmcs/image.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gmmcs/io.hpp"

namespace gmmcs {

namespace {

// Skips whitespace and '#' comment lines, then reads one header token.
std::string next_header_token(const std::string& text, std::size_t& pos) {
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
         text[pos] != '#') {
    ++pos;
  }
  if (start == pos) throw IoError("truncated PGM header");
  return text.substr(start, pos - start);
}

int parse_header_int(const std::string& text, std::size_t& pos, const char* what) {
  const std::string token = next_header_token(text, pos);
  try {
    return std::stoi(token);
  } catch (const std::exception&) {
    throw IoError(std::string("bad PGM ") + what + ": " + token);
  }
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
  const std::string text = read_text_file(path);
  std::size_t pos = 0;
  const std::string magic = next_header_token(text, pos);
  if (magic != "P2" && magic != "P5") throw IoError("not a PGM file (want P2 or P5): " + path);
  GrayImage image;
  image.width = parse_header_int(text, pos, "width");
  image.height = parse_header_int(text, pos, "height");
  const int maxval = parse_header_int(text, pos, "maxval");
  if (image.width < 1 || image.height < 1) throw IoError("bad PGM dimensions: " + path);
  if (maxval < 1 || maxval > 255) throw IoError("PGM maxval must be in [1,255]: " + path);

  image.pixels.resize(image.height, image.width);
  const std::size_t count =
      static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  if (magic == "P5") {
    ++pos;  // single whitespace byte after maxval
    if (pos + count > text.size()) throw IoError("truncated P5 pixel data: " + path);
    for (std::size_t i = 0; i < count; ++i) {
      const auto value = static_cast<unsigned char>(text[pos + i]);
      image.pixels(static_cast<int>(i / image.width), static_cast<int>(i % image.width)) = value;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const int value = parse_header_int(text, pos, "pixel");
      if (value < 0 || value > maxval) throw IoError("P2 pixel out of range: " + path);
      image.pixels(static_cast<int>(i / image.width), static_cast<int>(i % image.width)) = value;
    }
  }
  return image;
}

void save_pgm(const GrayImage& image, const std::string& path) {
  std::ostringstream out;
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::string content = out.str();
  content.reserve(content.size() +
                  static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height));
  for (int i = 0; i < image.height; ++i) {
    for (int j = 0; j < image.width; ++j) {
      const double clamped = std::min(255.0, std::max(0.0, std::round(image.pixels(i, j))));
      content.push_back(static_cast<char>(static_cast<unsigned char>(clamped)));
    }
  }
  write_text_file(path, content);
}

Eigen::MatrixXd extract_patches(const GrayImage& image, int patch_size) {
  if (patch_size < 1) throw std::invalid_argument("extract_patches: patch size must be positive");
  const int rows = image.height / patch_size;
  const int cols = image.width / patch_size;
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("extract_patches: image smaller than one patch");
  }
  Eigen::MatrixXd patches(patch_size * patch_size, rows * cols);
  int index = 0;
  for (int pi = 0; pi < rows; ++pi) {
    for (int pj = 0; pj < cols; ++pj) {
      for (int c = 0; c < patch_size; ++c) {
        for (int r = 0; r < patch_size; ++r) {
          patches(c * patch_size + r, index) =
              image.pixels(pi * patch_size + r, pj * patch_size + c);
        }
      }
      ++index;
    }
  }
  return patches;
}

GrayImage assemble_patches(const Eigen::MatrixXd& patches, int patch_size, int width,
                           int height) {
  const int rows = height / patch_size;
  const int cols = width / patch_size;
  if (rows * patch_size != height || cols * patch_size != width) {
    throw std::invalid_argument("assemble_patches: dimensions not multiples of patch size");
  }
  if (patches.rows() != patch_size * patch_size || patches.cols() != rows * cols) {
    throw std::invalid_argument("assemble_patches: patch matrix shape mismatch");
  }
  GrayImage image;
  image.width = width;
  image.height = height;
  image.pixels.resize(height, width);
  int index = 0;
  for (int pi = 0; pi < rows; ++pi) {
    for (int pj = 0; pj < cols; ++pj) {
      for (int c = 0; c < patch_size; ++c) {
        for (int r = 0; r < patch_size; ++r) {
          image.pixels(pi * patch_size + r, pj * patch_size + c) =
              patches(c * patch_size + r, index);
        }
      }
      ++index;
    }
  }
  return image;
}

double psnr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double peak) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("psnr: shape mismatch");
  }
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace gmmcs
