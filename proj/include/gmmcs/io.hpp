#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmmcs/model.hpp"

namespace gmmcs {

inline constexpr const char* kVersion = "gmmcs 0.1.0";

/// Unreadable, unwritable, or unparsable files. Maps to CLI exit code 3;
/// semantically invalid content throws std::invalid_argument (exit code 2).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Model JSON: {"n", "weights", "components": [{"mean", "covariance"}]}.
/// Covariances are symmetrized with their transpose on load.
GmmSource load_model(const std::string& path);
std::string model_to_json(const GmmSource& gmm);
void save_model(const GmmSource& gmm, const std::string& path);

/// Kernel JSON: {"rows", "cols", "data": [[...]]}, row-major.
Eigen::MatrixXd load_kernel(const std::string& path);
void save_kernel(const Eigen::MatrixXd& kernel, const std::string& path);

/// Shortest-exact decimal for CSV fields: 17 significant digits.
std::string format_double(double value);

/// Accumulates '#'-prefixed metadata lines and comma-separated rows.
class CsvBuilder {
 public:
  void comment(const std::string& text) { buffer_ += "# " + text + "\n"; }
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return buffer_; }

 private:
  std::string buffer_;
};

}  // namespace gmmcs
