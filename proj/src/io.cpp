#include "gmmcs/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gmmcs {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

namespace {

json parse_json(const std::string& path) {
  const std::string text = read_text_file(path);
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) throw IoError("malformed JSON: " + path);
  return parsed;
}

Eigen::VectorXd to_vector(const json& array, const std::string& what) {
  if (!array.is_array()) throw std::invalid_argument(what + " must be an array");
  Eigen::VectorXd out(array.size());
  for (std::size_t i = 0; i < array.size(); ++i) {
    if (!array[i].is_number()) throw std::invalid_argument(what + " must contain numbers");
    out(static_cast<Eigen::Index>(i)) = array[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd to_matrix(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) throw std::invalid_argument(what + " must be a nonempty array of rows");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  Eigen::MatrixXd out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) {
      throw std::invalid_argument(what + " rows must have equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number()) throw std::invalid_argument(what + " must contain numbers");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

}  // namespace

GmmSource load_model(const std::string& path) {
  const json doc = parse_json(path);
  if (!doc.contains("n") || !doc.contains("weights") || !doc.contains("components")) {
    throw std::invalid_argument("model file must contain n, weights, components: " + path);
  }
  const int n = doc["n"].get<int>();
  if (n < 1) throw std::invalid_argument("model dimension must be positive: " + path);
  const Eigen::VectorXd weights = to_vector(doc["weights"], "weights");
  const json& comps = doc["components"];
  if (!comps.is_array() || comps.size() != static_cast<std::size_t>(weights.size())) {
    throw std::invalid_argument("components must match weights length: " + path);
  }
  std::vector<GaussianSource> components;
  components.reserve(comps.size());
  for (const json& comp : comps) {
    Eigen::VectorXd mean = to_vector(comp.at("mean"), "mean");
    Eigen::MatrixXd cov = to_matrix(comp.at("covariance"), "covariance");
    if (mean.size() != n || cov.rows() != n || cov.cols() != n) {
      throw std::invalid_argument("component dimensions must equal n: " + path);
    }
    cov = 0.5 * (cov + cov.transpose()).eval();
    components.emplace_back(std::move(mean), std::move(cov));
  }
  return GmmSource(std::vector<double>(weights.data(), weights.data() + weights.size()),
                   std::move(components));
}

std::string model_to_json(const GmmSource& gmm) {
  json doc;
  doc["n"] = gmm.dim();
  doc["weights"] = json::array();
  for (int k = 0; k < gmm.num_components(); ++k) doc["weights"].push_back(gmm.weight(k));
  doc["components"] = json::array();
  for (int k = 0; k < gmm.num_components(); ++k) {
    json comp;
    comp["mean"] = vector_to_json(gmm.component(k).mean());
    comp["covariance"] = matrix_to_json(gmm.component(k).covariance());
    doc["components"].push_back(comp);
  }
  return doc.dump(2) + "\n";
}

void save_model(const GmmSource& gmm, const std::string& path) {
  write_text_file(path, model_to_json(gmm));
}

Eigen::MatrixXd load_kernel(const std::string& path) {
  const json doc = parse_json(path);
  if (!doc.contains("rows") || !doc.contains("cols") || !doc.contains("data")) {
    throw std::invalid_argument("kernel file must contain rows, cols, data: " + path);
  }
  const Eigen::MatrixXd data = to_matrix(doc["data"], "data");
  if (data.rows() != doc["rows"].get<int>() || data.cols() != doc["cols"].get<int>()) {
    throw std::invalid_argument("kernel data shape does not match rows/cols: " + path);
  }
  return data;
}

void save_kernel(const Eigen::MatrixXd& kernel, const std::string& path) {
  json doc;
  doc["rows"] = static_cast<int>(kernel.rows());
  doc["cols"] = static_cast<int>(kernel.cols());
  doc["data"] = matrix_to_json(kernel);
  write_text_file(path, doc.dump(2) + "\n");
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void CsvBuilder::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) buffer_ += ',';
    buffer_ += fields[i];
  }
  buffer_ += '\n';
}

}  // namespace gmmcs
