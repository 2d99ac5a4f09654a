#include "nhanes/serialize.hpp"

#include "nhanes/error.hpp"

namespace nhanes::serialize {
namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("model JSON field '") + key + "': " + e.what());
  }
}

Eigen::VectorXd vector_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidArgument, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorCode::InvalidArgument, "matrix rows differ in length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::ordered_json to_json(const linalg::Standardizer<double>& s) {
  return {{"means", to_vec(s.means)}, {"stds", to_vec(s.stds)}, {"constant", s.constant}};
}

linalg::Standardizer<double> standardizer_from_json(const nlohmann::json& j) {
  linalg::Standardizer<double> s;
  s.means = vector_from(field<std::vector<double>>(j, "means"));
  s.stds = vector_from(field<std::vector<double>>(j, "stds"));
  s.constant = field<std::vector<bool>>(j, "constant");
  if (s.means.size() != s.stds.size() || static_cast<Eigen::Index>(s.constant.size()) != s.means.size()) {
    fail(ErrorCode::InvalidArgument, "standardizer fields differ in length");
  }
  return s;
}

nlohmann::ordered_json to_json(const pca::PcaModel<double>& m) {
  nlohmann::ordered_json j;
  j["model"] = "pca";
  j["names"] = m.names;
  j["standardized"] = m.standardized;
  j["standardizer"] = to_json(m.standardizer);
  j["explained_variance"] = to_vec(m.explained_variance);
  j["total_variance"] = m.total_variance;
  j["directions"] = matrix_json(m.directions);
  return j;
}

pca::PcaModel<double> pca_from_json(const nlohmann::json& j) {
  pca::PcaModel<double> m;
  m.names = field<std::vector<std::string>>(j, "names");
  m.standardized = field<bool>(j, "standardized");
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  m.explained_variance = vector_from(field<std::vector<double>>(j, "explained_variance"));
  m.total_variance = field<double>(j, "total_variance");
  m.directions = matrix_from_json(j.at("directions"));
  return m;
}

nlohmann::ordered_json to_json(const cca::CcaModel<double>& m) {
  nlohmann::ordered_json j;
  j["model"] = "cca";
  j["ridge"] = m.ridge;
  j["correlations"] = to_vec(m.correlations);
  j["x_names"] = m.x_names;
  j["y_names"] = m.y_names;
  j["std_x"] = to_json(m.std_x);
  j["std_y"] = to_json(m.std_y);
  j["U"] = matrix_json(m.U);
  j["V"] = matrix_json(m.V);
  return j;
}

cca::CcaModel<double> cca_from_json(const nlohmann::json& j) {
  cca::CcaModel<double> m;
  m.ridge = field<double>(j, "ridge");
  m.correlations = vector_from(field<std::vector<double>>(j, "correlations"));
  m.x_names = field<std::vector<std::string>>(j, "x_names");
  m.y_names = field<std::vector<std::string>>(j, "y_names");
  m.std_x = standardizer_from_json(j.at("std_x"));
  m.std_y = standardizer_from_json(j.at("std_y"));
  m.U = matrix_from_json(j.at("U"));
  m.V = matrix_from_json(j.at("V"));
  return m;
}

nlohmann::ordered_json to_json(const task::ViewEncoding& e) {
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : e.columns) {
    nlohmann::ordered_json col{{"name", c.name}, {"source", c.source}};
    if (c.level) col["level"] = *c.level;
    cols.push_back(col);
  }
  nlohmann::ordered_json levels = nlohmann::ordered_json::object();
  for (const auto& [s, l] : e.levels) levels[s] = l;
  return {{"columns", cols}, {"levels", levels}};
}

nlohmann::ordered_json to_json(const task::FittedCca& f) {
  nlohmann::ordered_json j = to_json(f.model);
  j["x_view"] = f.x_view;
  j["y_view"] = f.y_view;
  j["paired_rows"] = f.paired_rows;
  j["encoding"] = {{"x", to_json(f.x_encoding)}, {"y", to_json(f.y_encoding)}};
  return j;
}

nlohmann::ordered_json to_json(const svm::SvmModel& m) {
  nlohmann::ordered_json j;
  j["model"] = "svm";
  j["kernel"] = svm::to_string(m.kernel.kind);
  if (m.kernel.kind == svm::KernelKind::rbf) j["gamma"] = m.kernel.gamma;
  j["C"] = m.C;
  j["bias"] = m.bias;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["standardizer"] = to_json(m.standardizer);
  j["support_indices"] = m.support_indices;
  j["dual_coefs"] = to_vec(m.dual_coefs);
  j["support_vectors"] = matrix_json(m.support_vectors);
  return j;
}

svm::SvmModel svm_from_json(const nlohmann::json& j) {
  svm::SvmModel m;
  m.kernel.kind = svm::kernel_kind_from_string(field<std::string>(j, "kernel"));
  if (m.kernel.kind == svm::KernelKind::rbf) m.kernel.gamma = field<double>(j, "gamma");
  m.kernel.validate();
  m.C = field<double>(j, "C");
  m.bias = field<double>(j, "bias");
  m.converged = field<bool>(j, "converged");
  m.iterations = field<std::size_t>(j, "iterations");
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  m.support_indices = field<std::vector<std::size_t>>(j, "support_indices");
  m.dual_coefs = vector_from(field<std::vector<double>>(j, "dual_coefs"));
  m.support_vectors = matrix_from_json(j.at("support_vectors"));
  if (m.support_vectors.rows() == 0) m.support_vectors.resize(0, m.standardizer.dims());
  return m;
}

}  // namespace nhanes::serialize
