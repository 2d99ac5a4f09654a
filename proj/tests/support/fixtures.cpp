#include "fixtures.hpp"

#include <atomic>

#include <unistd.h>

#include <Eigen/QR>

namespace nhanes::testkit {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Eigen::MatrixXd random_symmetric(Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  return (a + a.transpose()) / 2;
}

Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("nhanes_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

ColumnTable make_table(const std::vector<std::int64_t>& keys,
                       const std::vector<std::pair<std::string, std::vector<CellValue>>>& columns) {
  ColumnTable t;
  std::vector<CellValue> k;
  for (auto key : keys) k.push_back(static_cast<double>(key));
  t.add_column("SEQN", std::move(k));
  for (const auto& [name, values] : columns) t.add_column(name, values);
  return t;
}

}  // namespace nhanes::testkit
