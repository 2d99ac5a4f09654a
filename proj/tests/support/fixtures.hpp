#pragma once

// Small builders shared by the tests.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nhanes/random.hpp"
#include "nhanes/table.hpp"

namespace nhanes::testkit {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);
Eigen::MatrixXd random_symmetric(Rng& rng, Eigen::Index n);
Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

ColumnTable make_table(const std::vector<std::int64_t>& keys,
                       const std::vector<std::pair<std::string, std::vector<CellValue>>>& columns);

}  // namespace nhanes::testkit
