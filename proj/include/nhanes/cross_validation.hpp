#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nhanes/svm.hpp"
#include "nhanes/table.hpp"

namespace nhanes::cv {

using Fold = std::vector<std::size_t>;

/// k folds that partition 0..n-1. Each class is shuffled and dealt round
/// robin, so per-fold class counts differ from n_c / k by less than one.
/// Indices inside a fold are ascending. Throws TooFewPerClass.
std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split with round(fraction * n) training rows, shared out
/// between the classes by largest remainder. Throws SingleClass.
Split train_test_split(std::span<const int> labels, double fraction, std::uint64_t seed);

std::pair<ColumnTable, ColumnTable> train_test_split(const ColumnTable& table,
                                                     std::span<const int> labels, double fraction,
                                                     std::uint64_t seed);

struct GridCell {
  svm::KernelSpec kernel;
  double C = 1.0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

std::string to_string(const GridCell& cell);

/// C in {0.1, 1, 10, 100} for the linear kernel, crossed with gamma in
/// {0.001, 0.01, 0.1, 1} for rbf.
std::vector<GridCell> default_grid();

struct CellResult {
  GridCell cell;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
  double std_auc = 0.0;  ///< sample std over folds
  std::optional<std::string> error;
  bool converged = true;

  bool failed() const noexcept { return error.has_value(); }
};

struct GridSearchResult {
  GridCell best;
  std::size_t best_index = 0;
  std::vector<CellResult> cells;  ///< same order as the input grid
  std::size_t folds = 5;
};

struct GridSearchOptions {
  std::size_t folds = 5;
  /// 0 means one worker per hardware thread.
  std::size_t threads = 0;
  svm::SvmOptions svm;
};

/// Mean ROC-AUC of each cell over the same stratified folds. Ties on mean
/// AUC go to the smaller C, then the smaller gamma, then linear before rbf.
/// A cell whose training fails is recorded and skipped; AllCellsFailed only
/// if none succeeds.
GridSearchResult grid_search(const Eigen::MatrixXd& X, std::span<const int> y,
                             std::span<const GridCell> grid, std::uint64_t seed,
                             const GridSearchOptions& options = {});

/// Strict preference between two successful cells under the rule above.
bool better_cell(const CellResult& a, const CellResult& b);

}  // namespace nhanes::cv
