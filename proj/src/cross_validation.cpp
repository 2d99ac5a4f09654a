#include "nhanes/cross_validation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "nhanes/error.hpp"
#include "nhanes/metrics.hpp"
#include "nhanes/random.hpp"

namespace nhanes::cv {

namespace {

// Row indices of each class, negatives first.
std::array<std::vector<std::size_t>, 2> by_class(std::span<const int> labels) {
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == -1) {
      out[0].push_back(i);
    } else if (labels[i] == 1) {
      out[1].push_back(i);
    } else {
      fail(ErrorCode::InvalidArgument, "labels must be -1 or +1");
    }
  }
  return out;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

}  // namespace

std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "k-fold needs k >= 2");
  auto classes = by_class(labels);
  for (const auto& c : classes) {
    if (c.size() < k) {
      fail(ErrorCode::TooFewPerClass, "a class has " + std::to_string(c.size()) +
                                          " members, fewer than k = " + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<Fold> folds(k);
  std::size_t offset = 0;
  for (auto& c : classes) {
    rng.shuffle(c);
    for (std::size_t i = 0; i < c.size(); ++i) folds[(offset + i) % k].push_back(c[i]);
    offset = (offset + c.size()) % k;
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Split train_test_split(std::span<const int> labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) {
    fail(ErrorCode::InvalidArgument, "split fraction must lie in (0, 1)");
  }
  auto classes = by_class(labels);
  if (classes[0].empty() || classes[1].empty()) {
    fail(ErrorCode::SingleClass, "labels contain a single class");
  }
  const double n = static_cast<double>(labels.size());
  const auto target = static_cast<std::size_t>(std::llround(fraction * n));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> rem{};
  for (std::size_t c = 0; c < 2; ++c) {
    const double exact = fraction * static_cast<double>(classes[c].size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    rem[c] = exact - std::floor(exact);
  }
  // Largest remainder; on equal remainders the larger class goes first, then negatives.
  while (take[0] + take[1] < target) {
    std::size_t c = 0;
    if (rem[1] > rem[0] || (rem[1] == rem[0] && classes[1].size() > classes[0].size())) c = 1;
    if (take[c] == classes[c].size()) c = 1 - c;
    ++take[c];
    rem[c] = -1;
  }
  Rng rng(seed);
  Split s;
  for (std::size_t c = 0; c < 2; ++c) {
    rng.shuffle(classes[c]);
    s.train.insert(s.train.end(), classes[c].begin(),
                   classes[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
    s.test.insert(s.test.end(), classes[c].begin() + static_cast<std::ptrdiff_t>(take[c]),
                  classes[c].end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::pair<ColumnTable, ColumnTable> train_test_split(const ColumnTable& table,
                                                     std::span<const int> labels, double fraction,
                                                     std::uint64_t seed) {
  if (labels.size() != table.rows()) {
    fail(ErrorCode::LengthMismatch, "labels do not match the table rows");
  }
  const Split s = train_test_split(labels, fraction, seed);
  return {table.take_rows(s.train), table.take_rows(s.test)};
}

std::string to_string(const GridCell& cell) {
  return svm::to_string(cell.kernel) + " C=" + format_number(cell.C);
}

std::vector<GridCell> default_grid() {
  const double cs[] = {0.1, 1, 10, 100};
  const double gammas[] = {0.001, 0.01, 0.1, 1};
  std::vector<GridCell> grid;
  for (double c : cs) grid.push_back({svm::KernelSpec::linear(), c});
  for (double c : cs) {
    for (double g : gammas) grid.push_back({svm::KernelSpec::rbf(g), c});
  }
  return grid;
}

bool better_cell(const CellResult& a, const CellResult& b) {
  if (a.mean_auc != b.mean_auc) return a.mean_auc > b.mean_auc;
  if (a.cell.C != b.cell.C) return a.cell.C < b.cell.C;
  const double ga = a.cell.kernel.kind == svm::KernelKind::linear ? 0.0 : a.cell.kernel.gamma;
  const double gb = b.cell.kernel.kind == svm::KernelKind::linear ? 0.0 : b.cell.kernel.gamma;
  if (ga != gb) return ga < gb;
  return a.cell.kernel.kind == svm::KernelKind::linear && b.cell.kernel.kind == svm::KernelKind::rbf;
}

GridSearchResult grid_search(const Eigen::MatrixXd& X, std::span<const int> y,
                             std::span<const GridCell> grid, std::uint64_t seed,
                             const GridSearchOptions& options) {
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "hyperparameter grid is empty");
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    fail(ErrorCode::LengthMismatch, "feature rows and labels differ in length");
  }
  svm::check_binary_labels(y);
  const auto folds = stratified_kfold(y, options.folds, seed);

  // Fold matrices are shared read-only by every cell.
  struct FoldData {
    Eigen::MatrixXd train_x, test_x;
    std::vector<int> train_y, test_y;
  };
  std::vector<FoldData> data(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    data[f].train_x = rows_of(X, train);
    data[f].test_x = rows_of(X, folds[f]);
    for (std::size_t i : train) data[f].train_y.push_back(y[i]);
    for (std::size_t i : folds[f]) data[f].test_y.push_back(y[i]);
  }

  GridSearchResult result;
  result.folds = folds.size();
  result.cells.resize(grid.size());
  auto run_cell = [&](std::size_t c) {
    CellResult& r = result.cells[c];
    r.cell = grid[c];
    try {
      for (const auto& fd : data) {
        const auto model = svm::svm_train(fd.train_x, fd.train_y, r.cell.kernel, r.cell.C, options.svm);
        r.converged = r.converged && model.converged;
        const Eigen::VectorXd s = svm::decision_scores(model, fd.test_x);
        r.fold_aucs.push_back(metrics::roc_auc(fd.test_y, s));
      }
      double sum = 0;
      for (double a : r.fold_aucs) sum += a;
      r.mean_auc = sum / static_cast<double>(r.fold_aucs.size());
      double ss = 0;
      for (double a : r.fold_aucs) ss += (a - r.mean_auc) * (a - r.mean_auc);
      r.std_auc = r.fold_aucs.size() > 1 ? std::sqrt(ss / static_cast<double>(r.fold_aucs.size() - 1)) : 0.0;
    } catch (const std::exception& e) {
      r.error = e.what();
      r.fold_aucs.clear();
    }
  };

  std::size_t workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, grid.size());
  if (workers == 1) {
    for (std::size_t c = 0; c < grid.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < grid.size();) run_cell(c);
      });
    }
  }

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    if (result.cells[c].failed()) continue;
    if (!best || better_cell(result.cells[c], result.cells[*best])) best = c;
  }
  if (!best) {
    fail(ErrorCode::AllCellsFailed,
         "every grid cell failed; first error: " + result.cells.front().error.value_or(""));
  }
  result.best_index = *best;
  result.best = result.cells[*best].cell;
  return result;
}

}  // namespace nhanes::cv
