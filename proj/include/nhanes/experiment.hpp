#pragma once

// The diabetes experiment: views in, one evaluated report per model variant out.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "nhanes/cca.hpp"
#include "nhanes/cross_validation.hpp"
#include "nhanes/diabetes.hpp"
#include "nhanes/metrics.hpp"
#include "nhanes/report.hpp"
#include "nhanes/synthetic.hpp"
#include "nhanes/table.hpp"
#include "nhanes/variant.hpp"

namespace nhanes::task {

inline constexpr std::string_view kDemographics = "demographics";
inline constexpr std::string_view kBodyMeasures = "body_measures";
inline constexpr std::string_view kLaboratory = "laboratory";
inline constexpr std::string_view kQuestionnaire = "questionnaire";
inline constexpr std::string_view kSmoking = "smoking";
inline constexpr std::string_view kOutcome = "outcome";

inline constexpr std::string_view kDiagnosedColumn = "diabetes_diagnosed";
inline constexpr std::string_view kFpgColumn = "fpg";

struct FeatureSource {
  std::string name;
  std::string view;
};

/// The regular diabetes predictors, in report order.
const std::vector<FeatureSource>& reg_features();
std::vector<std::string> reg_feature_names();

class ViewSet {
 public:
  ViewSet() = default;
  explicit ViewSet(std::map<std::string, ColumnTable> views);

  void add(std::string name, ColumnTable table);
  bool has(std::string_view name) const;
  /// Throws MissingView.
  const ColumnTable& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ColumnTable, std::less<>> views_;
};

/// Reads `<dir>/<name>.csv` (with its sidecar) for every view file present.
ViewSet load_views(const std::filesystem::path& dir);

/// Numeric columns pass through; categorical columns become indicator
/// columns for every level but the first (levels in ascending order).
struct EncodedColumn {
  std::string source;
  std::optional<double> level;
  std::string name;
};

struct ViewEncoding {
  std::vector<EncodedColumn> columns;
  std::map<std::string, std::vector<double>> levels;  ///< categorical source -> all levels seen

  /// Levels are collected over rows complete in `sources`.
  static ViewEncoding fit(const ColumnTable& table, std::span<const std::string> sources);
  /// Empty when a source cell is missing or holds an unseen level.
  std::optional<Eigen::RowVectorXd> encode(const ColumnTable& table, std::size_t row) const;
  std::vector<std::string> names() const;
  std::vector<std::string> sources() const;
};

/// Non-key columns of a view, or the configured override list.
std::vector<std::string> view_columns(const ColumnTable& table, std::string_view view,
                                      const std::map<std::string, std::vector<std::string>>& overrides);

struct FittedCca {
  std::string x_view, y_view;
  ViewEncoding x_encoding, y_encoding;
  cca::CcaModel<double> model;
  std::size_t paired_rows = 0;
};

/// CCA between two views over every respondent complete in both. k = 0
/// keeps min(d_x, d_y) components.
FittedCca fit_view_cca(const ViewSet& views, std::string_view x_view, std::string_view y_view,
                       int k, double ridge,
                       const std::map<std::string, std::vector<std::string>>& columns = {});

/// Projection of one encoded row; a fixed summation order per row keeps the
/// result independent of which other rows are projected alongside it.
Eigen::RowVectorXd project_x(const FittedCca& fit, const Eigen::RowVectorXd& encoded, int n);

struct CcaSet {
  std::optional<FittedCca> dl;  ///< demographics x laboratory
  std::optional<FittedCca> bl;  ///< body measures x laboratory
};

struct Design {
  Eigen::MatrixXd X;
  std::vector<int> y;  ///< +1 Case, -1 NonCase
  std::vector<std::string> names;
  std::vector<std::int64_t> keys;  ///< ascending
  std::size_t excluded = 0;        ///< rows dropped by the labelling scheme
  std::vector<std::string> ranking;
};

/// Key -> label over the outcome view.
std::map<std::int64_t, DiabetesLabel> label_respondents(const ViewSet& views, Scheme scheme);

struct RankingOptions {
  std::vector<cv::GridCell> grid;  ///< linear cells only are used; empty means the default grid
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::size_t threads = 0;
  svm::SvmOptions svm;
};

/// Base CCA features ranked by |weight| of the best linear SVM, chosen by
/// cross-validated AUC over the linear cells of the grid.
std::vector<std::string> rank_cca_features(const Design& base, const RankingOptions& options);

/// Throws MissingView, UnfittedCca.
Design assemble_features(const ViewSet& views, const ModelVariant& variant, const CcaSet& ccas,
                         Scheme scheme, const RankingOptions& ranking = {});

struct ExperimentConfig {
  Scheme scheme = Scheme::I;
  std::vector<std::string> variants{"REG"};
  std::uint64_t seed = 42;
  std::vector<cv::GridCell> grid = cv::default_grid();
  double split_fraction = 0.7;
  double ridge = cca::kDefaultRidge;
  std::size_t folds = 5;
  std::size_t threads = 0;
  double svm_tol = 1e-3;
  std::optional<std::filesystem::path> views_dir;
  std::optional<synthetic::SyntheticOptions> synthetic;
  std::optional<std::filesystem::path> out_dir;
  std::map<std::string, std::vector<std::string>> cca_columns;
};

/// Unknown keys are rejected with InvalidConfig. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExperimentConfig& config);
std::vector<cv::GridCell> parse_grid(const nlohmann::json& j);

struct VariantResult {
  std::string name;
  std::optional<report::ClassificationReport> report;
  std::optional<std::string> error;
  metrics::RocCurve roc;
  std::optional<cv::GridSearchResult> grid;
};

struct ExperimentResult {
  std::vector<VariantResult> variants;
  CcaSet ccas;

  std::vector<report::ClassificationReport> reports() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Each variant: assemble, stratified split, grid search on the training
/// part, refit the best cell, evaluate on the held-out part. A failing
/// variant keeps its error note and the run continues.
ExperimentResult run_experiment(const ExperimentConfig& config, const ViewSet& views,
                                const ProgressFn& progress = {});

}  // namespace nhanes::task
