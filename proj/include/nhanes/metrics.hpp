#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nhanes/svm.hpp"

namespace nhanes::metrics {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Ratios with a zero denominator are left empty.
struct ConfusionMetrics {
  ConfusionCounts counts;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> ppv;
  std::optional<double> npv;
};

ConfusionMetrics confusion_metrics(std::span<const int> truth, std::span<const int> predicted);

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  double threshold = 0;  ///< +inf for the (0, 0) start point
};

struct RocCurve {
  double auc = 0;
  /// 2 * concordant pairs + tied pairs; auc = concordance_x2 / (2 * pairs).
  std::uint64_t concordance_x2 = 0;
  std::uint64_t pairs = 0;  ///< positives * negatives
  std::vector<RocPoint> points;
};

/// Mann-Whitney AUC with half credit for ties, plus one ROC point per
/// distinct score threshold (descending). Throws SingleClass.
RocCurve roc_curve(std::span<const int> truth, std::span<const double> scores);
double roc_auc(std::span<const int> truth, std::span<const double> scores);
inline double roc_auc(std::span<const int> truth, const Eigen::VectorXd& scores) {
  return roc_auc(truth, std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
}

double trapezoid_auc(std::span<const RocPoint> points);

/// Feature names ordered by |w_j| of a linear model (standardized space),
/// ties alphabetical. Throws NotLinearKernel.
std::vector<std::string> rank_features_by_weight(const svm::SvmModel& model,
                                                 std::span<const std::string> names);
std::vector<std::string> rank_by_weight(const Eigen::VectorXd& w, std::span<const std::string> names);

}  // namespace nhanes::metrics
