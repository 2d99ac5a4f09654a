#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhanes/harmonize.hpp"
#include "nhanes/metrics.hpp"

namespace nhanes::report {

/// One evaluated model variant on its held-out test split.
struct ClassificationReport {
  std::string model_name;
  std::string scheme;
  std::size_t data_size = 0;  ///< complete-case rows before the split
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  metrics::ConfusionCounts counts;
  std::optional<double> sensitivity, specificity, ppv, npv;
  double auc = 0;
  std::string kernel;
  double C = 0;
  std::optional<double> gamma;
  double cv_auc = 0;
  bool converged = true;
  std::vector<std::string> features;
  std::vector<std::string> ranking;  ///< stacked-variant CCA features, best first
};

ClassificationReport make_report(std::string model_name, std::string scheme, std::size_t data_size,
                                 std::size_t train_size, const metrics::ConfusionMetrics& cm,
                                 double auc);

/// Table columns: model, data_size, sensitivity, specificity, ppv, npv, auc,
/// then the counts and the selected hyperparameters. Undefined ratios are
/// empty fields.
std::string reports_csv(std::span<const ClassificationReport> reports);
nlohmann::ordered_json report_json(const ClassificationReport& r);
nlohmann::ordered_json reports_json(std::span<const ClassificationReport> reports);

std::string roc_csv(const metrics::RocCurve& roc);

/// Self-contained SVG: axes, diagonal reference and the ROC polyline.
std::string roc_svg(const metrics::RocCurve& roc, const std::string& title);
/// Bar chart of a histogram; grouped histograms draw one bar per group.
std::string histogram_svg(const harmonize::Histogram& h, const std::string& title);

}  // namespace nhanes::report
