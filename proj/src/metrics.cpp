#include "nhanes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nhanes/error.hpp"

namespace nhanes::metrics {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMetrics confusion_metrics(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    fail(ErrorCode::LengthMismatch, "truth and predictions differ in length");
  }
  if (truth.empty()) fail(ErrorCode::InvalidArgument, "confusion metrics need at least one row");
  ConfusionMetrics m;
  auto& c = m.counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == 1, p = predicted[i] == 1;
    if (t && p) ++c.tp;
    else if (t) ++c.fn;
    else if (p) ++c.fp;
    else ++c.tn;
  }
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.ppv = ratio(c.tp, c.tp + c.fp);
  m.npv = ratio(c.tn, c.tn + c.fn);
  return m;
}

RocCurve roc_curve(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) {
    fail(ErrorCode::LengthMismatch, "truth and scores differ in length");
  }
  svm::check_binary_labels(truth);
  for (double s : scores) {
    if (std::isnan(s)) fail(ErrorCode::NonFinite, "scores contain NaN");
  }
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::uint64_t pos = 0, neg = 0;
  for (int t : truth) (t == 1 ? pos : neg) += 1;

  RocCurve roc;
  roc.pairs = pos * neg;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  // Walking thresholds from high to low: each positive in a tie group beats
  // every negative not yet seen and ties with the negatives in its group.
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t g = 0; g < order.size();) {
    const double s = scores[order[g]];
    std::uint64_t gp = 0, gn = 0;
    while (g < order.size() && scores[order[g]] == s) {
      (truth[order[g]] == 1 ? gp : gn) += 1;
      ++g;
    }
    roc.concordance_x2 += 2 * gp * (neg - fp - gn) + gp * gn;
    tp += gp;
    fp += gn;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  roc.auc = static_cast<double>(roc.concordance_x2) / static_cast<double>(2 * roc.pairs);
  return roc;
}

double roc_auc(std::span<const int> truth, std::span<const double> scores) {
  return roc_curve(truth, scores).auc;
}

double trapezoid_auc(std::span<const RocPoint> points) {
  double area = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

std::vector<std::string> rank_by_weight(const Eigen::VectorXd& w, std::span<const std::string> names) {
  if (static_cast<std::size_t>(w.size()) != names.size()) {
    fail(ErrorCode::LengthMismatch, "names do not match the weight vector");
  }
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double wa = std::abs(w(static_cast<Eigen::Index>(a)));
    const double wb = std::abs(w(static_cast<Eigen::Index>(b)));
    if (wa != wb) return wa > wb;
    return names[a] < names[b];
  });
  std::vector<std::string> out;
  for (std::size_t i : order) out.push_back(names[i]);
  return out;
}

std::vector<std::string> rank_features_by_weight(const svm::SvmModel& model,
                                                 std::span<const std::string> names) {
  return rank_by_weight(svm::linear_weights(model), names);
}

}  // namespace nhanes::metrics
