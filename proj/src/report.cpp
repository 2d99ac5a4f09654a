#include "nhanes/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhanes/csv.hpp"
#include "nhanes/table.hpp"

namespace nhanes::report {
namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Coordinates rounded to 0.01 keep the SVG small and byte-stable.
std::string coord(double v) { return format_number(std::round(v * 100.0) / 100.0); }

constexpr double kSize = 480, kMargin = 56, kPlot = kSize - 2 * kMargin;

std::string svg_open(const std::string& title) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  return out.str();
}

void axes(std::ostringstream& out, const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kMargin, y0 = kSize - kMargin;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + kPlot << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y0 - kPlot
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << x0 + kPlot / 2 << "\" y=\"" << kSize - 16
      << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n"
      << "<text x=\"16\" y=\"" << y0 - kPlot / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << y0 - kPlot / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";
}

}  // namespace

ClassificationReport make_report(std::string model_name, std::string scheme, std::size_t data_size,
                                 std::size_t train_size, const metrics::ConfusionMetrics& cm,
                                 double auc) {
  ClassificationReport r;
  r.model_name = std::move(model_name);
  r.scheme = std::move(scheme);
  r.data_size = data_size;
  r.train_size = train_size;
  r.counts = cm.counts;
  r.test_size = cm.counts.tp + cm.counts.fp + cm.counts.tn + cm.counts.fn;
  r.sensitivity = cm.sensitivity;
  r.specificity = cm.specificity;
  r.ppv = cm.ppv;
  r.npv = cm.npv;
  r.auc = auc;
  return r;
}

std::string reports_csv(std::span<const ClassificationReport> reports) {
  std::string out = csv_row({"model", "scheme", "data_size", "sensitivity", "specificity", "ppv",
                             "npv", "auc", "train_size", "test_size", "tp", "fp", "tn", "fn",
                             "kernel", "C", "gamma", "cv_auc", "converged"});
  for (const auto& r : reports) {
    out += csv_row({r.model_name, r.scheme, std::to_string(r.data_size), opt(r.sensitivity),
                    opt(r.specificity), opt(r.ppv), opt(r.npv), format_number(r.auc),
                    std::to_string(r.train_size), std::to_string(r.test_size),
                    std::to_string(r.counts.tp), std::to_string(r.counts.fp),
                    std::to_string(r.counts.tn), std::to_string(r.counts.fn), r.kernel,
                    format_number(r.C), opt(r.gamma), format_number(r.cv_auc),
                    r.converged ? "true" : "false"});
  }
  return out;
}

nlohmann::ordered_json report_json(const ClassificationReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model_name;
  j["scheme"] = r.scheme;
  j["data_size"] = r.data_size;
  j["sensitivity"] = opt_json(r.sensitivity);
  j["specificity"] = opt_json(r.specificity);
  j["ppv"] = opt_json(r.ppv);
  j["npv"] = opt_json(r.npv);
  j["auc"] = r.auc;
  j["train_size"] = r.train_size;
  j["test_size"] = r.test_size;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  j["hyperparameters"] = {{"kernel", r.kernel}, {"C", r.C}, {"gamma", opt_json(r.gamma)}};
  j["cv_auc"] = r.cv_auc;
  j["converged"] = r.converged;
  j["features"] = r.features;
  if (!r.ranking.empty()) j["ranking"] = r.ranking;
  return j;
}

nlohmann::ordered_json reports_json(std::span<const ClassificationReport> reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr;
}

std::string roc_csv(const metrics::RocCurve& roc) {
  std::string out = csv_row({"threshold", "fpr", "tpr"});
  for (const auto& p : roc.points) {
    out += csv_row({std::isinf(p.threshold) ? "inf" : format_number(p.threshold), format_number(p.fpr),
                    format_number(p.tpr)});
  }
  return out;
}

std::string roc_svg(const metrics::RocCurve& roc, const std::string& title) {
  std::ostringstream out;
  out << svg_open(title + " (AUC " + format_number(std::round(roc.auc * 1000) / 1000) + ")");
  axes(out, "False positive rate", "True positive rate");
  const double x0 = kMargin, y0 = kSize - kMargin;
  for (int t = 0; t <= 4; ++t) {
    const double f = t / 4.0;
    out << "<text x=\"" << coord(x0 + f * kPlot) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << format_number(f) << "</text>\n"
        << "<text x=\"" << x0 - 6 << "\" y=\"" << coord(y0 - f * kPlot + 4) << "\" text-anchor=\"end\">"
        << format_number(f) << "</text>\n";
  }
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + kPlot << "\" y2=\"" << y0 - kPlot
      << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < roc.points.size(); ++i) {
    if (i) out << ' ';
    out << coord(x0 + roc.points[i].fpr * kPlot) << ',' << coord(y0 - roc.points[i].tpr * kPlot);
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

std::string histogram_svg(const harmonize::Histogram& h, const std::string& title) {
  std::ostringstream out;
  out << svg_open(title);
  axes(out, h.column, "count");
  const double x0 = kMargin, y0 = kSize - kMargin;
  const std::size_t bins = h.counts.size();
  std::size_t top = 1;
  for (std::size_t c : h.counts) top = std::max(top, c);
  const bool grouped = !h.groups.empty();
  if (grouped) {
    top = 1;
    for (const auto& g : h.group_counts)
      for (std::size_t c : g) top = std::max(top, c);
  }
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  if (bins > 0) {
    const double slot = kPlot / static_cast<double>(bins);
    const std::size_t series = grouped ? h.groups.size() : 1;
    const double bar = slot * 0.9 / static_cast<double>(series);
    for (std::size_t b = 0; b < bins; ++b) {
      for (std::size_t s = 0; s < series; ++s) {
        const std::size_t c = grouped ? h.group_counts[s][b] : h.counts[b];
        const double height = kPlot * static_cast<double>(c) / static_cast<double>(top);
        out << "<rect x=\"" << coord(x0 + b * slot + slot * 0.05 + s * bar) << "\" y=\""
            << coord(y0 - height) << "\" width=\"" << coord(bar) << "\" height=\"" << coord(height)
            << "\" fill=\"" << palette[s % 6] << "\"/>\n";
      }
      const std::size_t every = std::max<std::size_t>(1, bins / 8);
      if (b % every == 0) {
        out << "<text x=\"" << coord(x0 + b * slot) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
            << format_number(h.lower_edges[b]) << "</text>\n";
      }
    }
  }
  out << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 - kPlot + 4 << "\" text-anchor=\"end\">" << top
      << "</text>\n";
  if (grouped) {
    for (std::size_t s = 0; s < h.groups.size(); ++s) {
      const double y = kMargin + 4 + 16.0 * static_cast<double>(s);
      out << "<rect x=\"" << x0 + kPlot - 90 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\""
          << palette[s % 6] << "\"/>\n<text x=\"" << x0 + kPlot - 74 << "\" y=\"" << y + 9 << "\">"
          << xml_escape(h.group_by.value_or("") + " " + h.groups[s]) << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace nhanes::report
