#include "nhanes/harmonize.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"
#include "nhanes/ingest.hpp"

namespace nhanes::harmonize {
namespace {

bool same_value(const CellValue& a, const CellValue& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) return *x == std::get<double>(b);
  if (const std::string* s = std::get_if<std::string>(&a)) return *s == std::get<std::string>(b);
  return std::get<Missing>(a) == std::get<Missing>(b);
}

CellValue key_from_json(const std::string& key) {
  if (auto num = parse_number(key)) return *num;
  if (auto m = Missing::parse(key)) return *m;
  return key;
}

CellValue value_from_json(const nlohmann::json& v) {
  if (v.is_null()) return Missing{};
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  fail(ErrorCode::InvalidConfig, "recode values must be numbers, strings or null");
}

std::string describe(const CellValue& v) {
  if (const Missing* m = std::get_if<Missing>(&v)) return m->label();
  return render(v);
}

struct Diagnostics {
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::string>> unmapped;
};

class RuleEvaluator {
 public:
  RuleEvaluator(const ColumnTable& raw, std::string cycle, const RuleOptions& options,
                Diagnostics& diag)
      : raw_(raw), cycle_(std::move(cycle)), options_(options), diag_(diag) {}

  CellValue evaluate(const HarmonizationRule& rule, const std::string& target,
                     std::size_t row) const {
    CellValue value = evaluate_once(rule, target, row);
    if (is_missing(value) && !rule.fallback.empty()) {
      CellValue alt = evaluate(rule.fallback.front(), target, row);
      if (!is_missing(alt)) return alt;
    }
    return value;
  }

 private:
  bool dropped(const HarmonizationRule& rule, const CellValue& v) const {
    const double* x = std::get_if<double>(&v);
    return x && std::find(rule.drop_codes.begin(), rule.drop_codes.end(), *x) != rule.drop_codes.end();
  }

  CellValue evaluate_once(const HarmonizationRule& rule, const std::string& target,
                          std::size_t row) const {
    if (rule.eligibility) {
      std::optional<double> v;
      if (raw_.has_column(rule.eligibility->variable)) v = raw_.number(rule.eligibility->variable, row);
      if (!rule.eligibility->admits(v)) return Missing{};
    }
    const auto* names = rule.sources_for(cycle_);
    if (!names) return Missing{};

    CellValue value = Missing{};
    if (rule.combine == Combine::first) {
      bool found = false;
      for (const auto& name : *names) {
        if (raw_.has_column(name)) {
          value = raw_.column(name).values[row];
          found = true;
          break;
        }
      }
      if (!found) return Missing{};
      if (dropped(rule, value)) return Missing{};
    } else {
      double sum = 0;
      std::size_t count = 0;
      for (const auto& name : *names) {
        if (!raw_.has_column(name)) continue;
        const CellValue& cell = raw_.column(name).values[row];
        if (dropped(rule, cell)) continue;
        if (auto x = as_number(cell)) {
          sum += *x;
          ++count;
        }
      }
      if (count == 0) return Missing{};
      value = sum / static_cast<double>(count);
    }

    if (is_missing(value)) return value;
    for (const auto& recode : rule.recodes) {
      if (!recode.applies_to(cycle_)) continue;
      if (const CellValue* mapped = recode.lookup(value)) return *mapped;
      if (options_.strict) {
        fail(ErrorCode::RecodeDomainError, "rule '" + target + "' cycle " + cycle_ +
                                               ": value " + describe(value) + " has no mapping");
      }
      auto& slot = diag_.unmapped[{target, cycle_}];
      if (slot.first++ == 0) slot.second = describe(value);
      return Missing{};
    }
    return value;
  }

  const ColumnTable& raw_;
  std::string cycle_;
  const RuleOptions& options_;
  Diagnostics& diag_;
};

std::vector<std::string> names_from_json(const nlohmann::json& v) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& s : v) out.push_back(s.get<std::string>());
  } else {
    fail(ErrorCode::InvalidConfig, "rule sources must be strings or arrays of strings");
  }
  return out;
}

std::string group_label(const CellValue& v) {
  if (is_missing(v)) return "missing";
  return render(v);
}

}  // namespace

bool Recode::applies_to(std::string_view cycle) const {
  return cycles.empty() || std::find(cycles.begin(), cycles.end(), cycle) != cycles.end();
}

const CellValue* Recode::lookup(const CellValue& value) const {
  for (const auto& [from, to] : map) {
    if (same_value(from, value)) return &to;
  }
  return nullptr;
}

bool Eligibility::admits(std::optional<double> value) const {
  if (!value) return false;
  if (min && *value < *min) return false;
  if (max && *value > *max) return false;
  if (!values.empty() && std::find(values.begin(), values.end(), *value) == values.end()) return false;
  return true;
}

const std::vector<std::string>* HarmonizationRule::sources_for(std::string_view cycle) const {
  if (auto it = sources.find(std::string(cycle)); it != sources.end()) return &it->second;
  if (auto it = sources.find(std::string(kAnyCycle)); it != sources.end()) return &it->second;
  return nullptr;
}

HarmonizationRule parse_rule(const nlohmann::json& j, bool require_target) {
  static const std::set<std::string> known{"target", "kind", "sources", "combine", "recodes",
                                           "drop_codes", "eligibility", "fallback", "note"};
  HarmonizationRule rule;
  try {
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) fail(ErrorCode::InvalidConfig, "unknown rule key '" + key + "'");
    }
    if (j.contains("target")) rule.target = j["target"].get<std::string>();
    if (require_target && rule.target.empty()) fail(ErrorCode::InvalidConfig, "rule without target");
    if (j.contains("kind")) rule.kind = column_kind_from_string(j["kind"].get<std::string>());
    for (const auto& [cycle, names] : j.at("sources").items()) {
      if (cycle != kAnyCycle) ingest::CycleId::from_label(cycle);
      rule.sources[cycle] = names_from_json(names);
    }
    if (j.contains("combine")) {
      const auto c = j["combine"].get<std::string>();
      if (c == "first") {
        rule.combine = Combine::first;
      } else if (c == "mean") {
        rule.combine = Combine::mean;
      } else {
        fail(ErrorCode::InvalidConfig, "unknown combine '" + c + "'");
      }
    }
    std::set<std::string> recoded_cycles;
    bool recode_all = false;
    for (const auto& r : j.value("recodes", nlohmann::json::array())) {
      Recode recode;
      for (const auto& c : r.value("cycles", nlohmann::json::array())) {
        recode.cycles.push_back(ingest::CycleId::from_label(c.get<std::string>()).label());
      }
      for (const auto& [from, to] : r.at("map").items()) {
        CellValue key = key_from_json(from);
        if (recode.lookup(key)) {
          fail(ErrorCode::InvalidConfig, "rule '" + rule.target + "' maps '" + from + "' twice");
        }
        recode.map.emplace_back(std::move(key), value_from_json(to));
      }
      const bool overlap =
          recode_all || (recode.cycles.empty() && !recoded_cycles.empty()) ||
          std::any_of(recode.cycles.begin(), recode.cycles.end(),
                      [&](const std::string& c) { return recoded_cycles.count(c) > 0; });
      if (overlap) {
        fail(ErrorCode::InvalidConfig, "rule '" + rule.target + "' has overlapping recode cycles");
      }
      if (recode.cycles.empty()) recode_all = true;
      recoded_cycles.insert(recode.cycles.begin(), recode.cycles.end());
      rule.recodes.push_back(std::move(recode));
    }
    for (const auto& d : j.value("drop_codes", nlohmann::json::array())) {
      rule.drop_codes.push_back(d.get<double>());
    }
    if (j.contains("eligibility") && !j["eligibility"].is_null()) {
      const auto& e = j["eligibility"];
      Eligibility el;
      el.variable = e.at("variable").get<std::string>();
      if (e.contains("min") && !e["min"].is_null()) el.min = e["min"].get<double>();
      if (e.contains("max") && !e["max"].is_null()) el.max = e["max"].get<double>();
      for (const auto& v : e.value("values", nlohmann::json::array())) el.values.push_back(v.get<double>());
      rule.eligibility = std::move(el);
    }
    if (j.contains("fallback") && !j["fallback"].is_null()) {
      HarmonizationRule fb = parse_rule(j["fallback"], false);
      fb.target = rule.target;
      rule.fallback.push_back(std::move(fb));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, "bad rule '" + rule.target + "': " + e.what());
  }
  return rule;
}

std::vector<HarmonizationRule> parse_rules(const nlohmann::json& j) {
  std::vector<HarmonizationRule> rules;
  for (const auto& r : j) rules.push_back(parse_rule(r));
  return rules;
}

std::vector<ViewSpec> parse_rule_file(const nlohmann::json& j) {
  std::vector<ViewSpec> views;
  try {
    for (const auto& v : j.at("views")) {
      ViewSpec view;
      view.name = v.at("name").get<std::string>();
      for (const auto& c : v.at("components")) view.components.push_back(c.get<std::string>());
      view.rules = parse_rules(v.at("rules"));
      views.push_back(std::move(view));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("bad rule file: ") + e.what());
  }
  return views;
}

std::vector<ViewSpec> load_rule_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_rule_file(j);
}

std::filesystem::path default_rule_file() {
  return std::filesystem::path(NHANES_DATA_DIR) / "rules.json";
}

HarmonizeResult apply_rules(const std::map<std::string, ColumnTable>& raw_by_cycle,
                            std::span<const HarmonizationRule> rules, const RuleOptions& options) {
  std::string key_name = raw_by_cycle.empty() ? "SEQN" : raw_by_cycle.begin()->second.key_name();
  std::set<std::string> targets;
  for (const auto& rule : rules) {
    if (rule.target == key_name || !targets.insert(rule.target).second) {
      fail(ErrorCode::RuleConflict, "more than one rule targets '" + rule.target + "'");
    }
  }

  std::vector<CellValue> keys;
  std::vector<std::vector<CellValue>> values(rules.size());
  std::vector<std::string> provenance;
  Diagnostics diag;
  for (const auto& [cycle, raw] : raw_by_cycle) {
    const auto& key = raw.column(key_name).values;
    keys.insert(keys.end(), key.begin(), key.end());
    provenance.insert(provenance.end(), raw.rows(), cycle);
    RuleEvaluator evaluator(raw, cycle, options, diag);
    for (std::size_t r = 0; r < rules.size(); ++r) {
      values[r].reserve(values[r].size() + raw.rows());
      for (std::size_t i = 0; i < raw.rows(); ++i) {
        values[r].push_back(evaluator.evaluate(rules[r], rules[r].target, i));
      }
    }
  }

  HarmonizeResult result{ColumnTable(key_name), {}};
  result.table.add_column(key_name, std::move(keys));
  for (std::size_t r = 0; r < rules.size(); ++r) {
    result.table.add_column(rules[r].target, std::move(values[r]), rules[r].kind);
  }
  result.table.set_provenance(std::move(provenance));
  for (const auto& [where, info] : diag.unmapped) {
    result.warnings.push_back("rule '" + where.first + "' cycle " + where.second + ": " +
                              std::to_string(info.first) + " unmapped value(s), e.g. " +
                              info.second + "; set to missing");
  }
  return result;
}

ColumnTable merge_components(std::span<const ColumnTable> tables) {
  if (tables.empty()) return ColumnTable();
  const std::string key_name = tables.front().key_name();
  std::vector<std::int64_t> order;
  std::unordered_map<std::int64_t, std::size_t> row_of;
  for (const auto& t : tables) {
    t.check_unique_keys();
    for (auto k : t.keys()) {
      if (row_of.emplace(k, order.size()).second) order.push_back(k);
    }
  }
  ColumnTable out(key_name);
  std::vector<CellValue> key_values;
  key_values.reserve(order.size());
  for (auto k : order) key_values.emplace_back(static_cast<double>(k));
  out.add_column(key_name, std::move(key_values));
  for (const auto& t : tables) {
    const auto keys = t.keys();
    for (const auto& c : t.columns()) {
      if (c.name == key_name || out.has_column(c.name)) continue;
      Column merged{c.name, c.kind, std::vector<CellValue>(order.size(), Missing{})};
      if (c.kind == ColumnKind::text) {
        std::fill(merged.values.begin(), merged.values.end(), CellValue{std::string()});
      }
      for (std::size_t i = 0; i < keys.size(); ++i) merged.values[row_of[keys[i]]] = c.values[i];
      out.add_column(std::move(merged));
    }
  }
  return out;
}

ColumnTable join_views(const ColumnTable& left, const ColumnTable& right) {
  left.check_unique_keys();
  right.check_unique_keys();
  std::unordered_map<std::int64_t, std::size_t> right_row;
  const auto right_keys = right.keys();
  for (std::size_t i = 0; i < right_keys.size(); ++i) right_row[right_keys[i]] = i;

  std::vector<std::size_t> left_rows, right_rows;
  const auto left_keys = left.keys();
  for (std::size_t i = 0; i < left_keys.size(); ++i) {
    if (auto it = right_row.find(left_keys[i]); it != right_row.end()) {
      left_rows.push_back(i);
      right_rows.push_back(it->second);
    }
  }
  ColumnTable out = left.take_rows(left_rows);
  ColumnTable tail = right.take_rows(right_rows);
  for (const auto& c : tail.columns()) {
    if (c.name == right.key_name()) continue;
    if (out.has_column(c.name)) {
      fail(ErrorCode::ColumnConflict, "both views define column '" + c.name + "'");
    }
    out.add_column(c);
  }
  return out;
}

CompleteCases complete_cases(const ColumnTable& table, std::span<const std::string> columns) {
  std::vector<const Column*> cols;
  for (const auto& name : columns) cols.push_back(&table.column(name));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const bool complete = std::none_of(cols.begin(), cols.end(),
                                       [&](const Column* c) { return is_missing(c->values[i]); });
    if (complete) keep.push_back(i);
  }
  CompleteCases out{table.take_rows(keep), keep.size(), table.rows() - keep.size()};
  return out;
}

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

SummaryStats summarize(const ColumnTable& table, bool adult_only, std::string_view age_column) {
  std::vector<std::size_t> rows;
  if (adult_only) {
    const Column& age = table.column(age_column);
    for (std::size_t i = 0; i < table.rows(); ++i) {
      auto a = as_number(age.values[i]);
      if (a && *a > 20.0) rows.push_back(i);
    }
  } else {
    rows.resize(table.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }

  SummaryStats stats;
  stats.rows_used = rows.size();
  for (const auto& c : table.columns()) {
    if (c.name == table.key_name() || c.kind == ColumnKind::text) continue;
    ColumnSummary s{c.name, 0, {}, {}, {}, {}, {}, {}, {}};
    std::vector<double> x;
    x.reserve(rows.size());
    for (auto i : rows) {
      if (auto v = as_number(c.values[i])) x.push_back(*v);
    }
    s.count = x.size();
    if (!x.empty()) {
      std::sort(x.begin(), x.end());
      double mean = 0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      s.mean = mean;
      if (x.size() >= 2) {
        double ss = 0;
        for (double v : x) ss += (v - mean) * (v - mean);
        s.std = std::sqrt(ss / static_cast<double>(x.size() - 1));
      }
      s.min = x.front();
      s.p25 = percentile(x, 0.25);
      s.p50 = percentile(x, 0.50);
      s.p75 = percentile(x, 0.75);
      s.max = x.back();
    }
    stats.columns.push_back(std::move(s));
  }
  return stats;
}

Histogram histogram(const ColumnTable& table, std::string_view column, double bin_width,
                    const std::optional<std::string>& group_by) {
  if (!(bin_width > 0) || !std::isfinite(bin_width)) {
    fail(ErrorCode::NonPositiveBinWidth, "bin width must be positive");
  }
  const Column& col = table.column(column);
  if (col.kind == ColumnKind::text) {
    fail(ErrorCode::InvalidArgument, "histogram column '" + col.name + "' is not numeric");
  }
  const Column* group = group_by ? &table.column(*group_by) : nullptr;

  Histogram h;
  h.column = col.name;
  h.bin_width = bin_width;
  h.group_by = group_by;

  std::vector<std::pair<long long, std::size_t>> binned;  // (bin index, row)
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (auto v = as_number(col.values[i])) {
      binned.emplace_back(static_cast<long long>(std::floor(*v / bin_width)), i);
    }
  }
  if (binned.empty()) return h;

  long long lo = binned.front().first, hi = lo;
  for (const auto& [b, _] : binned) {
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  const auto nbins = static_cast<std::size_t>(hi - lo + 1);
  h.counts.assign(nbins, 0);
  for (std::size_t b = 0; b < nbins; ++b) {
    h.lower_edges.push_back(static_cast<double>(lo + static_cast<long long>(b)) * bin_width);
  }

  std::vector<CellValue> levels;
  if (group) {
    for (const auto& [_, row] : binned) {
      const CellValue& g = group->values[row];
      if (std::none_of(levels.begin(), levels.end(),
                       [&](const CellValue& l) { return group_label(l) == group_label(g); })) {
        levels.push_back(g);
      }
    }
    std::stable_sort(levels.begin(), levels.end(), [](const CellValue& a, const CellValue& b) {
      auto rank = [](const CellValue& v) { return is_missing(v) ? 2 : (as_number(v) ? 0 : 1); };
      if (rank(a) != rank(b)) return rank(a) < rank(b);
      if (rank(a) == 0) return *as_number(a) < *as_number(b);
      return group_label(a) < group_label(b);
    });
    for (const auto& l : levels) h.groups.push_back(group_label(l));
    h.group_counts.assign(levels.size(), std::vector<std::size_t>(nbins, 0));
  }

  for (const auto& [b, row] : binned) {
    const auto slot = static_cast<std::size_t>(b - lo);
    ++h.counts[slot];
    if (group) {
      const std::string label = group_label(group->values[row]);
      const auto g = static_cast<std::size_t>(
          std::find(h.groups.begin(), h.groups.end(), label) - h.groups.begin());
      ++h.group_counts[g][slot];
    }
  }
  return h;
}

namespace {
std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
}  // namespace

std::string summary_csv(const SummaryStats& stats) {
  std::string out = csv_row({"variable", "count", "mean", "std", "min", "p25", "p50", "p75", "max"});
  for (const auto& c : stats.columns) {
    out += csv_row({c.name, std::to_string(c.count), opt(c.mean), opt(c.std), opt(c.min),
                    opt(c.p25), opt(c.p50), opt(c.p75), opt(c.max)});
  }
  return out;
}

nlohmann::ordered_json summary_json(const SummaryStats& stats) {
  nlohmann::ordered_json j;
  j["rows_used"] = stats.rows_used;
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : stats.columns) {
    nlohmann::ordered_json e;
    e["variable"] = c.name;
    e["count"] = c.count;
    e["mean"] = opt_json(c.mean);
    e["std"] = opt_json(c.std);
    e["std_defined"] = c.std.has_value();
    e["min"] = opt_json(c.min);
    e["p25"] = opt_json(c.p25);
    e["p50"] = opt_json(c.p50);
    e["p75"] = opt_json(c.p75);
    e["max"] = opt_json(c.max);
    cols.push_back(std::move(e));
  }
  j["columns"] = std::move(cols);
  return j;
}

std::string histogram_csv(const Histogram& h) {
  std::vector<std::string> header{"bin_lower", "bin_upper", "count"};
  for (const auto& g : h.groups) header.push_back(*h.group_by + "=" + g);
  std::string out = csv_row(header);
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    std::vector<std::string> row{format_number(h.lower_edges[b]),
                                 format_number(h.lower_edges[b] + h.bin_width),
                                 std::to_string(h.counts[b])};
    for (const auto& series : h.group_counts) row.push_back(std::to_string(series[b]));
    out += csv_row(row);
  }
  return out;
}

nlohmann::ordered_json histogram_json(const Histogram& h) {
  nlohmann::ordered_json j;
  j["column"] = h.column;
  j["bin_width"] = h.bin_width;
  j["lower_edges"] = h.lower_edges;
  j["counts"] = h.counts;
  if (h.group_by) {
    j["group_by"] = *h.group_by;
    nlohmann::ordered_json groups;
    for (std::size_t g = 0; g < h.groups.size(); ++g) groups[h.groups[g]] = h.group_counts[g];
    j["groups"] = std::move(groups);
  }
  return j;
}

}  // namespace nhanes::harmonize
