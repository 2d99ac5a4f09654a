#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nhanes/table.hpp"

namespace nhanes::harmonize {

inline constexpr std::string_view kAnyCycle = "*";

struct Recode {
  std::vector<std::string> cycles;  ///< cycle labels; empty applies to every cycle
  std::vector<std::pair<CellValue, CellValue>> map;

  bool applies_to(std::string_view cycle) const;
  const CellValue* lookup(const CellValue& value) const;
};

// Inclusive bounds and/or an allowed value set over a raw variable of the
// same cycle. A row failing the predicate gets a missing value.
struct Eligibility {
  std::string variable;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<double> values;

  bool admits(std::optional<double> value) const;
};

enum class Combine { first, mean };

struct HarmonizationRule {
  std::string target;
  ColumnKind kind = ColumnKind::numeric;
  /// cycle label (or "*") -> raw source variable names
  std::map<std::string, std::vector<std::string>> sources;
  Combine combine = Combine::first;
  std::vector<Recode> recodes;
  std::vector<double> drop_codes;
  std::optional<Eligibility> eligibility;
  /// Consulted when this rule yields missing; at most one element.
  std::vector<HarmonizationRule> fallback;

  const std::vector<std::string>* sources_for(std::string_view cycle) const;
};

HarmonizationRule parse_rule(const nlohmann::json& j, bool require_target = true);
std::vector<HarmonizationRule> parse_rules(const nlohmann::json& j);

/// A view groups the component files merged per cycle and the rules that
/// produce its canonical columns.
struct ViewSpec {
  std::string name;
  std::vector<std::string> components;
  std::vector<HarmonizationRule> rules;
};

std::vector<ViewSpec> parse_rule_file(const nlohmann::json& j);
std::vector<ViewSpec> load_rule_file(const std::filesystem::path& path);
std::filesystem::path default_rule_file();

struct RuleOptions {
  bool strict = false;  ///< unmapped recode value -> RecodeDomainError instead of missing
};

struct HarmonizeResult {
  ColumnTable table;
  std::vector<std::string> warnings;
};

/// Stacks the per-cycle raw tables (ordered by cycle label) into one table
/// with the key column plus one column per rule. Never adds or removes rows.
HarmonizeResult apply_rules(const std::map<std::string, ColumnTable>& raw_by_cycle,
                            std::span<const HarmonizationRule> rules,
                            const RuleOptions& options = {});

/// Full outer merge of component tables from one cycle on the key. A column
/// name seen in an earlier table wins; later duplicates are skipped.
ColumnTable merge_components(std::span<const ColumnTable> tables);

/// Inner join on the key. Output keeps the left row order; right columns
/// follow the left ones.
ColumnTable join_views(const ColumnTable& left, const ColumnTable& right);

struct CompleteCases {
  ColumnTable table;
  std::size_t retained = 0;
  std::size_t dropped = 0;
};

CompleteCases complete_cases(const ColumnTable& table, std::span<const std::string> columns);

struct ColumnSummary {
  std::string name;
  std::size_t count = 0;
  std::optional<double> mean, std, min, p25, p50, p75, max;
};

struct SummaryStats {
  std::size_t rows_used = 0;
  std::vector<ColumnSummary> columns;
};

/// Linear interpolation between closest ranks (the common "type 7" rule).
double percentile(std::span<const double> sorted, double p);

SummaryStats summarize(const ColumnTable& table, bool adult_only,
                       std::string_view age_column = "age");

struct Histogram {
  std::string column;
  double bin_width = 0;
  std::vector<double> lower_edges;
  std::vector<std::size_t> counts;
  std::optional<std::string> group_by;
  std::vector<std::string> groups;
  std::vector<std::vector<std::size_t>> group_counts;  ///< [group][bin]
};

/// Left-closed right-open bins of `bin_width` aligned at multiples of the
/// width. Rows with a missing value are skipped; a missing group value is
/// reported under the group "missing".
Histogram histogram(const ColumnTable& table, std::string_view column, double bin_width,
                    const std::optional<std::string>& group_by = std::nullopt);

std::string summary_csv(const SummaryStats& stats);
nlohmann::ordered_json summary_json(const SummaryStats& stats);
std::string histogram_csv(const Histogram& h);
nlohmann::ordered_json histogram_json(const Histogram& h);

}  // namespace nhanes::harmonize
