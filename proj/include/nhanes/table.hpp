#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace nhanes {

/// SAS missing value: '.' for the ordinary missing value, 'A'..'Z' and '_'
/// for the special missing codes.
struct Missing {
  char code = '.';

  std::string label() const;
  static bool valid_code(char c) noexcept;
  /// Parses ".", ".A" ... ".Z", "._"; nullopt for anything else.
  static std::optional<Missing> parse(std::string_view text);

  friend bool operator==(const Missing&, const Missing&) = default;
};

using CellValue = std::variant<double, std::string, Missing>;

inline bool is_missing(const CellValue& v) noexcept { return std::holds_alternative<Missing>(v); }
std::optional<double> as_number(const CellValue& v) noexcept;
/// Text used for CSV output and display. Missing renders as an empty string;
/// numbers use the shortest representation that round-trips.
std::string render(const CellValue& v);
std::string format_number(double x);

enum class ColumnKind { numeric, categorical, text };
std::string_view to_string(ColumnKind kind) noexcept;
ColumnKind column_kind_from_string(std::string_view s);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<CellValue> values;
};

// Named columns of equal length. One column is designated as the respondent
// key (SEQN by default); per-row provenance records the survey cycle of origin.
class ColumnTable {
 public:
  explicit ColumnTable(std::string key_name = "SEQN");

  const std::string& key_name() const noexcept { return key_name_; }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept { return columns_.size(); }

  std::vector<std::string> names() const;
  bool has_column(std::string_view name) const noexcept;
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);
  const std::vector<Column>& columns() const noexcept { return columns_; }

  void add_column(Column column);
  void add_column(std::string name, std::vector<CellValue> values,
                  ColumnKind kind = ColumnKind::numeric);

  bool has_key() const noexcept { return has_column(key_name_); }
  /// Key values as integers; throws UnknownColumn if there is no key column
  /// and InvalidArgument for a missing or non-integral key cell.
  std::vector<std::int64_t> keys() const;
  /// Throws DuplicateKey if any key repeats.
  void check_unique_keys() const;

  const std::vector<std::string>& provenance() const noexcept { return provenance_; }
  void set_provenance(std::vector<std::string> provenance);

  std::optional<double> number(std::string_view column, std::size_t row) const;

  /// New table holding the given rows in the given order; schema unchanged.
  ColumnTable take_rows(std::span<const std::size_t> rows) const;
  /// Same schema, zero rows.
  ColumnTable empty_like() const;

 private:
  std::string key_name_;
  std::vector<Column> columns_;
  std::vector<std::string> provenance_;
};

/// Dense numeric matrix of the named columns (rows in table order). Throws
/// UnknownColumn, and InvalidArgument if any selected cell is not a number.
Eigen::MatrixXd to_matrix(const ColumnTable& table, std::span<const std::string> columns);

}  // namespace nhanes
