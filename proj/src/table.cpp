#include "nhanes/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "nhanes/error.hpp"

namespace nhanes {

std::string Missing::label() const {
  if (code == '.') return ".";
  return std::string{'.', code};
}

bool Missing::valid_code(char c) noexcept {
  return c == '.' || c == '_' || (c >= 'A' && c <= 'Z');
}

std::optional<Missing> Missing::parse(std::string_view text) {
  if (text == ".") return Missing{'.'};
  if (text.size() == 2 && text[0] == '.' && text[1] != '.' && valid_code(text[1])) {
    return Missing{text[1]};
  }
  return std::nullopt;
}

std::optional<double> as_number(const CellValue& v) noexcept {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return std::to_string(x);
  return std::string(buf, end);
}

std::string render(const CellValue& v) {
  if (const double* d = std::get_if<double>(&v)) return format_number(*d);
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  return {};
}

std::string_view to_string(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::text: return "text";
  }
  return "numeric";
}

ColumnKind column_kind_from_string(std::string_view s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "text") return ColumnKind::text;
  fail(ErrorCode::InvalidArgument, "unknown column kind '" + std::string(s) + "'");
}

ColumnTable::ColumnTable(std::string key_name) : key_name_(std::move(key_name)) {}

std::size_t ColumnTable::rows() const noexcept {
  return columns_.empty() ? 0 : columns_.front().values.size();
}

std::vector<std::string> ColumnTable::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

bool ColumnTable::has_column(std::string_view name) const noexcept {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

const Column& ColumnTable::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  fail(ErrorCode::UnknownColumn, "no column named '" + std::string(name) + "'");
}

Column& ColumnTable::column(std::string_view name) {
  return const_cast<Column&>(std::as_const(*this).column(name));
}

void ColumnTable::add_column(Column column) {
  if (has_column(column.name)) {
    fail(ErrorCode::ColumnConflict, "duplicate column '" + column.name + "'");
  }
  if (!columns_.empty() && column.values.size() != rows()) {
    fail(ErrorCode::LengthMismatch, "column '" + column.name + "' has " +
                                        std::to_string(column.values.size()) +
                                        " values, table has " + std::to_string(rows()));
  }
  if (columns_.empty() && !provenance_.empty() && provenance_.size() != column.values.size()) {
    fail(ErrorCode::LengthMismatch, "column length disagrees with provenance");
  }
  columns_.push_back(std::move(column));
}

void ColumnTable::add_column(std::string name, std::vector<CellValue> values, ColumnKind kind) {
  add_column(Column{std::move(name), kind, std::move(values)});
}

std::vector<std::int64_t> ColumnTable::keys() const {
  const Column& key = column(key_name_);
  std::vector<std::int64_t> out;
  out.reserve(key.values.size());
  for (std::size_t i = 0; i < key.values.size(); ++i) {
    auto v = as_number(key.values[i]);
    if (!v || !std::isfinite(*v) || std::trunc(*v) != *v) {
      fail(ErrorCode::InvalidArgument,
           "key column '" + key_name_ + "' has a non-integral value at row " + std::to_string(i));
    }
    out.push_back(static_cast<std::int64_t>(*v));
  }
  return out;
}

void ColumnTable::check_unique_keys() const {
  std::unordered_set<std::int64_t> seen;
  for (auto k : keys()) {
    if (!seen.insert(k).second) {
      fail(ErrorCode::DuplicateKey, "key " + std::to_string(k) + " appears more than once");
    }
  }
}

void ColumnTable::set_provenance(std::vector<std::string> provenance) {
  if (!provenance.empty() && !columns_.empty() && provenance.size() != rows()) {
    fail(ErrorCode::LengthMismatch, "provenance length disagrees with row count");
  }
  provenance_ = std::move(provenance);
}

std::optional<double> ColumnTable::number(std::string_view name, std::size_t row) const {
  return as_number(column(name).values.at(row));
}

ColumnTable ColumnTable::take_rows(std::span<const std::size_t> rows) const {
  ColumnTable out(key_name_);
  for (const auto& c : columns_) {
    Column copy{c.name, c.kind, {}};
    copy.values.reserve(rows.size());
    for (auto r : rows) copy.values.push_back(c.values.at(r));
    out.columns_.push_back(std::move(copy));
  }
  if (!provenance_.empty()) {
    out.provenance_.reserve(rows.size());
    for (auto r : rows) out.provenance_.push_back(provenance_.at(r));
  }
  return out;
}

ColumnTable ColumnTable::empty_like() const {
  ColumnTable out(key_name_);
  for (const auto& c : columns_) out.columns_.push_back(Column{c.name, c.kind, {}});
  return out;
}

Eigen::MatrixXd to_matrix(const ColumnTable& table, std::span<const std::string> columns) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(table.rows()),
                      static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const Column& c = table.column(columns[j]);
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      auto v = as_number(c.values[i]);
      if (!v) {
        fail(ErrorCode::InvalidArgument,
             "column '" + c.name + "' row " + std::to_string(i) + " is not a number");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
    }
  }
  return out;
}

}  // namespace nhanes
