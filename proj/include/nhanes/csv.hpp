#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nhanes/table.hpp"

namespace nhanes {

/// RFC-4180 field: quoted only when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view text);
std::string csv_row(const std::vector<std::string>& fields);
/// Parses RFC-4180 text (quoted fields may span lines). Trailing newline optional.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Strict full-string parse; nullopt on anything but a complete finite number.
std::optional<double> parse_number(std::string_view text);

enum class MissingCodeColumns {
  none,          ///< missing renders as an empty field, code is lost
  all_numeric,   ///< every numeric column gets a `<name>__missing` companion
  when_present,  ///< companions only for columns that contain a missing value
};

struct CsvOptions {
  MissingCodeColumns missing_codes = MissingCodeColumns::none;
  bool include_provenance = false;
};

inline constexpr std::string_view kMissingSuffix = "__missing";
inline constexpr std::string_view kProvenanceColumn = "_cycle";

void write_csv(const ColumnTable& table, std::ostream& out, const CsvOptions& options = {});

/// Harmonized view persistence: `<path>` holds the CSV, `<path>.json` the
/// sidecar typing each column and naming its missing-code companion.
void write_view(const ColumnTable& table, const std::filesystem::path& path);
ColumnTable read_view(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and renames, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace nhanes
