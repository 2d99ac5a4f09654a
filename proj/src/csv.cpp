#include "nhanes/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nhanes/error.hpp"

namespace nhanes {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('"');
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
        break;
      default:
        field.push_back(c);
        row_started = true;
    }
  }
  if (in_quotes) fail(ErrorCode::InvalidArgument, "unterminated quoted CSV field");
  if (row_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0;
  const char* first = text.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

namespace {

bool wants_companion(const Column& c, MissingCodeColumns mode) {
  if (c.kind == ColumnKind::text || mode == MissingCodeColumns::none) return false;
  if (mode == MissingCodeColumns::all_numeric) return true;
  for (const auto& v : c.values) {
    if (is_missing(v)) return true;
  }
  return false;
}

}  // namespace

void write_csv(const ColumnTable& table, std::ostream& out, const CsvOptions& options) {
  const auto& cols = table.columns();
  std::vector<bool> companion(cols.size());
  std::vector<std::string> header;
  const bool provenance = options.include_provenance && !table.provenance().empty();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    header.push_back(cols[j].name);
    companion[j] = wants_companion(cols[j], options.missing_codes);
    if (companion[j]) header.push_back(cols[j].name + std::string(kMissingSuffix));
  }
  if (provenance) header.emplace_back(kProvenanceColumn);
  out << csv_row(header);

  std::vector<std::string> fields;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    fields.clear();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const CellValue& v = cols[j].values[i];
      fields.push_back(render(v));
      if (companion[j]) {
        const Missing* m = std::get_if<Missing>(&v);
        fields.push_back(m ? m->label() : std::string{});
      }
    }
    if (provenance) fields.push_back(table.provenance()[i]);
    out << csv_row(fields);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_view(const ColumnTable& table, const std::filesystem::path& path) {
  std::ostringstream csv;
  CsvOptions options{MissingCodeColumns::when_present, true};
  write_csv(table, csv, options);

  nlohmann::ordered_json sidecar;
  sidecar["format"] = "nhanes-view/1";
  sidecar["key"] = table.key_name();
  sidecar["rows"] = table.rows();
  sidecar["provenance_column"] =
      table.provenance().empty() ? nlohmann::ordered_json(nullptr)
                                 : nlohmann::ordered_json(std::string(kProvenanceColumn));
  auto columns = nlohmann::ordered_json::array();
  for (const auto& c : table.columns()) {
    nlohmann::ordered_json entry;
    entry["name"] = c.name;
    entry["kind"] = std::string(to_string(c.kind));
    if (wants_companion(c, options.missing_codes)) {
      entry["missing_codes"] = c.name + std::string(kMissingSuffix);
    } else {
      entry["missing_codes"] = nullptr;
    }
    columns.push_back(std::move(entry));
  }
  sidecar["columns"] = std::move(columns);

  write_file_atomic(path, csv.str());
  auto sidecar_path = path;
  sidecar_path += ".json";
  write_file_atomic(sidecar_path, sidecar.dump(2) + "\n");
}

ColumnTable read_view(const std::filesystem::path& path) {
  auto sidecar_path = path;
  sidecar_path += ".json";
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_file(sidecar_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, "bad view sidecar " + sidecar_path.string() + ": " + e.what());
  }
  auto rows = parse_csv(read_file(path));
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "view file " + path.string() + " has no header");

  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < rows[0].size(); ++j) index[rows[0][j]] = j;
  auto field_index = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      fail(ErrorCode::UnknownColumn, "view file " + path.string() + " lacks column '" + name + "'");
    }
    return it->second;
  };

  ColumnTable table(sidecar.value("key", std::string("SEQN")));
  const std::size_t n = rows.size() - 1;
  for (const auto& spec : sidecar.at("columns")) {
    Column c{spec.at("name").get<std::string>(),
             column_kind_from_string(spec.at("kind").get<std::string>()), {}};
    const std::size_t j = field_index(c.name);
    std::optional<std::size_t> code_j;
    if (spec.contains("missing_codes") && !spec["missing_codes"].is_null()) {
      code_j = field_index(spec["missing_codes"].get<std::string>());
    }
    c.values.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      const auto& row = rows[i];
      if (row.size() != rows[0].size()) {
        fail(ErrorCode::InvalidArgument, "view file " + path.string() + " row " +
                                             std::to_string(i) + " has wrong field count");
      }
      const std::string& text = row[j];
      if (c.kind == ColumnKind::text) {
        c.values.emplace_back(text);
      } else if (text.empty()) {
        Missing m;
        if (code_j && !row[*code_j].empty()) {
          auto parsed = Missing::parse(row[*code_j]);
          if (!parsed) fail(ErrorCode::InvalidArgument, "bad missing code '" + row[*code_j] + "'");
          m = *parsed;
        }
        c.values.emplace_back(m);
      } else if (auto num = parse_number(text)) {
        c.values.emplace_back(*num);
      } else if (c.kind == ColumnKind::categorical) {
        c.values.emplace_back(text);
      } else {
        fail(ErrorCode::InvalidArgument,
             "numeric column '" + c.name + "' holds non-numeric value '" + text + "'");
      }
    }
    table.add_column(std::move(c));
  }
  if (sidecar.contains("provenance_column") && !sidecar["provenance_column"].is_null()) {
    const std::size_t j = field_index(sidecar["provenance_column"].get<std::string>());
    std::vector<std::string> provenance;
    provenance.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) provenance.push_back(rows[i][j]);
    table.set_provenance(std::move(provenance));
  }
  return table;
}

}  // namespace nhanes
