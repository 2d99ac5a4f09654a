#include "nhanes/xport.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <string_view>

#include "nhanes/error.hpp"

namespace nhanes::xport {
namespace {

constexpr std::string_view kLibraryHeader = "HEADER RECORD*******LIBRARY HEADER RECORD!!!!!!!";
constexpr std::string_view kLibraryV8Header = "HEADER RECORD*******LIBV8   HEADER RECORD!!!!!!!";
constexpr std::string_view kMemberHeader = "HEADER RECORD*******MEMBER  HEADER RECORD!!!!!!!";
constexpr std::string_view kDescriptorHeader = "HEADER RECORD*******DSCRPTR HEADER RECORD!!!!!!!";
constexpr std::string_view kNamestrHeader = "HEADER RECORD*******NAMESTR HEADER RECORD!!!!!!!";
constexpr std::string_view kObsHeader = "HEADER RECORD*******OBS     HEADER RECORD!!!!!!!";

using Record = std::array<char, kRecordSize>;

std::string_view view(const Record& r) { return {r.data(), r.size()}; }

bool starts_with(const Record& r, std::string_view prefix) {
  return view(r).substr(0, prefix.size()) == prefix;
}

std::string trim_right(std::string_view s, bool nul_too = true) {
  std::size_t end = s.size();
  while (end > 0 && (s[end - 1] == ' ' || (nul_too && s[end - 1] == '\0'))) --end;
  return std::string(s.substr(0, end));
}

std::uint16_t be16(const char* p) {
  return static_cast<std::uint16_t>((static_cast<std::uint8_t>(p[0]) << 8) |
                                    static_cast<std::uint8_t>(p[1]));
}

std::uint32_t be32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(p[i]);
  return v;
}

std::size_t parse_digits(std::string_view s, const char* what) {
  std::size_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') {
      fail(ErrorCode::MalformedHeader, std::string("non-numeric ") + what + " field '" +
                                           std::string(s) + "'");
    }
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

// Sequential 80-byte record reader that tracks the stream offset.
class RecordReader {
 public:
  explicit RecordReader(std::istream& in) : in_(in) {
    auto pos = in_.tellg();
    offset_ = pos < 0 ? 0 : static_cast<std::uint64_t>(pos);
  }

  // false on clean end of stream; throws TruncatedFile on a partial record.
  bool next(Record& r) {
    in_.read(r.data(), static_cast<std::streamsize>(r.size()));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0) return false;
    if (got != r.size()) {
      fail(ErrorCode::TruncatedFile, "stream ends mid-record at offset " +
                                         std::to_string(offset_ + got));
    }
    offset_ += r.size();
    return true;
  }

  Record require(const char* what) {
    Record r;
    if (!next(r)) fail(ErrorCode::TruncatedFile, std::string("stream ends before ") + what);
    return r;
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

VariableDescriptor parse_namestr(const char* p, std::size_t index) {
  VariableDescriptor v;
  const auto type = be16(p);
  if (type != 1 && type != 2) {
    fail(ErrorCode::MalformedHeader,
         "NAMESTR " + std::to_string(index) + " has unknown type " + std::to_string(type));
  }
  v.kind = type == 1 ? VariableKind::numeric : VariableKind::character;
  v.length = be16(p + 4);
  v.number = be16(p + 6);
  v.name = trim_right({p + 8, 8});
  v.label = trim_right({p + 16, 40});
  v.format = trim_right({p + 56, 8});
  v.position = be32(p + 84);
  if (v.kind == VariableKind::numeric && (v.length < 2 || v.length > 8)) {
    fail(ErrorCode::MalformedHeader,
         "numeric variable " + v.name + " has length " + std::to_string(v.length));
  }
  if (v.kind == VariableKind::character && (v.length < 1 || v.length > 200)) {
    fail(ErrorCode::MalformedHeader,
         "character variable " + v.name + " has length " + std::to_string(v.length));
  }
  return v;
}

// Counts real observations in a payload of `length` bytes whose final
// `tail` bytes are available. Rows that are entirely blank and lie inside
// the last 80-byte card are padding.
std::size_t count_observations(std::uint64_t length, std::size_t stride, std::string_view tail) {
  if (stride == 0) return 0;
  std::size_t n = static_cast<std::size_t>(length / stride);
  while (n > 0) {
    const std::uint64_t start = static_cast<std::uint64_t>(n - 1) * stride;
    if (start + (kRecordSize - 1) < length) break;
    const std::uint64_t tail_start = length - tail.size();
    if (start < tail_start) break;
    auto row = tail.substr(static_cast<std::size_t>(start - tail_start), stride);
    if (row.find_first_not_of(' ') != std::string_view::npos) break;
    --n;
  }
  return n;
}

}  // namespace

std::size_t XportMember::record_length() const noexcept {
  std::size_t total = 0;
  for (const auto& v : variables) total += v.length;
  return total;
}

CellValue decode_ibm_double(std::span<const std::uint8_t, 8> bytes) noexcept {
  const std::uint8_t first = bytes[0];
  bool rest_zero = true;
  for (std::size_t i = 1; i < 8; ++i) rest_zero = rest_zero && bytes[i] == 0;
  if (rest_zero) {
    if (first == 0x2E || first == 0x5F || (first >= 0x41 && first <= 0x5A)) {
      return Missing{static_cast<char>(first)};
    }
    // Zero mantissa: the value is zero whatever the exponent.
    return (first & 0x80) ? -0.0 : 0.0;
  }
  std::uint64_t mantissa = 0;
  for (std::size_t i = 1; i < 8; ++i) mantissa = (mantissa << 8) | bytes[i];
  const int exponent = first & 0x7F;
  // value = mantissa * 16^(exponent - 64 - 14). The uint64 -> double
  // conversion rounds to nearest-even; the power-of-two scale is exact because
  // every IBM magnitude lies well inside the normal double range.
  const double magnitude = std::ldexp(static_cast<double>(mantissa), 4 * (exponent - 78));
  return (first & 0x80) ? -magnitude : magnitude;
}

CellValue decode_numeric(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes.size() > 8) {
    fail(ErrorCode::MalformedHeader,
         "numeric field of " + std::to_string(bytes.size()) + " bytes");
  }
  std::array<std::uint8_t, 8> padded{};
  std::memcpy(padded.data(), bytes.data(), bytes.size());
  return decode_ibm_double(std::span<const std::uint8_t, 8>(padded));
}

bool looks_like_xport(std::string_view head) noexcept {
  return head.substr(0, kLibraryHeader.size()) == kLibraryHeader;
}

XportLibrary parse_library(std::istream& in) {
  RecordReader reader(in);
  XportLibrary lib;

  Record r;
  if (!reader.next(r)) fail(ErrorCode::TruncatedFile, "empty stream");
  if (starts_with(r, kLibraryV8Header)) {
    fail(ErrorCode::MalformedHeader, "XPORT version 8/9 libraries are not supported");
  }
  if (!starts_with(r, kLibraryHeader)) {
    fail(ErrorCode::MalformedHeader, "missing library header sentinel");
  }
  r = reader.require("first real header");
  if (view(r).substr(0, 8) != "SAS     ") {
    fail(ErrorCode::MalformedHeader, "first real header does not start with 'SAS'");
  }
  lib.sas_version = trim_right(view(r).substr(24, 8));
  lib.os = trim_right(view(r).substr(32, 8));
  lib.created = trim_right(view(r).substr(64, 16));
  r = reader.require("second real header");
  lib.modified = trim_right(view(r).substr(0, 16));

  bool have_record = reader.next(r);
  while (have_record) {
    if (!starts_with(r, kMemberHeader)) {
      fail(ErrorCode::MalformedHeader, "expected member header at offset " +
                                           std::to_string(reader.offset() - kRecordSize));
    }
    XportMember member;
    member.namestr_length = parse_digits(view(r).substr(74, 4), "NAMESTR length");
    if (member.namestr_length != 140 && member.namestr_length != 136) {
      fail(ErrorCode::MalformedHeader,
           "unsupported NAMESTR length " + std::to_string(member.namestr_length));
    }
    r = reader.require("descriptor header");
    if (!starts_with(r, kDescriptorHeader)) fail(ErrorCode::MalformedHeader, "missing DSCRPTR header");
    r = reader.require("member descriptor");
    member.name = trim_right(view(r).substr(8, 8));
    member.created = trim_right(view(r).substr(64, 16));
    r = reader.require("second member descriptor");
    member.label = trim_right(view(r).substr(32, 40));
    member.type = trim_right(view(r).substr(72, 8));

    r = reader.require("NAMESTR header");
    if (!starts_with(r, kNamestrHeader)) fail(ErrorCode::MalformedHeader, "missing NAMESTR header");
    const std::size_t nvars = parse_digits(view(r).substr(54, 4), "variable count");

    // NAMESTR descriptors are packed back to back and blank-padded to a card.
    const std::size_t namestr_bytes = nvars * member.namestr_length;
    const std::size_t namestr_records = (namestr_bytes + kRecordSize - 1) / kRecordSize;
    std::string block;
    block.reserve(namestr_records * kRecordSize);
    for (std::size_t i = 0; i < namestr_records; ++i) {
      if (!reader.next(r)) {
        fail(ErrorCode::TruncatedFile, "stream ends inside the NAMESTR block");
      }
      if (starts_with(r, kObsHeader)) {
        fail(ErrorCode::BadNamestrCount, "declared " + std::to_string(nvars) +
                                             " variables but the NAMESTR block holds " +
                                             std::to_string(i) + " records");
      }
      block.append(r.data(), r.size());
    }
    member.variables.reserve(nvars);
    for (std::size_t i = 0; i < nvars; ++i) {
      member.variables.push_back(parse_namestr(block.data() + i * member.namestr_length, i));
    }

    r = reader.require("OBS header");
    if (!starts_with(r, kObsHeader)) {
      fail(ErrorCode::BadNamestrCount, "declared " + std::to_string(nvars) +
                                           " variables but the OBS header is not where expected");
    }

    std::size_t expected = 0;
    for (const auto& v : member.variables) {
      if (v.position != expected) {
        fail(ErrorCode::MalformedHeader, "variable " + v.name + " at position " +
                                             std::to_string(v.position) + ", expected " +
                                             std::to_string(expected));
      }
      expected += v.length;
    }

    // Locate the payload: every card up to the next member header or EOF.
    member.data_offset = reader.offset();
    const std::size_t stride = member.record_length();
    const std::size_t keep = stride + kRecordSize;
    std::string tail;
    have_record = false;
    while (reader.next(r)) {
      if (starts_with(r, kMemberHeader)) {
        have_record = true;
        break;
      }
      member.data_length += kRecordSize;
      tail.append(r.data(), r.size());
      if (tail.size() > 2 * keep) tail.erase(0, tail.size() - keep);
    }
    member.observation_count = count_observations(member.data_length, stride, tail);
    lib.members.push_back(std::move(member));
  }
  return lib;
}

ColumnTable read_observations(const XportMember& member, std::istream& in) {
  in.clear();
  in.seekg(static_cast<std::streamoff>(member.data_offset));
  if (!in) fail(ErrorCode::TruncatedFile, "cannot seek to member " + member.name + " data");

  const std::size_t stride = member.record_length();
  const std::size_t n = member.observation_count;
  std::string payload(n * stride, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    fail(ErrorCode::TruncatedFile, "member " + member.name + " payload holds " +
                                       std::to_string(in.gcount()) + " bytes, expected " +
                                       std::to_string(payload.size()));
  }

  ColumnTable table;
  for (const auto& var : member.variables) {
    Column c{var.name,
             var.kind == VariableKind::numeric ? ColumnKind::numeric : ColumnKind::text, {}};
    c.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const char* cell = payload.data() + i * stride + var.position;
      if (var.kind == VariableKind::numeric) {
        c.values.push_back(decode_numeric(
            std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(cell), var.length)));
      } else {
        c.values.emplace_back(trim_right({cell, var.length}, false));
      }
    }
    table.add_column(std::move(c));
  }
  return table;
}

ColumnTable read_xport_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  auto lib = parse_library(in);
  if (lib.members.empty()) fail(ErrorCode::MalformedHeader, path.string() + " has no members");
  return read_observations(lib.members.front(), in);
}

}  // namespace nhanes::xport
