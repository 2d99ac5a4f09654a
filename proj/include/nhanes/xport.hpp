#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nhanes/table.hpp"

// Reader for SAS transport (XPORT version 5) files as described in SAS
// Technical Note TS-140: 80-byte card images, 140-byte NAMESTR descriptors
// and IBM System/360 hexadecimal floating point numbers.
namespace nhanes::xport {

inline constexpr std::size_t kRecordSize = 80;

enum class VariableKind { numeric = 1, character = 2 };

struct VariableDescriptor {
  std::string name;
  VariableKind kind = VariableKind::numeric;
  std::size_t length = 8;
  std::string label;
  std::string format;
  std::size_t position = 0;  ///< byte offset within an observation
  int number = 0;            ///< 1-based variable number
};

struct XportMember {
  std::string name;
  std::string label;
  std::string type;
  std::string created;
  std::vector<VariableDescriptor> variables;
  std::size_t observation_count = 0;

  std::size_t namestr_length = 140;
  std::uint64_t data_offset = 0;  ///< stream offset of the first observation byte
  std::uint64_t data_length = 0;  ///< payload bytes including trailing padding

  /// Bytes per observation: the sum of the variable lengths.
  std::size_t record_length() const noexcept;
};

struct XportLibrary {
  std::string sas_version;
  std::string os;
  std::string created;   ///< ddMMMyy:hh:mm:ss as written by SAS
  std::string modified;
  std::vector<XportMember> members;
};

/// Decodes one 8-byte big-endian IBM double. Total: every pattern yields a
/// finite number or a SAS missing code.
CellValue decode_ibm_double(std::span<const std::uint8_t, 8> bytes) noexcept;
/// Numeric field of 2..8 bytes, zero-extended on the right to 8 before decoding.
CellValue decode_numeric(std::span<const std::uint8_t> bytes);

/// Parses all headers and NAMESTR descriptors; observations are located but
/// not decoded.
XportLibrary parse_library(std::istream& in);

/// Decodes a member's observations. Numeric columns go through
/// decode_numeric, character columns are right-trimmed of blanks.
ColumnTable read_observations(const XportMember& member, std::istream& in);

/// Convenience for the common one-member-per-file case.
ColumnTable read_xport_file(const std::filesystem::path& path);

/// Cheap sniff: does the buffer start with the library header sentinel?
bool looks_like_xport(std::string_view head) noexcept;

}  // namespace nhanes::xport
