#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhanes {

// Every failure the toolkit reports carries one of these codes so callers
// (and the CLI's --json-errors mode) can dispatch without parsing messages.
enum class ErrorCode {
  // xport
  MalformedHeader,
  TruncatedFile,
  BadNamestrCount,
  ValueOutOfRange,
  // ingest
  UnsupportedCycle,
  NetworkError,
  NotFound,
  EmptyBody,
  CacheWriteError,
  // harmonize
  RuleConflict,
  RecodeDomainError,
  DuplicateKey,
  UnknownColumn,
  ColumnConflict,
  NonPositiveBinWidth,
  // linalg / pca / cca
  TooFewRows,
  RowMismatch,
  NotSymmetric,
  NoConvergence,
  NotPositiveDefinite,
  NonFinite,
  BadK,
  DimensionMismatch,
  // model / eval
  SingleClass,
  TooFewPerClass,
  EmptyGrid,
  AllCellsFailed,
  LengthMismatch,
  NotLinearKernel,
  // task / cli
  MissingView,
  UnfittedCca,
  BadVariant,
  InvalidConfig,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace nhanes
