#include "nhanes/error.hpp"

namespace nhanes {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::BadNamestrCount: return "BadNamestrCount";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::UnsupportedCycle: return "UnsupportedCycle";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmptyBody: return "EmptyBody";
    case ErrorCode::CacheWriteError: return "CacheWriteError";
    case ErrorCode::RuleConflict: return "RuleConflict";
    case ErrorCode::RecodeDomainError: return "RecodeDomainError";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::ColumnConflict: return "ColumnConflict";
    case ErrorCode::NonPositiveBinWidth: return "NonPositiveBinWidth";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::RowMismatch: return "RowMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::AllCellsFailed: return "AllCellsFailed";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotLinearKernel: return "NotLinearKernel";
    case ErrorCode::MissingView: return "MissingView";
    case ErrorCode::UnfittedCca: return "UnfittedCca";
    case ErrorCode::BadVariant: return "BadVariant";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace nhanes
