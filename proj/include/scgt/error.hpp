#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scgt {

enum class ErrorCode {
  kNonConvergence,
  kNonHermitian,
  kNotPsd,
  kDimMismatch,
  kDimCap,
  kInvalidState,
  kInvalidPovm,
  kInvalidArgument,
  kDomainError,
  kInconsistentDerivative,
  kNonPositiveProbability,
  kNullDirectionDegenerate,
  kNullOutcomePresent,
  kSingularFQ,
  kNotRankOne,
  kNotNull,
  kNonUnitary,
  kNullOnStencil,
  kNullOutcomeOnGrid,
  kGridTooCoarse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kNonHermitian: return "NonHermitian";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kDimCap: return "DimCap";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kInvalidPovm: return "InvalidPovm";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kInconsistentDerivative: return "InconsistentDerivative";
    case ErrorCode::kNonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::kNullDirectionDegenerate: return "NullDirectionDegenerate";
    case ErrorCode::kNullOutcomePresent: return "NullOutcomePresent";
    case ErrorCode::kSingularFQ: return "SingularFQ";
    case ErrorCode::kNotRankOne: return "NotRankOne";
    case ErrorCode::kNotNull: return "NotNull";
    case ErrorCode::kNonUnitary: return "NonUnitary";
    case ErrorCode::kNullOnStencil: return "NullOnStencil";
    case ErrorCode::kNullOutcomeOnGrid: return "NullOutcomeOnGrid";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code so the
/// batch runner can record it per point without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scgt
