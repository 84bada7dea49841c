#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spcl {

enum class ErrorCode {
  kNonProper,
  kBadGrid,
  kBadDomain,
  kEmptyOverlap,
  kOutsideDomain,
  kDimensionMismatch,
  kBadParam,
  kNotMonotone,
  kBadLimits,
  kNotConvex,
  kSingularRegion,
  kEmptyFeasible,
  kNoRoot,
  kUnsupportedRegularizer,
  kBadPartition,
  kBadLabels,
  kSingularSystem,
  kInfeasibleCurriculum,
  kBadFractions,
  kNonDifferentiable,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported through this type;
/// `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spcl
