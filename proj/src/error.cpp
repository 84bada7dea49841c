#include "spcl/error.hpp"

namespace spcl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonProper: return "NonProper";
    case ErrorCode::kBadGrid: return "BadGrid";
    case ErrorCode::kBadDomain: return "BadDomain";
    case ErrorCode::kEmptyOverlap: return "EmptyOverlap";
    case ErrorCode::kOutsideDomain: return "OutsideDomain";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBadParam: return "BadParam";
    case ErrorCode::kNotMonotone: return "NotMonotone";
    case ErrorCode::kBadLimits: return "BadLimits";
    case ErrorCode::kNotConvex: return "NotConvex";
    case ErrorCode::kSingularRegion: return "SingularRegion";
    case ErrorCode::kEmptyFeasible: return "EmptyFeasible";
    case ErrorCode::kNoRoot: return "NoRoot";
    case ErrorCode::kUnsupportedRegularizer: return "UnsupportedRegularizer";
    case ErrorCode::kBadPartition: return "BadPartition";
    case ErrorCode::kBadLabels: return "BadLabels";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kInfeasibleCurriculum: return "InfeasibleCurriculum";
    case ErrorCode::kBadFractions: return "BadFractions";
    case ErrorCode::kNonDifferentiable: return "NonDifferentiable";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace spcl
