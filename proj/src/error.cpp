#include "bnuq/error.hpp"

namespace bnuq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::InvalidVertex: return "InvalidVertex";
    case ErrorCode::NotAncestor: return "NotAncestor";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedSampling: return "UnsupportedSampling";
    case ErrorCode::NonGaussianModel: return "NonGaussianModel";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::NonpositiveBandwidth: return "NonpositiveBandwidth";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::UnsupportedCPDFamily: return "UnsupportedCPDFamily";
    case ErrorCode::AbsoluteContinuityViolation: return "AbsoluteContinuityViolation";
    case ErrorCode::DomainExceeded: return "DomainExceeded";
    case ErrorCode::WeightDegeneracy: return "WeightDegeneracy";
    case ErrorCode::MGFNonexistent: return "MGFNonexistent";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::UnsupportedQoI: return "UnsupportedQoI";
    case ErrorCode::MissingBudget: return "MissingBudget";
    case ErrorCode::ZeroMeanRelative: return "ZeroMeanRelative";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
    case ErrorCode::MultiVertexDiff: return "MultiVertexDiff";
    case ErrorCode::MismatchedAmbiguity: return "MismatchedAmbiguity";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ParallelLines: return "ParallelLines";
    case ErrorCode::InvalidChain: return "InvalidChain";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::UnknownCpdKind: return "UnknownCpdKind";
    case ErrorCode::UnresolvedParent: return "UnresolvedParent";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace bnuq
