#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bnuq {

enum class ErrorCode {
  CycleDetected,
  InvalidVertex,
  NotAncestor,
  DimensionMismatch,
  UnsupportedSampling,
  NonGaussianModel,
  RankDeficientDesign,
  InsufficientData,
  EmptyData,
  NonpositiveBandwidth,
  DegenerateReference,
  UnsupportedCPDFamily,
  AbsoluteContinuityViolation,
  DomainExceeded,
  WeightDegeneracy,
  MGFNonexistent,
  UnsupportedFamily,
  UnsupportedQoI,
  MissingBudget,
  ZeroMeanRelative,
  StructureMismatch,
  MultiVertexDiff,
  MismatchedAmbiguity,
  InvalidParams,
  ParallelLines,
  InvalidChain,
  SyntaxError,
  UnknownFunction,
  ArityError,
  UnknownCpdKind,
  UnresolvedParent,
  InvalidArgument,
  InvalidData,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(message), code_(code), position_(position) {}

  ErrorCode code() const { return code_; }
  // Character offset for parse errors, row number for data errors.
  std::optional<std::size_t> position() const { return position_; }

  std::vector<std::size_t> cycle;

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace bnuq
