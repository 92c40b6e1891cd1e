#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causalkit {

enum class ErrorCode {
  // graphs
  CycleDetected,
  DuplicateNode,
  DuplicateEdge,
  UnknownEdgeEndpoint,
  SelfLoop,
  RoleConflict,
  UnknownNode,
  InvalidPath,
  EndpointConditioned,
  CandidateViolation,
  InvalidQuery,
  // structural models and data
  ProbabilityOutOfRange,
  ParentOrderViolation,
  UnknownParent,
  ModelInvalid,
  UnknownColumn,
  TooManyNodes,
  EmptySelection,
  DegenerateTreatment,
  InvalidDataset,
  ParseError,
  NonBinaryValue,
  // model fitting
  InvalidSpec,
  RankDeficient,
  NoConvergence,
  SeparationSuspected,
  MissingColumn,
  NotConverged,
  UnknownTerm,
  // estimation
  DegenerateArm,
  ZeroRiskControlArm,
  PropensityAtBound,
  InsufficientReplicates,
  BootstrapDegenerate,
  // files and command line
  SyntaxError,
  SemanticError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` is stable and is what tests
/// and the command line dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int line = 0,
        std::vector<std::string> nodes = {});

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix that `what()` carries.
  const std::string& message() const noexcept { return message_; }
  /// 1-based source line for file parsing errors, 0 otherwise.
  int line() const noexcept { return line_; }
  /// Node names tied to the failure, e.g. the members of a detected cycle.
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }

 private:
  ErrorCode code_;
  std::string message_;
  int line_;
  std::vector<std::string> nodes_;
};

}  // namespace causalkit
