#include "causalkit/error.hpp"

#include <utility>

namespace causalkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::UnknownEdgeEndpoint: return "UnknownEdgeEndpoint";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::RoleConflict: return "RoleConflict";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::EndpointConditioned: return "EndpointConditioned";
    case ErrorCode::CandidateViolation: return "CandidateViolation";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::ParentOrderViolation: return "ParentOrderViolation";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::ModelInvalid: return "ModelInvalid";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::TooManyNodes: return "TooManyNodes";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::DegenerateTreatment: return "DegenerateTreatment";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonBinaryValue: return "NonBinaryValue";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SeparationSuspected: return "SeparationSuspected";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::UnknownTerm: return "UnknownTerm";
    case ErrorCode::DegenerateArm: return "DegenerateArm";
    case ErrorCode::ZeroRiskControlArm: return "ZeroRiskControlArm";
    case ErrorCode::PropensityAtBound: return "PropensityAtBound";
    case ErrorCode::InsufficientReplicates: return "InsufficientReplicates";
    case ErrorCode::BootstrapDegenerate: return "BootstrapDegenerate";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SemanticError: return "SemanticError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, int line,
             std::vector<std::string> nodes)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message),
      line_(line),
      nodes_(std::move(nodes)) {}

}  // namespace causalkit
