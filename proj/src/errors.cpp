#include "bans/errors.hpp"

namespace bans {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LayerOverlap: return "LayerOverlap";
    case ErrorCode::BackwardDirectedEdge: return "BackwardDirectedEdge";
    case ErrorCode::CrossLayerUndirectedEdge: return "CrossLayerUndirectedEdge";
    case ErrorCode::LabelOrderViolation: return "LabelOrderViolation";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::StructureInconsistent: return "StructureInconsistent";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::EdgeOutsideUniverse: return "EdgeOutsideUniverse";
    case ErrorCode::DegenerateTruth: return "DegenerateTruth";
    case ErrorCode::MissingColumnInLayerMap: return "MissingColumnInLayerMap";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::PathError: return "PathError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace bans
