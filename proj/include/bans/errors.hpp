#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bans {

enum class ErrorCode {
  LayerOverlap,
  BackwardDirectedEdge,
  CrossLayerUndirectedEdge,
  LabelOrderViolation,
  IndexOutOfRange,
  ConfigInvalid,
  FactorizationFailure,
  DimensionMismatch,
  NumericalUnderflow,
  DegenerateColumn,
  EmptyTrace,
  StructureInconsistent,
  EmptySelection,
  EdgeOutsideUniverse,
  DegenerateTruth,
  MissingColumnInLayerMap,
  ConstantColumn,
  MissingValue,
  NonNumericCell,
  ParseError,
  PathError,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports carries one of the codes above so that
// callers (and the CLI exit path) can tell error kinds apart without parsing
// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace bans
