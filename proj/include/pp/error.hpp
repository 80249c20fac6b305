#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pp {

enum class ErrorCode {
  // corpus
  MalformedRecord,
  DuplicateId,
  EmptyPortfolio,
  // params
  ExpiredAtEvaluation,
  NoClaims,
  NonPositiveStart,
  NonPositiveHorizon,
  MissingGrantDate,
  CollabBelowOne,
  UnknownCountry,
  WeightsNotNormalized,
  OutOfRange,
  ZeroNoiseFloor,
  UnknownPartnershipType,
  RangeViolation,
  NegativeCaseValue,
  // strata
  UnscaledInput,
  UnknownProfile,
  // ltr
  NegativeRelevance,
  InsufficientQueries,
  FeatureOrderMismatch,
  SchemaVersionMismatch,
  CorruptModel,
  // claims
  EmptyClaim,
  NoIndependentClaims,
  // needgraph / nexus
  UnknownSourceType,
  EmptyText,
  InputOutOfRange,
  EmptyGraph,
  // gates
  GateOrderViolation,
  GateAlreadyResolved,
  GateConflict,
  UnknownItem,
  PayloadOutOfBounds,
  // service and plumbing
  NotFound,
  PhaseError,
  InvalidArgument,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. The code drives HTTP status
/// mapping and test assertions; the message carries the human context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pp
