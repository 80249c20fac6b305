#include "pp/error.hpp"

namespace pp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyPortfolio: return "EmptyPortfolio";
    case ErrorCode::ExpiredAtEvaluation: return "ExpiredAtEvaluation";
    case ErrorCode::NoClaims: return "NoClaims";
    case ErrorCode::NonPositiveStart: return "NonPositiveStart";
    case ErrorCode::NonPositiveHorizon: return "NonPositiveHorizon";
    case ErrorCode::MissingGrantDate: return "MissingGrantDate";
    case ErrorCode::CollabBelowOne: return "CollabBelowOne";
    case ErrorCode::UnknownCountry: return "UnknownCountry";
    case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ZeroNoiseFloor: return "ZeroNoiseFloor";
    case ErrorCode::UnknownPartnershipType: return "UnknownPartnershipType";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::NegativeCaseValue: return "NegativeCaseValue";
    case ErrorCode::UnscaledInput: return "UnscaledInput";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::NegativeRelevance: return "NegativeRelevance";
    case ErrorCode::InsufficientQueries: return "InsufficientQueries";
    case ErrorCode::FeatureOrderMismatch: return "FeatureOrderMismatch";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::EmptyClaim: return "EmptyClaim";
    case ErrorCode::NoIndependentClaims: return "NoIndependentClaims";
    case ErrorCode::UnknownSourceType: return "UnknownSourceType";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::InputOutOfRange: return "InputOutOfRange";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::GateOrderViolation: return "GateOrderViolation";
    case ErrorCode::GateAlreadyResolved: return "GateAlreadyResolved";
    case ErrorCode::GateConflict: return "GateConflict";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::PayloadOutOfBounds: return "PayloadOutOfBounds";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::PhaseError: return "PhaseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace pp
