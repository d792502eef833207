#include "zinreg/error.hpp"

namespace zinreg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateCovariate: return "DegenerateCovariate";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorCode::NegativeSmoothingParameter: return "NegativeSmoothingParameter";
    case ErrorCode::NoZeroObservations: return "NoZeroObservations";
    case ErrorCode::NoNonzeroObservations: return "NoNonzeroObservations";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EliminatedTerm: return "EliminatedTerm";
    case ErrorCode::UnknownTerm: return "UnknownTerm";
    case ErrorCode::AllReplicationsFailed: return "AllReplicationsFailed";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NoNonzeroValidation: return "NoNonzeroValidation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableValue: return "UnparseableValue";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace zinreg
