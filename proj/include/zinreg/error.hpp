#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zinreg {

enum class ErrorCode {
  DegenerateCovariate,
  InvalidEpsilon,
  DimensionMismatch,
  NonFiniteLikelihood,
  NegativeSmoothingParameter,
  NoZeroObservations,
  NoNonzeroObservations,
  InvalidSpec,
  EliminatedTerm,
  UnknownTerm,
  AllReplicationsFailed,
  SingleClass,
  NoNonzeroValidation,
  DomainError,
  MissingColumn,
  UnparseableValue,
  EmptyAfterFiltering,
  SchemaMismatch,
  InvalidConfig,
  Io,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace zinreg
