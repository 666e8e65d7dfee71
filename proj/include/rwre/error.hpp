#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwre {

enum class ErrorKind {
  // validation
  NotStochastic,
  NonPositiveEntry,
  DuplicateStep,
  DimensionMismatch,
  BadConfig,
  HeaderMismatch,
  ShapeMismatch,
  PathTooShort,
  ZeroMassState,
  ZeroNotInRange,
  NonGradient,
  Unreachable,
  NotIrreducible,
  TiltNotFound,
  // numeric
  NoConvergence,
  DegenerateWeights,
  // budgets
  StateBudgetExceeded,
  SearchBudgetExceeded,
  EnumerationBudgetExceeded,
};

std::string_view to_string(ErrorKind kind);

/// Exit code class used by the CLI: 1 validation, 2 numeric, 3 budget.
int exit_code(ErrorKind kind);

/// Every failure in the library is reported as an Error carrying a kind and,
/// where it makes sense, the name of the offending input field.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string field = {})
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

}  // namespace rwre
