#pragma once

#include <stdexcept>
#include <string>

namespace rtreelab {

// All throwing paths in the library use one of these named error types so
// callers (and the CLI) can map failure modes to exit codes and messages.

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input / precondition failures.
struct InputError : Error { using Error::Error; };
struct NotASubgroup : InputError { using InputError::InputError; };
struct NotAMember : InputError { using InputError::InputError; };
struct NotTransverse : InputError { using InputError::InputError; };
struct NothingToTrim : InputError { using InputError::InputError; };
struct NotSimplicial : InputError { using InputError::InputError; };
struct StarViolation : InputError { using InputError::InputError; };
struct NotRealizable : InputError { using InputError::InputError; };
struct MonotonicityViolation : InputError { using InputError::InputError; };
struct PreconditionViolated : InputError { using InputError::InputError; };
struct InC : PreconditionViolated { using PreconditionViolated::PreconditionViolated; };

// Resource budget failures.
struct BudgetError : Error { using Error::Error; };
struct PrecisionBudgetExceeded : BudgetError { using BudgetError::BudgetError; };
struct BudgetExceeded : BudgetError { using BudgetError::BudgetError; };

}  // namespace rtreelab
