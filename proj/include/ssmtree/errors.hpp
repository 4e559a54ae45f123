#pragma once

#include <stdexcept>
#include <string>

namespace ssmtree {

// Boundary admits no proper coloring (or a BP denominator vanished,
// which signals the same thing one level up).
struct NonExtendibleError : std::runtime_error {
    explicit NonExtendibleError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroDenominatorError : NonExtendibleError {
    explicit ZeroDenominatorError(const std::string& msg) : NonExtendibleError(msg) {}
};

// Root marginal requested while the root itself is conditioned.
struct FrozenRootError : std::runtime_error {
    explicit FrozenRootError(const std::string& msg) : std::runtime_error(msg) {}
};

// Jacobian column requested for an argument pinned to 1 (frozen child).
struct DivisionByOneError : std::runtime_error {
    explicit DivisionByOneError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller violated a documented precondition (e.g. disagreements too close
// to the root). Kept distinct from data-driven failures above.
struct PreconditionError : std::logic_error {
    explicit PreconditionError(const std::string& msg) : std::logic_error(msg) {}
};

// Exact enumeration refused: q * vertex-count exceeds the state budget.
struct BudgetExceededError : std::runtime_error {
    explicit BudgetExceededError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rejection sampling for an extendible boundary pair ran out of attempts.
struct GenerationFailureError : std::runtime_error {
    GenerationFailureError(const std::string& msg, int attempts, int accepted)
        : std::runtime_error(msg), attempts(attempts), accepted(accepted) {}
    int attempts = 0;
    int accepted = 0;
};

// Bisection bracket did not contain a sign change.
struct BracketFailureError : std::runtime_error {
    explicit BracketFailureError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ssmtree
