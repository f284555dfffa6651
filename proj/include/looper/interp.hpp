#pragma once

#include <string>

#include "looper/program.hpp"

namespace looper {

/// Outcome of running a concrete query with the standard depth-first
/// left-most strategy and real integer arithmetic.
struct ConcreteOutcome {
    enum class Kind { Succeeded, FinitelyFailed, BudgetExceeded } kind;
    long steps = 0;
    long budget = 0;
    long arith_failures = 0;  // branches failed on non-ground arithmetic

    bool succeeded() const { return kind == Kind::Succeeded; }
    bool failed() const { return kind == Kind::FinitelyFailed; }
    bool budget_exceeded() const { return kind == Kind::BudgetExceeded; }
};

std::string to_string(const ConcreteOutcome& o);

/// Executes the query (one atom, no labels) counting resolution and
/// built-in steps; stops at the first success, a finitely failed tree,
/// or when the budget is exhausted.
ConcreteOutcome run_concrete(const Program& program, const TermPtr& query, long budget);

}  // namespace looper
