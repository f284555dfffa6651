#pragma once

#include "looper/cnf.hpp"

namespace looper {

enum class SatResult { Sat, Unsat, Unknown };

struct SatSolution {
    SatResult result = SatResult::Unknown;
    /// model[v] for v in 1..num_vars; valid when result == Sat
    std::vector<bool> model;
    long conflicts = 0;
};

struct SolveConfig {
    double timeout_secs = 60.0;
    /// Path of an executable invoked as `solver in.cnf out.txt`; empty uses
    /// the built-in solver.
    std::string external_solver;
};

/// Conflict-driven clause-learning search over the formula.
SatSolution solve_cnf(const CnfFormula& f, const SolveConfig& cfg = {});

}  // namespace looper
