#pragma once

#include <map>
#include <string>
#include <vector>

#include "looper/term.hpp"

namespace looper {

struct Clause {
    TermPtr head;
    std::vector<TermPtr> body;
};

/// Definite program over the supported built-in subset. Clause order is
/// preserved; the depth-first left-most strategy depends on it.
struct Program {
    std::vector<Clause> clauses;

    /// Indices of clauses whose head matches functor/arity, in source order.
    std::vector<int> matching(const std::string& functor, int arity) const;
    bool defines(const std::string& functor, int arity) const;
};

enum class ArgMode { Free, Input, IntegerInput };

struct ModedQuery {
    TermPtr atom;
    std::vector<ArgMode> modes;
    std::string source_text;
};

}  // namespace looper
