#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace looper {

/// Clause set in DIMACS literal convention (positive/negative ints, var
/// indices from 1). Clauses are stored flat, separated by zeros.
struct CnfFormula {
    int num_vars = 0;
    long num_clauses = 0;
    std::vector<int32_t> literals;

    int new_var() { return ++num_vars; }
    void add_clause(const std::vector<int>& lits) {
        literals.insert(literals.end(), lits.begin(), lits.end());
        literals.push_back(0);
        ++num_clauses;
    }
    /// Invokes fn(span_begin, span_end) per clause.
    template <typename Fn>
    void for_each_clause(Fn&& fn) const {
        size_t start = 0;
        for (size_t i = 0; i < literals.size(); ++i) {
            if (literals[i] == 0) {
                fn(&literals[start], &literals[i]);
                start = i + 1;
            }
        }
    }
};

std::string to_dimacs(const CnfFormula& f);
void write_dimacs(const CnfFormula& f, const std::string& path);
std::optional<CnfFormula> parse_dimacs(const std::string& text);

}  // namespace looper
