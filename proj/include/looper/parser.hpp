#pragma once

#include <stdexcept>
#include <string>

#include "looper/program.hpp"

namespace looper {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line(line),
          column(column) {}
    int line;
    int column;
};

struct ParsedFile {
    Program program;
    std::vector<ModedQuery> queries;
};

/// Parses clauses and nt_query directives from one source text.
ParsedFile parse_file(const std::string& text);

Program parse_program(const std::string& text);

/// Parses a single ":- nt_query(p(m1,...,mn))." directive. When a program is
/// given, the predicate must be defined with matching arity.
ModedQuery parse_query_directive(const std::string& text, const Program* program = nullptr);

std::string pretty_print(const Program& program);
std::string pretty_print(const ModedQuery& query);

bool program_equal(const Program& a, const Program& b);

}  // namespace looper
