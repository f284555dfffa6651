#pragma once

#include <gmpxx.h>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace looper {

class Term;
using TermPtr = std::shared_ptr<const Term>;

enum class TermKind { Var, Int, Compound };

/// First-order term. Atoms are compounds at predicate position; constants
/// are 0-ary compounds. Variables carry the input / integer labels of the
/// moded setting (integer implies input).
class Term {
public:
    TermKind kind;
    // Var
    int var_id = -1;
    bool input = false;
    bool integer = false;
    // Var name or compound functor
    std::string name;
    // Int
    mpz_class value;
    // Compound
    std::vector<TermPtr> args;

    bool is_var() const { return kind == TermKind::Var; }
    bool is_int() const { return kind == TermKind::Int; }
    bool is_compound() const { return kind == TermKind::Compound; }
    int arity() const { return is_compound() ? static_cast<int>(args.size()) : 0; }
};

TermPtr mk_var(int id, std::string name, bool input = false, bool integer = false);
TermPtr mk_int(mpz_class v);
TermPtr mk_compound(std::string functor, std::vector<TermPtr> args);
TermPtr mk_atom(std::string name);
TermPtr relabel(const TermPtr& var, bool input, bool integer);

/// Structural equality: var ids, labels, values, functors.
bool term_equal(const TermPtr& a, const TermPtr& b);
/// Structural equality with variables compared by name instead of id
/// (used for parse/print round-trips).
bool term_equal_by_name(const TermPtr& a, const TermPtr& b);

bool occurs(int var_id, const TermPtr& t);
void collect_vars(const TermPtr& t, std::vector<TermPtr>& out);
std::vector<TermPtr> vars_of(const TermPtr& t);
bool is_ground(const TermPtr& t);
/// True iff t contains an integer constant anywhere.
bool contains_integer_constant(const TermPtr& t);

/// Idempotent substitution var id -> term.
class Subst {
public:
    bool empty() const { return map_.empty(); }
    bool contains(int var_id) const { return map_.count(var_id) != 0; }
    TermPtr lookup(int var_id) const;
    void bind(int var_id, TermPtr t) { map_[var_id] = std::move(t); }
    TermPtr apply(const TermPtr& t) const;
    std::vector<TermPtr> apply(const std::vector<TermPtr>& ts) const;

private:
    std::unordered_map<int, TermPtr> map_;
};

/// Fresh variable id supply. Ids are global within one analysis.
class VarGen {
public:
    explicit VarGen(int first = 0) : next_(first) {}
    int fresh() { return next_++; }
    TermPtr rename_apart(const TermPtr& t, std::unordered_map<int, TermPtr>& mapping);

private:
    int next_;
};

/// 1-based argument path into a term or atom.
using Position = std::vector<int>;

std::optional<TermPtr> subterm(const Position& pos, const TermPtr& t);
/// Visits every strict subterm position (depth >= 1), outermost first.
void for_each_position(const TermPtr& t,
                       const std::function<void(const Position&, const TermPtr&)>& fn);

/// Integer expressions: integer constants, integer-labeled variables and
/// the constructors -/1, +/2, -/2, */2 over them.
bool is_integer_expression(const TermPtr& t);

bool is_comparison_functor(const std::string& f);
bool is_builtin_functor(const std::string& f, int arity);

std::string term_to_string(const TermPtr& t);

}  // namespace looper
