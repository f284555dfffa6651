#pragma once

#include <stdexcept>

#include "looper/nonterm.hpp"
#include "looper/poly.hpp"

namespace looper {

/// Raised when a candidate falls outside the supported constraint shapes
/// (it is then reported as not provable, never as an error).
struct UnsupportedCandidate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PremTemplate { Linear, Max2 };

std::string to_string(PremTemplate t);

struct Implication {
    std::vector<int> quantified;  // QuantInt symbols; QuantNat after the transform
    std::vector<IntCondition> premises;
    std::vector<IntCondition> conclusions;
};

/// Reachability conditions plus the universally quantified loop implication
/// with domain symbols c_I / d_I.
struct SymbolicSystem {
    std::vector<IntCondition> reachability;           // over query symbols
    std::vector<std::pair<int, IntExprPtr>> linking;  // c symbol = expression over query symbols
    std::vector<std::pair<int, int>> domains;         // (c, d) per quantified integer
    Implication implication;
};

struct DiophConstraint {
    Polynomial poly;
    bool equality = false;  // poly = 0 instead of poly >= 0
};

/// Quantifier-free integer constraints over symbolic coefficients.
struct DiophantineSystem {
    std::vector<DiophConstraint> constraints;
    std::string branch;  // disequality case split, empty when none
};

/// Single-conclusion >=-implication over the quantified naturals.
struct NormalizedImplication {
    std::vector<std::pair<Polynomial, Polynomial>> premises;  // p_i >= q_i
    std::pair<Polynomial, Polynomial> conclusion;
};

struct NormalizedBranch {
    std::string label;
    std::vector<IntCondition> reachability;
    std::vector<NormalizedImplication> implications;
};

/// Everything derived from one loop candidate, ready for encoding.
struct CandidateSystem {
    SymbolTable syms;
    std::vector<int> query_syms;               // n_i in argument order
    std::map<int, int> query_sym_of_var;       // query variable id -> symbol
    SymbolicSystem symbolic;                   // before the naturals transform
    SymbolicSystem natural;                    // after it
    std::vector<int> nat_syms;                 // quantified naturals
    /// Root expressions (over query symbols) for the integer variables of
    /// the class query; evaluated to instantiate witnesses.
    std::map<int, IntExprPtr> witness_exprs;
    struct Branch {
        std::string label;
        std::vector<NormalizedImplication> implications;
        std::vector<int> template_syms;
        DiophantineSystem dioph;
    };
    std::vector<Branch> branches;
};

/// Stepwise builder exposing the individual pipeline operations.
class ConstraintBuilder {
public:
    ConstraintBuilder(const ModedTree& tree, const ModedQuery& query, const LoopCandidate& cand);

    /// Exhaustively applies the integer-constructor definitions recorded on
    /// nodes ni..nj to the condition or expression term.
    TermPtr apply_cons(const TermPtr& c, int ni, int nj) const;
    /// Substitutes the integer variables of the begin atom by the
    /// position-corresponding subterms of the end atom.
    std::vector<TermPtr> replace(const std::vector<TermPtr>& conds, int ni, int nj) const;

    std::vector<IntCondition> reachability();
    Implication build_implication();
    SymbolicSystem add_domain_symbols(const Implication& imp);
    SymbolicSystem to_natural_form(const SymbolicSystem& sys);
    std::vector<NormalizedBranch> normalize(const SymbolicSystem& natural_sys);
    Polynomial apply_prop3(const NormalizedImplication& imp, PremTemplate prem,
                           std::vector<int>& template_syms_out);
    std::vector<DiophConstraint> absolute_positiveness(const Polynomial& p) const;

    CandidateSystem build(PremTemplate prem);

    SymbolTable& symbols() { return syms_; }
    const std::vector<int>& query_syms() const { return query_syms_; }
    const std::map<int, int>& query_sym_of_var() const { return query_sym_of_var_; }

private:
    IntExprPtr to_expr(const TermPtr& t, const std::map<int, int>& var_syms) const;
    IntCondition to_condition(const TermPtr& t, const std::map<int, int>& var_syms) const;
    IntExprPtr next_iteration_expr(const TermPtr& var);
    IntExprPtr root_expr(const TermPtr& var) const;

    const ModedTree& tree_;
    const ModedQuery& query_;
    const LoopCandidate& cand_;
    SymbolTable syms_;
    std::vector<int> query_syms_;
    std::map<int, int> query_sym_of_var_;
    std::vector<TermPtr> quant_vars_;      // integer variables of the begin atom
    std::map<int, int> quant_sym_of_var_;  // their QuantInt symbols
    std::vector<int> nat_syms_;
    std::map<int, int> nat_of_quant_;
    int template_count_ = 0;
};

/// Splits one integer condition into >=-pairs (p, q) meaning p >= q, using
/// +1 offsets for the strict comparisons; disequalities must be branched
/// away first.
std::vector<std::pair<Polynomial, Polynomial>> condition_to_geq_pairs(const IntCondition& c);

nlohmann::json symbolic_system_to_json(const SymbolicSystem& sys, const SymbolTable& syms);
nlohmann::json dioph_system_to_json(const DiophantineSystem& ds, const SymbolTable& syms);

}  // namespace looper
