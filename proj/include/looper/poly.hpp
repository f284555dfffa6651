#pragma once

#include <gmpxx.h>

#include <json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace looper {

/// Symbols occurring in constraint expressions: query integers n_i, domain
/// limits c_I and directions d_I, template coefficients, and the universally
/// quantified integer / natural variables of the loop implication.
enum class SymKind { QueryInt, DomainBase, DomainDir, Template, QuantInt, QuantNat };

class SymbolTable {
public:
    struct Info {
        SymKind kind;
        std::string name;
        int term_var = -1;  // tree variable id for QuantInt symbols
    };

    int add(SymKind kind, std::string name, int term_var = -1);
    const Info& info(int sym) const { return syms_.at(sym); }
    const std::string& name(int sym) const { return syms_.at(sym).name; }
    SymKind kind(int sym) const { return syms_.at(sym).kind; }
    int size() const { return static_cast<int>(syms_.size()); }
    int find(const std::string& name) const;
    bool is_quantified(int sym) const {
        return kind(sym) == SymKind::QuantInt || kind(sym) == SymKind::QuantNat;
    }

private:
    std::vector<Info> syms_;
};

/// Integer expression over symbols: the -, +, * constructors plus symbolic
/// coefficients, kept as a tree to preserve the source shape.
struct IntExpr;
using IntExprPtr = std::shared_ptr<const IntExpr>;

struct IntExpr {
    enum class Kind { Const, Sym, Neg, Add, Sub, Mul } kind;
    mpz_class value;  // Const
    int sym = -1;     // Sym
    IntExprPtr lhs, rhs;
};

IntExprPtr ie_const(mpz_class v);
IntExprPtr ie_sym(int sym);
IntExprPtr ie_neg(IntExprPtr e);
IntExprPtr ie_add(IntExprPtr a, IntExprPtr b);
IntExprPtr ie_sub(IntExprPtr a, IntExprPtr b);
IntExprPtr ie_mul(IntExprPtr a, IntExprPtr b);
IntExprPtr ie_subst(const IntExprPtr& e, const std::map<int, IntExprPtr>& map);
mpz_class ie_eval(const IntExprPtr& e, const std::map<int, mpz_class>& values);
std::string ie_to_string(const IntExprPtr& e, const SymbolTable& syms);

enum class CmpOp { Gt, Ge, Le, Lt, Eq, Ne };

CmpOp cmp_from_functor(const std::string& f);
std::string cmp_to_string(CmpOp op);
bool cmp_eval(CmpOp op, const mpz_class& a, const mpz_class& b);

struct IntCondition {
    IntExprPtr lhs;
    CmpOp op;
    IntExprPtr rhs;
};

std::string cond_to_string(const IntCondition& c, const SymbolTable& syms);

/// Multivariate polynomial with integer coefficients in canonical form:
/// sorted monomial -> coefficient.
class Polynomial {
public:
    using Monomial = std::vector<std::pair<int, int>>;  // (symbol, exponent), sorted

    Polynomial() = default;
    static Polynomial constant(mpz_class c);
    static Polynomial symbol(int sym);
    static Polynomial from_expr(const IntExprPtr& e);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator-() const;
    bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    const std::map<Monomial, mpz_class>& terms() const { return terms_; }

    Polynomial substitute(int sym, const Polynomial& replacement) const;
    mpz_class eval(const std::map<int, mpz_class>& values) const;
    std::vector<int> symbols() const;

    /// Groups terms by the sub-monomial over `quantified` symbols; the values
    /// are the coefficient polynomials over the remaining symbols.
    std::map<Monomial, Polynomial> coefficients_in(const std::vector<int>& quantified) const;

    std::string to_string(const SymbolTable& syms) const;
    nlohmann::json to_json(const SymbolTable& syms) const;

private:
    void add_term(const Monomial& m, const mpz_class& c);
    std::map<Monomial, mpz_class> terms_;
};

}  // namespace looper
