#include "looper/poly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace looper {

int SymbolTable::add(SymKind kind, std::string name, int term_var) {
    syms_.push_back({kind, std::move(name), term_var});
    return static_cast<int>(syms_.size()) - 1;
}

int SymbolTable::find(const std::string& name) const {
    for (size_t i = 0; i < syms_.size(); ++i)
        if (syms_[i].name == name) return static_cast<int>(i);
    return -1;
}

IntExprPtr ie_const(mpz_class v) {
    auto e = std::make_shared<IntExpr>();
    e->kind = IntExpr::Kind::Const;
    e->value = std::move(v);
    return e;
}

IntExprPtr ie_sym(int sym) {
    auto e = std::make_shared<IntExpr>();
    e->kind = IntExpr::Kind::Sym;
    e->sym = sym;
    return e;
}

static IntExprPtr ie_node(IntExpr::Kind k, IntExprPtr a, IntExprPtr b) {
    auto e = std::make_shared<IntExpr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

IntExprPtr ie_neg(IntExprPtr e) { return ie_node(IntExpr::Kind::Neg, std::move(e), nullptr); }
IntExprPtr ie_add(IntExprPtr a, IntExprPtr b) {
    return ie_node(IntExpr::Kind::Add, std::move(a), std::move(b));
}
IntExprPtr ie_sub(IntExprPtr a, IntExprPtr b) {
    return ie_node(IntExpr::Kind::Sub, std::move(a), std::move(b));
}
IntExprPtr ie_mul(IntExprPtr a, IntExprPtr b) {
    return ie_node(IntExpr::Kind::Mul, std::move(a), std::move(b));
}

IntExprPtr ie_subst(const IntExprPtr& e, const std::map<int, IntExprPtr>& map) {
    switch (e->kind) {
        case IntExpr::Kind::Const:
            return e;
        case IntExpr::Kind::Sym: {
            auto it = map.find(e->sym);
            return it == map.end() ? e : it->second;
        }
        case IntExpr::Kind::Neg:
            return ie_neg(ie_subst(e->lhs, map));
        case IntExpr::Kind::Add:
            return ie_add(ie_subst(e->lhs, map), ie_subst(e->rhs, map));
        case IntExpr::Kind::Sub:
            return ie_sub(ie_subst(e->lhs, map), ie_subst(e->rhs, map));
        case IntExpr::Kind::Mul:
            return ie_mul(ie_subst(e->lhs, map), ie_subst(e->rhs, map));
    }
    return e;
}

mpz_class ie_eval(const IntExprPtr& e, const std::map<int, mpz_class>& values) {
    switch (e->kind) {
        case IntExpr::Kind::Const:
            return e->value;
        case IntExpr::Kind::Sym: {
            auto it = values.find(e->sym);
            if (it == values.end()) throw std::invalid_argument("unbound symbol in evaluation");
            return it->second;
        }
        case IntExpr::Kind::Neg:
            return -ie_eval(e->lhs, values);
        case IntExpr::Kind::Add:
            return ie_eval(e->lhs, values) + ie_eval(e->rhs, values);
        case IntExpr::Kind::Sub:
            return ie_eval(e->lhs, values) - ie_eval(e->rhs, values);
        case IntExpr::Kind::Mul:
            return ie_eval(e->lhs, values) * ie_eval(e->rhs, values);
    }
    return 0;
}

namespace {

int ie_prio(const IntExprPtr& e) {
    switch (e->kind) {
        case IntExpr::Kind::Add:
        case IntExpr::Kind::Sub:
            return 500;
        case IntExpr::Kind::Mul:
            return 400;
        case IntExpr::Kind::Neg:
            return 200;
        default:
            return 0;
    }
}

void ie_print(std::ostringstream& os, const IntExprPtr& e, const SymbolTable& syms, int max_prio) {
    int prio = ie_prio(e);
    bool paren = prio > max_prio;
    if (paren) os << '(';
    switch (e->kind) {
        case IntExpr::Kind::Const:
            if (e->value < 0 && !paren && max_prio < 500) {
                os << '(' << e->value.get_str() << ')';
            } else {
                os << e->value.get_str();
            }
            break;
        case IntExpr::Kind::Sym:
            os << syms.name(e->sym);
            break;
        case IntExpr::Kind::Neg:
            os << '-';
            ie_print(os, e->lhs, syms, 200);
            break;
        case IntExpr::Kind::Add:
            ie_print(os, e->lhs, syms, 500);
            os << '+';
            ie_print(os, e->rhs, syms, 499);
            break;
        case IntExpr::Kind::Sub:
            ie_print(os, e->lhs, syms, 500);
            os << '-';
            ie_print(os, e->rhs, syms, 499);
            break;
        case IntExpr::Kind::Mul:
            ie_print(os, e->lhs, syms, 400);
            os << '*';
            ie_print(os, e->rhs, syms, 399);
            break;
    }
    if (paren) os << ')';
}

}  // namespace

std::string ie_to_string(const IntExprPtr& e, const SymbolTable& syms) {
    std::ostringstream os;
    ie_print(os, e, syms, 1000);
    return os.str();
}

CmpOp cmp_from_functor(const std::string& f) {
    if (f == ">") return CmpOp::Gt;
    if (f == ">=") return CmpOp::Ge;
    if (f == "=<") return CmpOp::Le;
    if (f == "<") return CmpOp::Lt;
    if (f == "=:=") return CmpOp::Eq;
    if (f == "=/=") return CmpOp::Ne;
    throw std::invalid_argument("not a comparison functor: " + f);
}

std::string cmp_to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Le: return "=<";
        case CmpOp::Lt: return "<";
        case CmpOp::Eq: return "=:=";
        case CmpOp::Ne: return "=/=";
    }
    return "?";
}

bool cmp_eval(CmpOp op, const mpz_class& a, const mpz_class& b) {
    switch (op) {
        case CmpOp::Gt: return a > b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
    }
    return false;
}

std::string cond_to_string(const IntCondition& c, const SymbolTable& syms) {
    return ie_to_string(c.lhs, syms) + " " + cmp_to_string(c.op) + " " + ie_to_string(c.rhs, syms);
}

Polynomial Polynomial::constant(mpz_class c) {
    Polynomial p;
    if (c != 0) p.terms_[{}] = std::move(c);
    return p;
}

Polynomial Polynomial::symbol(int sym) {
    Polynomial p;
    p.terms_[{{sym, 1}}] = 1;
    return p;
}

Polynomial Polynomial::from_expr(const IntExprPtr& e) {
    switch (e->kind) {
        case IntExpr::Kind::Const:
            return constant(e->value);
        case IntExpr::Kind::Sym:
            return symbol(e->sym);
        case IntExpr::Kind::Neg:
            return -from_expr(e->lhs);
        case IntExpr::Kind::Add:
            return from_expr(e->lhs) + from_expr(e->rhs);
        case IntExpr::Kind::Sub:
            return from_expr(e->lhs) - from_expr(e->rhs);
        case IntExpr::Kind::Mul:
            return from_expr(e->lhs) * from_expr(e->rhs);
    }
    return {};
}

void Polynomial::add_term(const Monomial& m, const mpz_class& c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        if (c != 0) terms_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
    return r;
}

Polynomial Polynomial::operator-() const {
    Polynomial r;
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r;
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            Monomial m;
            size_t i = 0, j = 0;
            while (i < ma.size() || j < mb.size()) {
                if (j >= mb.size() || (i < ma.size() && ma[i].first < mb[j].first)) {
                    m.push_back(ma[i++]);
                } else if (i >= ma.size() || mb[j].first < ma[i].first) {
                    m.push_back(mb[j++]);
                } else {
                    m.emplace_back(ma[i].first, ma[i].second + mb[j].second);
                    ++i;
                    ++j;
                }
            }
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

bool Polynomial::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Polynomial Polynomial::substitute(int sym, const Polynomial& replacement) const {
    Polynomial r;
    for (const auto& [m, c] : terms_) {
        Polynomial term = Polynomial::constant(c);
        Polynomial rest_m;
        Monomial rest;
        int exponent = 0;
        for (const auto& [s, e] : m) {
            if (s == sym) {
                exponent = e;
            } else {
                rest.emplace_back(s, e);
            }
        }
        rest_m.terms_[rest] = 1;
        term = term * rest_m;
        for (int k = 0; k < exponent; ++k) term = term * replacement;
        r = r + term;
    }
    return r;
}

mpz_class Polynomial::eval(const std::map<int, mpz_class>& values) const {
    mpz_class total = 0;
    for (const auto& [m, c] : terms_) {
        mpz_class t = c;
        for (const auto& [s, e] : m) {
            auto it = values.find(s);
            if (it == values.end()) throw std::invalid_argument("unbound symbol in evaluation");
            for (int k = 0; k < e; ++k) t *= it->second;
        }
        total += t;
    }
    return total;
}

std::vector<int> Polynomial::symbols() const {
    std::vector<int> out;
    for (const auto& [m, c] : terms_) {
        (void)c;
        for (const auto& [s, e] : m) {
            (void)e;
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::map<Polynomial::Monomial, Polynomial> Polynomial::coefficients_in(
    const std::vector<int>& quantified) const {
    std::map<Monomial, Polynomial> out;
    for (const auto& [m, c] : terms_) {
        Monomial quant, rest;
        for (const auto& [s, e] : m) {
            if (std::find(quantified.begin(), quantified.end(), s) != quantified.end())
                quant.emplace_back(s, e);
            else
                rest.emplace_back(s, e);
        }
        Polynomial part;
        part.terms_[rest] = c;
        auto it = out.find(quant);
        if (it == out.end())
            out.emplace(quant, part);
        else
            it->second = it->second + part;
    }
    return out;
}

std::string Polynomial::to_string(const SymbolTable& syms) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << (c >= 0 ? " + " : " - ");
        else if (c < 0) os << "-";
        mpz_class a = abs(c);
        bool coeff_one = a == 1 && !m.empty();
        if (!coeff_one) os << a.get_str();
        bool star = !coeff_one;
        for (const auto& [s, e] : m) {
            if (star) os << "*";
            os << syms.name(s);
            if (e > 1) os << "^" << e;
            star = true;
        }
        first = false;
    }
    return os.str();
}

nlohmann::json Polynomial::to_json(const SymbolTable& syms) const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [m, c] : terms_) {
        nlohmann::json mono = nlohmann::json::array();
        for (const auto& [s, e] : m) mono.push_back({{"sym", syms.name(s)}, {"exp", e}});
        terms.push_back({{"coeff", c.get_str()}, {"monomial", mono}});
    }
    return terms;
}

}  // namespace looper
