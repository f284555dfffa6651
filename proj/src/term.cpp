#include "looper/term.hpp"

#include <sstream>

namespace looper {

TermPtr mk_var(int id, std::string name, bool input, bool integer) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Var;
    t->var_id = id;
    t->name = std::move(name);
    t->input = input || integer;  // integer label implies input
    t->integer = integer;
    return t;
}

TermPtr mk_int(mpz_class v) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Int;
    t->value = std::move(v);
    return t;
}

TermPtr mk_compound(std::string functor, std::vector<TermPtr> args) {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Compound;
    t->name = std::move(functor);
    t->args = std::move(args);
    return t;
}

TermPtr mk_atom(std::string name) { return mk_compound(std::move(name), {}); }

TermPtr relabel(const TermPtr& var, bool input, bool integer) {
    return mk_var(var->var_id, var->name, input, integer);
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TermKind::Var:
            return a->var_id == b->var_id && a->input == b->input && a->integer == b->integer;
        case TermKind::Int:
            return a->value == b->value;
        case TermKind::Compound:
            if (a->name != b->name || a->args.size() != b->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (!term_equal(a->args[i], b->args[i])) return false;
            return true;
    }
    return false;
}

bool term_equal_by_name(const TermPtr& a, const TermPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TermKind::Var:
            return a->name == b->name && a->input == b->input && a->integer == b->integer;
        case TermKind::Int:
            return a->value == b->value;
        case TermKind::Compound:
            if (a->name != b->name || a->args.size() != b->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (!term_equal_by_name(a->args[i], b->args[i])) return false;
            return true;
    }
    return false;
}

bool occurs(int var_id, const TermPtr& t) {
    if (t->is_var()) return t->var_id == var_id;
    for (const auto& a : t->args)
        if (occurs(var_id, a)) return true;
    return false;
}

void collect_vars(const TermPtr& t, std::vector<TermPtr>& out) {
    if (t->is_var()) {
        for (const auto& v : out)
            if (v->var_id == t->var_id) return;
        out.push_back(t);
        return;
    }
    for (const auto& a : t->args) collect_vars(a, out);
}

std::vector<TermPtr> vars_of(const TermPtr& t) {
    std::vector<TermPtr> out;
    collect_vars(t, out);
    return out;
}

bool is_ground(const TermPtr& t) {
    if (t->is_var()) return false;
    for (const auto& a : t->args)
        if (!is_ground(a)) return false;
    return true;
}

bool contains_integer_constant(const TermPtr& t) {
    if (t->is_int()) return true;
    for (const auto& a : t->args)
        if (contains_integer_constant(a)) return true;
    return false;
}

TermPtr Subst::lookup(int var_id) const {
    auto it = map_.find(var_id);
    return it == map_.end() ? nullptr : it->second;
}

TermPtr Subst::apply(const TermPtr& t) const {
    if (map_.empty()) return t;
    if (t->is_var()) {
        auto it = map_.find(t->var_id);
        return it == map_.end() ? t : it->second;
    }
    if (t->is_int()) return t;
    bool changed = false;
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) {
        TermPtr na = apply(a);
        changed = changed || na != a;
        args.push_back(std::move(na));
    }
    if (!changed) return t;
    return mk_compound(t->name, std::move(args));
}

std::vector<TermPtr> Subst::apply(const std::vector<TermPtr>& ts) const {
    std::vector<TermPtr> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(apply(t));
    return out;
}

TermPtr VarGen::rename_apart(const TermPtr& t, std::unordered_map<int, TermPtr>& mapping) {
    if (t->is_var()) {
        auto it = mapping.find(t->var_id);
        if (it != mapping.end()) return it->second;
        TermPtr fresh_var = mk_var(fresh(), t->name, t->input, t->integer);
        mapping.emplace(t->var_id, fresh_var);
        return fresh_var;
    }
    if (t->is_int()) return t;
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(rename_apart(a, mapping));
    return mk_compound(t->name, std::move(args));
}

std::optional<TermPtr> subterm(const Position& pos, const TermPtr& t) {
    TermPtr cur = t;
    for (int idx : pos) {
        if (!cur->is_compound() || idx < 1 || idx > cur->arity()) return std::nullopt;
        cur = cur->args[idx - 1];
    }
    return cur;
}

static void positions_rec(const TermPtr& t, Position& prefix,
                          const std::function<void(const Position&, const TermPtr&)>& fn) {
    for (int i = 1; i <= t->arity(); ++i) {
        prefix.push_back(i);
        fn(prefix, t->args[i - 1]);
        positions_rec(t->args[i - 1], prefix, fn);
        prefix.pop_back();
    }
}

void for_each_position(const TermPtr& t,
                       const std::function<void(const Position&, const TermPtr&)>& fn) {
    Position prefix;
    positions_rec(t, prefix, fn);
}

bool is_integer_expression(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Int:
            return true;
        case TermKind::Var:
            return t->integer;
        case TermKind::Compound:
            if (t->name == "-" && t->arity() == 1) return is_integer_expression(t->args[0]);
            if ((t->name == "+" || t->name == "-" || t->name == "*") && t->arity() == 2)
                return is_integer_expression(t->args[0]) && is_integer_expression(t->args[1]);
            return false;
    }
    return false;
}

bool is_comparison_functor(const std::string& f) {
    return f == ">" || f == ">=" || f == "=<" || f == "<" || f == "=:=" || f == "=/=";
}

bool is_builtin_functor(const std::string& f, int arity) {
    return arity == 2 && (f == "is" || is_comparison_functor(f));
}

namespace {

int functor_priority(const TermPtr& t) {
    if (!t->is_compound()) return 0;
    if (t->arity() == 2) {
        if (t->name == "is" || is_comparison_functor(t->name)) return 700;
        if (t->name == "+" || t->name == "-") return 500;
        if (t->name == "*") return 400;
    }
    if (t->arity() == 1 && t->name == "-") return 200;
    return 0;
}

bool is_list_cell(const TermPtr& t) { return t->is_compound() && t->name == "." && t->arity() == 2; }
bool is_nil(const TermPtr& t) { return t->is_compound() && t->name == "[]" && t->arity() == 0; }

void print_term(std::ostream& os, const TermPtr& t, int max_prio);

void print_list(std::ostream& os, const TermPtr& cell) {
    os << '[';
    TermPtr cur = cell;
    bool first = true;
    while (is_list_cell(cur)) {
        if (!first) os << ',';
        print_term(os, cur->args[0], 999);
        first = false;
        cur = cur->args[1];
    }
    if (!is_nil(cur)) {
        os << '|';
        print_term(os, cur, 999);
    }
    os << ']';
}

void print_term(std::ostream& os, const TermPtr& t, int max_prio) {
    switch (t->kind) {
        case TermKind::Var:
            os << t->name;
            return;
        case TermKind::Int:
            if (t->value < 0 && max_prio < 200) {
                os << '(' << t->value.get_str() << ')';
            } else {
                os << t->value.get_str();
            }
            return;
        case TermKind::Compound:
            break;
    }
    if (is_nil(t) || is_list_cell(t)) {
        if (is_nil(t)) {
            os << "[]";
        } else {
            print_list(os, t);
        }
        return;
    }
    int prio = functor_priority(t);
    if (prio > 0 && t->arity() == 2) {
        bool paren = prio > max_prio;
        if (paren) os << '(';
        // yfx for arithmetic, xfx for 700-level operators
        int lhs_max = prio == 700 ? prio - 1 : prio;
        print_term(os, t->args[0], lhs_max);
        if (t->name == "is") {
            os << " is ";
        } else if (prio == 700) {
            os << ' ' << t->name << ' ';
        } else {
            os << t->name;
        }
        print_term(os, t->args[1], prio - 1);
        if (paren) os << ')';
        return;
    }
    if (prio > 0 && t->arity() == 1) {
        bool paren = prio > max_prio;
        if (paren) os << '(';
        os << '-';
        print_term(os, t->args[0], prio);
        if (paren) os << ')';
        return;
    }
    os << t->name;
    if (!t->args.empty()) {
        os << '(';
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (i) os << ',';
            print_term(os, t->args[i], 999);
        }
        os << ')';
    }
}

}  // namespace

std::string term_to_string(const TermPtr& t) {
    std::ostringstream os;
    print_term(os, t, 1200);
    return os.str();
}

}  // namespace looper
