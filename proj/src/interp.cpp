#include "looper/interp.hpp"

#include <algorithm>

#include "looper/engine.hpp"

namespace looper {

namespace {

std::optional<mpz_class> eval_arith(const TermPtr& t) {
    if (t->is_int()) return t->value;
    if (t->is_var()) return std::nullopt;
    if (t->name == "-" && t->arity() == 1) {
        auto v = eval_arith(t->args[0]);
        if (!v) return std::nullopt;
        return -*v;
    }
    if (t->arity() == 2 && (t->name == "+" || t->name == "-" || t->name == "*")) {
        auto a = eval_arith(t->args[0]);
        auto b = eval_arith(t->args[1]);
        if (!a || !b) return std::nullopt;
        if (t->name == "+") return *a + *b;
        if (t->name == "-") return *a - *b;
        return *a * *b;
    }
    return std::nullopt;
}

bool eval_comparison(const std::string& op, const mpz_class& a, const mpz_class& b) {
    if (op == ">") return a > b;
    if (op == ">=") return a >= b;
    if (op == "=<") return a <= b;
    if (op == "<") return a < b;
    if (op == "=:=") return a == b;
    return a != b;  // =/=
}

int max_var_id_term(const TermPtr& t) {
    int m = -1;
    if (t->is_var()) return t->var_id;
    for (const auto& a : t->args) m = std::max(m, max_var_id_term(a));
    return m;
}

struct Frame {
    std::vector<TermPtr> goal;
    std::vector<int> candidates;  // clause indices for the selected user atom
    size_t next = 0;
};

}  // namespace

ConcreteOutcome run_concrete(const Program& program, const TermPtr& query, long budget) {
    int first_free = max_var_id_term(query) + 1;
    for (const auto& c : program.clauses) {
        first_free = std::max(first_free, max_var_id_term(c.head) + 1);
        for (const auto& b : c.body) first_free = std::max(first_free, max_var_id_term(b) + 1);
    }
    VarGen gen(first_free);

    ConcreteOutcome out;
    out.budget = budget;
    out.kind = ConcreteOutcome::Kind::FinitelyFailed;

    std::vector<Frame> stack;
    stack.push_back({{query}, {}, 0});

    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.goal.empty()) {
            out.kind = ConcreteOutcome::Kind::Succeeded;
            return out;
        }
        const TermPtr sel = top.goal.front();
        if (sel->is_compound() && sel->arity() == 2 &&
            (sel->name == "is" || is_comparison_functor(sel->name))) {
            if (++out.steps > budget) {
                out.kind = ConcreteOutcome::Kind::BudgetExceeded;
                return out;
            }
            std::vector<TermPtr> rest(top.goal.begin() + 1, top.goal.end());
            bool ok = false;
            Subst subst;
            if (sel->name == "is") {
                auto v = eval_arith(sel->args[1]);
                if (!v) {
                    ++out.arith_failures;
                } else {
                    // big-number work counts against the budget too
                    long extra =
                        static_cast<long>(mpz_sizeinbase(v->get_mpz_t(), 2) / 64);
                    if (extra > 0 && (out.steps += extra) > budget) {
                        out.kind = ConcreteOutcome::Kind::BudgetExceeded;
                        return out;
                    }
                    if (auto res = moded_unify(sel->args[0], mk_int(*v))) {
                        subst = res->subst;
                        ok = true;
                    }
                }
            } else {
                auto a = eval_arith(sel->args[0]);
                auto b = eval_arith(sel->args[1]);
                if (!a || !b) {
                    ++out.arith_failures;
                } else {
                    ok = eval_comparison(sel->name, *a, *b);
                }
            }
            stack.pop_back();  // built-ins are deterministic: no choice point
            if (ok) stack.push_back({subst.apply(rest), {}, 0});
            continue;
        }

        if (top.candidates.empty() && top.next == 0) {
            top.candidates = program.matching(sel->name, sel->arity());
        }
        bool pushed = false;
        while (top.next < top.candidates.size()) {
            int ci = top.candidates[top.next++];
            const Clause& clause = program.clauses[ci];
            std::unordered_map<int, TermPtr> renaming;
            TermPtr head = gen.rename_apart(clause.head, renaming);
            auto res = moded_unify(sel, head);
            if (!res) continue;
            if (++out.steps > budget) {
                out.kind = ConcreteOutcome::Kind::BudgetExceeded;
                return out;
            }
            std::vector<TermPtr> child;
            child.reserve(clause.body.size() + top.goal.size() - 1);
            for (const auto& b : clause.body)
                child.push_back(res->subst.apply(gen.rename_apart(b, renaming)));
            for (size_t i = 1; i < top.goal.size(); ++i)
                child.push_back(res->subst.apply(top.goal[i]));
            stack.push_back({std::move(child), {}, 0});
            pushed = true;
            break;
        }
        if (!pushed) stack.pop_back();
    }
    return out;
}

std::string to_string(const ConcreteOutcome& o) {
    switch (o.kind) {
        case ConcreteOutcome::Kind::Succeeded:
            return "succeeded after " + std::to_string(o.steps) + " steps";
        case ConcreteOutcome::Kind::FinitelyFailed:
            return "finitely failed after " + std::to_string(o.steps) + " steps";
        case ConcreteOutcome::Kind::BudgetExceeded:
            return "budget of " + std::to_string(o.budget) + " steps exceeded";
    }
    return "";
}

}  // namespace looper
