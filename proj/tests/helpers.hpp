#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "looper/analyze.hpp"
#include "looper/encode.hpp"
#include "looper/nonterm.hpp"
#include "looper/parser.hpp"

namespace looper::testing {

inline const char* kCountTo = R"(
count_to(N,L) :- count(0,N,L).
count(N,N,[N]).
count(M,N,[M|L]) :- M > N, M1 is M+1, count(M1,N,L).

:- nt_query(count_to(+int,-)).
)";

inline const char* kConstants = R"(
constants(I,J) :- I =:= 2, In is J*2, Jn is I-J, constants(In,Jn).

:- nt_query(constants(+int,+int)).
)";

inline const char* kEqPlus = R"(
eq_plus(I,J,P) :- eq(I,J), plus(P,I,In), eq_plus(In,J,P).
eq(A,A).
plus(0,B,B).
plus(s(A),B,s(C)) :- plus(A,B,C).

:- nt_query(eq_plus(+,+,+)).
)";

/// Ground terms of depth <= 2 over the two-symbol signature {a/0, f/1}.
inline std::vector<TermPtr> small_ground_universe() {
    TermPtr a = mk_atom("a");
    TermPtr fa = mk_compound("f", {a});
    TermPtr ffa = mk_compound("f", {fa});
    return {a, fa, ffa};
}

/// Ground terms of depth <= 2 over the constants, unary functors and integer
/// constants occurring in the given atoms (plus a/0 and f/1).
inline std::vector<TermPtr> ground_universe_for(const TermPtr& a, const TermPtr& b) {
    std::vector<std::string> consts{"a"};
    std::vector<std::string> unaries{"f"};
    std::vector<mpz_class> ints;
    std::function<void(const TermPtr&)> scan = [&](const TermPtr& t) {
        if (t->is_int()) {
            if (std::find(ints.begin(), ints.end(), t->value) == ints.end())
                ints.push_back(t->value);
            return;
        }
        if (t->is_compound()) {
            if (t->arity() == 0 &&
                std::find(consts.begin(), consts.end(), t->name) == consts.end())
                consts.push_back(t->name);
            if (t->arity() == 1 &&
                std::find(unaries.begin(), unaries.end(), t->name) == unaries.end())
                unaries.push_back(t->name);
            for (const auto& arg : t->args) scan(arg);
        }
    };
    scan(a);
    scan(b);
    std::vector<TermPtr> depth0;
    for (const auto& c : consts) depth0.push_back(mk_atom(c));
    for (const auto& v : ints) depth0.push_back(mk_int(v));
    std::vector<TermPtr> universe = depth0;
    std::vector<TermPtr> prev = depth0;
    for (int d = 0; d < 2; ++d) {
        std::vector<TermPtr> next;
        for (const auto& u : unaries)
            for (const auto& t : prev) next.push_back(mk_compound(u, {t}));
        universe.insert(universe.end(), next.begin(), next.end());
        prev = std::move(next);
    }
    return universe;
}

/// One-way matching: exists theta with pattern*theta == target.
inline bool more_general_than(const TermPtr& pattern, const TermPtr& target) {
    std::vector<std::pair<int, TermPtr>> bound;
    std::function<bool(const TermPtr&, const TermPtr&)> go = [&](const TermPtr& p,
                                                                 const TermPtr& t) {
        if (p->is_var()) {
            for (auto& [id, val] : bound)
                if (id == p->var_id) return term_equal(val, t);
            bound.emplace_back(p->var_id, t);
            return true;
        }
        if (p->is_int()) return t->is_int() && p->value == t->value;
        if (!t->is_compound() || p->name != t->name || p->args.size() != t->args.size())
            return false;
        for (size_t i = 0; i < p->args.size(); ++i)
            if (!go(p->args[i], t->args[i])) return false;
        return true;
    };
    return go(pattern, target);
}

/// Brute-force check of the denotational more-general relation: every
/// instantiation of a's input variables (over the bounded universe) must be
/// more general than some instantiation of b's. When subterm_closure is set,
/// the witness side may additionally use ground subterms of the checked
/// instances, which removes bounded-universe false negatives on deep atoms.
inline bool brute_force_moded_more_general(const TermPtr& a, const TermPtr& b,
                                           const std::vector<TermPtr>& universe,
                                           bool subterm_closure = false) {
    std::vector<TermPtr> a_inputs, b_inputs;
    for (const auto& v : vars_of(a))
        if (v->input) a_inputs.push_back(v);
    for (const auto& v : vars_of(b))
        if (v->input) b_inputs.push_back(v);

    auto instances = [](const TermPtr& atom, const std::vector<TermPtr>& inputs,
                        const std::vector<TermPtr>& terms) {
        std::vector<TermPtr> out;
        std::vector<size_t> idx(inputs.size(), 0);
        while (true) {
            Subst s;
            for (size_t i = 0; i < inputs.size(); ++i) s.bind(inputs[i]->var_id, terms[idx[i]]);
            out.push_back(s.apply(atom));
            size_t k = 0;
            for (; k < idx.size(); ++k) {
                if (++idx[k] < terms.size()) break;
                idx[k] = 0;
            }
            if (k == idx.size()) break;
            if (inputs.empty()) break;
        }
        return out;
    };

    std::vector<TermPtr> den_a = instances(a, a_inputs, universe);
    std::vector<TermPtr> witness_terms = universe;
    if (subterm_closure) {
        std::function<void(const TermPtr&)> add_ground = [&](const TermPtr& t) {
            if (is_ground(t)) {
                bool seen = false;
                for (const auto& u : witness_terms) seen = seen || term_equal(u, t);
                if (!seen) witness_terms.push_back(t);
            }
            for (const auto& arg : t->args) add_ground(arg);
        };
        for (const auto& ia : den_a) add_ground(ia);
    }
    std::vector<TermPtr> den_b = instances(b, b_inputs, witness_terms);
    for (const auto& ia : den_a) {
        bool found = false;
        for (const auto& jb : den_b)
            if (more_general_than(ia, jb)) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    return true;
}

inline bool brute_force_moded_more_general(const TermPtr& a, const TermPtr& b) {
    return brute_force_moded_more_general(a, b, ground_universe_for(a, b), true);
}

/// Random moded atoms over a two-function-symbol signature {a/0, f/1} with
/// up to three arguments. Shallow mode keeps arguments one level deep so the
/// depth-2 witness universe is always sufficient.
struct AtomGen {
    std::mt19937 rng;
    bool shallow = false;
    explicit AtomGen(unsigned seed, bool shallow_mode = false)
        : rng(seed), shallow(shallow_mode) {}

    TermPtr fresh_or_reused(std::vector<TermPtr>& vars, int& next_var) {
        std::uniform_int_distribution<int> reuse(0, 2);
        if (!vars.empty() && reuse(rng) == 0) {
            std::uniform_int_distribution<size_t> at(0, vars.size() - 1);
            return vars[at(rng)];
        }
        std::uniform_int_distribution<int> lab(0, 2);
        bool input = lab(rng) > 0;
        TermPtr v = mk_var(next_var, "V" + std::to_string(next_var), input, false);
        ++next_var;
        vars.push_back(v);
        return v;
    }

    TermPtr term(int depth, std::vector<TermPtr>& vars, int& next_var) {
        std::uniform_int_distribution<int> pick(0, depth > 0 ? 3 : 2);
        switch (pick(rng)) {
            case 0:
                return fresh_or_reused(vars, next_var);
            case 1:
                return mk_atom("a");
            case 2:
                return shallow ? mk_atom("a") : mk_atom("b");
            default:
                // in shallow mode keep instantiated subterms within depth 2,
                // so the bounded witness universe stays complete
                if (shallow) return mk_compound("f", {mk_atom("a")});
                return mk_compound("f", {term(depth - 1, vars, next_var)});
        }
    }

    TermPtr atom(int& next_var) {
        std::uniform_int_distribution<int> arity(1, 3);
        int n = arity(rng);
        std::vector<TermPtr> vars;
        std::vector<TermPtr> args;
        for (int i = 0; i < n; ++i) args.push_back(term(shallow ? 1 : 2, vars, next_var));
        return mk_compound("p", std::move(args));
    }
};

/// Exhaustive satisfiability search over [-range, range]^symbols.
inline bool exhaustive_solvable(const DiophantineSystem& ds, long range) {
    std::vector<int> syms;
    for (const auto& c : ds.constraints)
        for (int s : c.poly.symbols())
            if (std::find(syms.begin(), syms.end(), s) == syms.end()) syms.push_back(s);
    if (syms.empty()) {
        IntegerModel empty;
        return check_model(ds, empty);
    }
    std::vector<long> vals(syms.size(), -range);
    auto eval_int = [&](const Polynomial& p) {
        long total = 0;
        for (const auto& [mono, coeff] : p.terms()) {
            long t = coeff.get_si();
            for (const auto& [s, e] : mono) {
                size_t i = std::find(syms.begin(), syms.end(), s) - syms.begin();
                for (int k = 0; k < e; ++k) t *= vals[i];
            }
            total += t;
        }
        return total;
    };
    while (true) {
        bool ok = true;
        for (const auto& c : ds.constraints) {
            long v = eval_int(c.poly);
            if (c.equality ? v != 0 : v < 0) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
        size_t k = 0;
        for (; k < vals.size(); ++k) {
            if (++vals[k] <= range) break;
            vals[k] = -range;
        }
        if (k == vals.size()) return false;
    }
}

}  // namespace looper::testing
