#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <json.hpp>

#include <set>

#include "helpers.hpp"
#include "looper/engine.hpp"
#include "looper/interp.hpp"
#include "looper/parser.hpp"

using namespace looper;

namespace {

ModedTree tree_for(const char* text, BuildLimits limits = {}) {
    ParsedFile f = parse_file(text);
    REQUIRE(f.queries.size() == 1);
    return build_tree(f.program, f.queries[0], limits);
}

std::string sel(const ModedTree& t, int node) { return term_to_string(t.selected_atom(node)); }

const ClauseStep* clause_step(const ModedTree& t, int to_node) {
    return std::get_if<ClauseStep>(&t.edge_into(to_node).step);
}

}  // namespace

TEST_CASE("moded_unify propagates labels and records input bindings") {
    SUBCASE("eq(I,J) against eq(A,A) constrains J to I") {
        TermPtr i = mk_var(0, "I", true);
        TermPtr j = mk_var(1, "J", true);
        TermPtr a = mk_var(2, "A");
        auto res = moded_unify(mk_compound("eq", {i, j}), mk_compound("eq", {a, a}));
        REQUIRE(res);
        REQUIRE(res->input_bindings.size() == 1);
        CHECK(res->input_bindings[0].first->var_id == 1);   // J is bound
        CHECK(res->input_bindings[0].second->var_id == 0);  // to I
    }
    SUBCASE("label-free unification records nothing") {
        TermPtr x = mk_var(0, "X");
        TermPtr y = mk_var(1, "Y");
        auto res = moded_unify(mk_compound("p", {x}), mk_compound("p", {mk_compound("f", {y})}));
        REQUIRE(res);
        CHECK(res->mgu.size() == 1);
        CHECK(res->input_bindings.empty());
    }
    SUBCASE("plus(P,I,In) against plus(0,B,B)") {
        TermPtr p = mk_var(0, "P", true);
        TermPtr i = mk_var(1, "I", true);
        TermPtr in = mk_var(2, "In");
        TermPtr b = mk_var(3, "B");
        auto res = moded_unify(mk_compound("plus", {p, i, in}),
                               mk_compound("plus", {mk_int(0), b, b}));
        REQUIRE(res);
        REQUIRE(res->input_bindings.size() == 1);
        CHECK(res->input_bindings[0].first->var_id == 0);
        CHECK(res->input_bindings[0].second->is_int());
        // In was unified with B, hence with I: it carries the input label now
        TermPtr in_after = res->subst.apply(in);
        REQUIRE(in_after->is_var());
        CHECK(in_after->input);
    }
    SUBCASE("occurs check") {
        TermPtr x = mk_var(0, "X");
        CHECK_FALSE(moded_unify(mk_compound("p", {x}),
                                mk_compound("p", {mk_compound("f", {x})})));
    }
    SUBCASE("integer label moves through variable-variable bindings") {
        TermPtr n = mk_var(0, "N", true, true);
        TermPtr m = mk_var(1, "M");
        auto res = moded_unify(mk_compound("q", {n}), mk_compound("q", {m}));
        REQUIRE(res);
        TermPtr m_after = res->subst.apply(m);
        REQUIRE(m_after->is_var());
        CHECK(m_after->integer);
    }
}

TEST_CASE("count_to tree reproduces the published structure") {
    ModedTree t = tree_for(testing::kCountTo);
    REQUIRE(t.nodes.size() == 11);

    CHECK(sel(t, 0) == "count_to(X1,X2)");
    CHECK(sel(t, 1) == "count(0,X1,X2)");
    CHECK(t.nodes[2].goal.empty());  // refutation via the base clause
    CHECK(t.nodes[2].leaf == LeafKind::Success);
    CHECK(sel(t, 3).substr(0, 1) == "0");  // condition 0 > N selected
    CHECK(std::holds_alternative<CondStep>(t.edge_into(4).step));
    CHECK(std::holds_alternative<ConsStep>(t.edge_into(5).step));
    CHECK(sel(t, 5).substr(0, 5) == "count");
    CHECK(std::holds_alternative<CondStep>(t.edge_into(8).step));
    CHECK(std::holds_alternative<ConsStep>(t.edge_into(9).step));
    CHECK(t.nodes[6].leaf == LeafKind::Success);
    CHECK(t.nodes[10].leaf == LeafKind::Success);

    // the recursive clause is cut at N9
    REQUIRE(t.cut_points.size() == 1);
    CHECK(t.cut_points[0].first == 9);
    CHECK(t.cut_points[0].second == 2);

    // the cons variable stays integer-labeled in descendant goals
    const ConsStep* cons = std::get_if<ConsStep>(&t.edge_into(5).step);
    REQUIRE(cons);
    CHECK(cons->var->integer);
    for (const auto& g : t.nodes[5].goal)
        for (const auto& v : vars_of(g.atom))
            if (v->var_id == cons->var->var_id) CHECK(v->integer);

    // ancestor chain of N9's selected atom: N5, N1, N0
    CHECK(t.nodes[9].ancestor_of_selected == 5);
    CHECK(t.nodes[5].ancestor_of_selected == 1);
    CHECK(t.nodes[1].ancestor_of_selected == 0);
    CHECK(t.is_ancestor_node(5, 9));
    CHECK(t.is_ancestor_node(0, 9));
    CHECK_FALSE(t.is_ancestor_node(3, 9));
}

TEST_CASE("count_to input bindings on paths") {
    ModedTree t = tree_for(testing::kCountTo);
    CHECK(input_bindings_on_path(t, 0, 5).empty());
    CHECK(input_bindings_on_path(t, 5, 9).empty());
    CHECK(input_bindings_on_path(t, 9, 9).empty());
    // the base clause at N1 binds the query integer to 0
    auto to2 = input_bindings_on_path(t, 0, 2);
    REQUIRE(to2.size() == 1);
    CHECK(to2[0].first->integer);
    CHECK(to2[0].second->is_int());
    CHECK_THROWS_AS(input_bindings_on_path(t, 2, 3), std::invalid_argument);
}

TEST_CASE("eq_plus tree reproduces the published structure") {
    ModedTree t = tree_for(testing::kEqPlus);
    REQUIRE(t.nodes.size() == 10);

    CHECK(sel(t, 0) == "eq_plus(X1,X2,X3)");
    CHECK(sel(t, 3) == "eq_plus(X1,X1,0)");
    CHECK(sel(t, 6) == "eq_plus(X1,X1,0)");
    CHECK(term_equal(t.selected_atom(3), t.selected_atom(6)));

    // cuts at N6 (the recursive eq_plus clause) and N7 (the second plus clause)
    std::set<std::pair<int, int>> cuts(t.cut_points.begin(), t.cut_points.end());
    CHECK(cuts == std::set<std::pair<int, int>>{{6, 0}, {7, 3}});

    // input bindings to N3 narrow the query to eq_plus(I,I,0)
    auto bindings = input_bindings_on_path(t, 0, 3);
    REQUIRE(bindings.size() == 2);
    CHECK(bindings[0].first->name == "X2");
    CHECK(bindings[0].second->is_var());
    CHECK(bindings[1].first->name == "X3");
    CHECK(bindings[1].second->is_int());

    // N9 dies on the occurs check inside eq
    CHECK(t.nodes[9].leaf == LeafKind::Failed);
}

TEST_CASE("no applicable clause yields a two-node failed tree") {
    ModedTree t = tree_for("p :- q.\nq :- r(s).\n:- nt_query(p).");
    // p -> q -> r(s): r undefined, so the last node fails
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[2].leaf == LeafKind::Failed);
    ModedTree t2 = tree_for("p :- q.\n:- nt_query(p).");
    REQUIRE(t2.nodes.size() == 2);
    CHECK(t2.nodes[1].leaf == LeafKind::Failed);
}

TEST_CASE("unsupported built-in situations become dead leaves") {
    SUBCASE("is with a bound first argument") {
        ModedTree t = tree_for("p(X) :- X is 3, X is 4.\n:- nt_query(p(+int)).");
        bool found = false;
        for (const auto& n : t.nodes) found = found || n.leaf == LeafKind::Unsupported;
        CHECK(found);
    }
    SUBCASE("comparison over a non-integer term") {
        ModedTree t = tree_for("p(X) :- f(X) > 2.\n:- nt_query(p(-)).");
        CHECK(t.nodes[1].leaf == LeafKind::Unsupported);
    }
    SUBCASE("is over a plain input variable") {
        ModedTree t = tree_for("p(X) :- Y is X+1, q(Y).\nq(a).\n:- nt_query(p(+)).");
        CHECK(t.nodes[1].leaf == LeafKind::Unsupported);
    }
}

TEST_CASE("expanded variant relation") {
    TermPtr x = mk_var(0, "X", true);
    TermPtr y = mk_var(1, "Y", true);
    TermPtr z = mk_var(2, "Z");
    CHECK(expanded_variant(mk_compound("p", {x, z}), mk_compound("p", {y, mk_var(3, "W")})));
    // growth at the same position
    CHECK(expanded_variant(mk_compound("p", {x}), mk_compound("p", {mk_compound("s", {y})})));
    // non-injective renaming is not a variant
    CHECK_FALSE(expanded_variant(mk_compound("p", {x, y}), mk_compound("p", {y, y})));
    // label mismatch is not a variant
    CHECK_FALSE(expanded_variant(mk_compound("p", {x}), mk_compound("p", {z})));
    // instantiation is not growth
    CHECK_FALSE(expanded_variant(mk_compound("p", {x}), mk_compound("p", {mk_int(0)})));
    CHECK_FALSE(expanded_variant(mk_compound("p", {mk_int(0)}), mk_compound("p", {x})));
}

TEST_CASE("structure-growing recursion is cut") {
    ModedTree t = tree_for("p(X) :- p(f(X)).\n:- nt_query(p(+)).");
    REQUIRE(t.nodes.size() == 2);
    REQUIRE(t.cut_points.size() == 1);
    CHECK(t.cut_points[0].first == 1);
}

TEST_CASE("node cap bounds runaway trees") {
    BuildLimits limits;
    limits.node_cap = 50;
    limits.repetition = 1000;  // effectively disable the loop check
    ModedTree t = tree_for("p :- p, p.\n:- nt_query(p).", limits);
    CHECK(t.nodes.size() <= 50);
    CHECK(t.node_cap_hit);
}

TEST_CASE("run_concrete on count_to witnesses") {
    Program p = parse_program(testing::kCountTo);
    TermPtr l = mk_var(0, "L");
    auto mk_query = [&](long n) { return mk_compound("count_to", {mk_int(n), l}); };
    CHECK(run_concrete(p, mk_query(-1), 10000).budget_exceeded());
    CHECK(run_concrete(p, mk_query(1), 10000).failed());
    CHECK(run_concrete(p, mk_query(0), 10000).succeeded());
}

TEST_CASE("run_concrete details") {
    SUBCASE("non-ground arithmetic fails the branch") {
        Program p = parse_program("p(X) :- Y is Z+1, q(Y,X).\np(a).\nq(0,b).");
        ConcreteOutcome o = run_concrete(p, mk_compound("p", {mk_var(99, "W")}), 1000);
        CHECK(o.succeeded());  // backtracks into p(a)
        CHECK(o.arith_failures == 1);
    }
    SUBCASE("comparison semantics") {
        Program p = parse_program("p :- 1 > 0, 0 >= 0, 0 =< 1, 1 =:= 1, 1 =/= 2, 0 < 1.");
        CHECK(run_concrete(p, mk_atom("p"), 1000).succeeded());
        Program q = parse_program("p :- 0 > 0.");
        CHECK(run_concrete(q, mk_atom("p"), 1000).failed());
    }
    SUBCASE("budget exhaustion reports the budget") {
        Program p = parse_program("p :- p.");
        ConcreteOutcome o = run_concrete(p, mk_atom("p"), 100);
        CHECK(o.budget_exceeded());
        CHECK(o.budget == 100);
    }
}

namespace {

/// Independent textbook SLD enumeration used as an oracle: depth-first,
/// left-most, clause order, with its own small unifier.
struct PlainSld {
    const Program& prog;
    int next_id = 50000;
    std::vector<std::vector<TermPtr>> goals;  // preorder goals

    explicit PlainSld(const Program& p) : prog(p) {}

    static bool unify(TermPtr a, TermPtr b, std::unordered_map<int, TermPtr>& s) {
        std::function<TermPtr(TermPtr)> walk = [&](TermPtr t) {
            while (t->is_var() && s.count(t->var_id)) t = s[t->var_id];
            return t;
        };
        std::function<bool(int, TermPtr)> occ = [&](int v, TermPtr t) {
            t = walk(t);
            if (t->is_var()) return t->var_id == v;
            for (const auto& arg : t->args)
                if (occ(v, arg)) return true;
            return false;
        };
        a = walk(a);
        b = walk(b);
        if (a->is_var() && b->is_var() && a->var_id == b->var_id) return true;
        if (a->is_var() || b->is_var()) {
            TermPtr v = a->is_var() ? a : b;
            TermPtr t = a->is_var() ? b : a;
            if (occ(v->var_id, t)) return false;
            s[v->var_id] = t;
            return true;
        }
        if (a->is_int() || b->is_int()) return a->is_int() && b->is_int() && a->value == b->value;
        if (a->name != b->name || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!unify(a->args[i], b->args[i], s)) return false;
        return true;
    }

    static TermPtr resolve(TermPtr t, std::unordered_map<int, TermPtr>& s) {
        while (t->is_var() && s.count(t->var_id)) t = s[t->var_id];
        if (!t->is_compound()) return t;
        std::vector<TermPtr> args;
        for (const auto& a : t->args) args.push_back(resolve(a, s));
        return mk_compound(t->name, std::move(args));
    }

    void enumerate(const std::vector<TermPtr>& goal, int depth) {
        goals.push_back(goal);
        if (goal.empty() || depth > 40 || goals.size() > 150) return;
        for (int ci : prog.matching(goal.front()->name, goal.front()->arity())) {
            const Clause& c = prog.clauses[ci];
            std::unordered_map<int, TermPtr> renaming;
            VarGen gen(next_id);
            TermPtr head = gen.rename_apart(c.head, renaming);
            std::unordered_map<int, TermPtr> subst;
            if (!unify(goal.front(), head, subst)) continue;
            next_id += 100;
            std::vector<TermPtr> child;
            for (const auto& b : c.body) {
                std::unordered_map<int, TermPtr> r2 = renaming;
                child.push_back(resolve(gen.rename_apart(b, r2), subst));
                renaming = r2;
            }
            for (size_t i = 1; i < goal.size(); ++i) child.push_back(resolve(goal[i], subst));
            enumerate(child, depth + 1);
        }
    }
};

}  // namespace

TEST_CASE("label-free tree equals the plain SLD tree prefix") {
    // with labels absent and no builtins, clause steps are ordinary resolution;
    // disable the loop check and compare against an independent enumeration
    // up to variable renaming
    const char* progs[] = {
        "p(0).\np(s(X)) :- p(X).\nqq :- p(s(s(0))).",
        "app([],L,L).\napp([H|T],L,[H|R]) :- app(T,L,R).\nqq :- app([a,b],[c],R).",
        "t(l).\nt(n(L,R)) :- t(L), t(R).\nqq :- t(n(l,n(l,l))).",
    };
    auto alpha_equal = [](const TermPtr& a, const TermPtr& b) {
        std::unordered_map<int, int> fwd, rev;
        std::function<bool(const TermPtr&, const TermPtr&)> go = [&](const TermPtr& x,
                                                                     const TermPtr& y) {
            if (x->is_var() && y->is_var()) {
                auto f = fwd.find(x->var_id);
                if (f != fwd.end() && f->second != y->var_id) return false;
                auto r = rev.find(y->var_id);
                if (r != rev.end() && r->second != x->var_id) return false;
                fwd[x->var_id] = y->var_id;
                rev[y->var_id] = x->var_id;
                return true;
            }
            if (x->is_int() && y->is_int()) return x->value == y->value;
            if (!x->is_compound() || !y->is_compound() || x->name != y->name ||
                x->args.size() != y->args.size())
                return false;
            for (size_t i = 0; i < x->args.size(); ++i)
                if (!go(x->args[i], y->args[i])) return false;
            return true;
        };
        return go(a, b);
    };
    for (const char* src : progs) {
        CAPTURE(src);
        ParsedFile f = parse_file(src);
        // the qq helper clause carries the concrete query atom
        TermPtr query_atom = f.program.clauses.back().body.front();
        f.program.clauses.pop_back();
        ModedQuery q;
        q.atom = query_atom;
        BuildLimits limits;
        limits.node_cap = 160;
        limits.repetition = 1000;  // no cuts: the trees below are finite anyway
        ModedTree t = build_tree(f.program, q, limits);
        REQUIRE_FALSE(t.node_cap_hit);
        for (const auto& e : t.edges) CHECK(std::holds_alternative<ClauseStep>(e.step));

        PlainSld oracle(f.program);
        oracle.enumerate({query_atom}, 0);
        REQUIRE(oracle.goals.size() == t.nodes.size());
        for (size_t i = 0; i < t.nodes.size(); ++i) {
            const auto& mine = t.nodes[i].goal;
            const auto& ref = oracle.goals[i];
            REQUIRE(mine.size() == ref.size());
            // compare whole goals under one renaming per node
            std::vector<TermPtr> ma, ra;
            for (const auto& g : mine) ma.push_back(g.atom);
            for (const auto& g : ref) ra.push_back(g);
            CHECK(alpha_equal(mk_compound("g", std::move(ma)), mk_compound("g", std::move(ra))));
        }
    }
}

TEST_CASE("goal suffix bookkeeping matches the ancestor relation") {
    for (const char* src : {testing::kCountTo, testing::kEqPlus, testing::kConstants}) {
        ModedTree t = tree_for(src);
        for (const auto& node : t.nodes) {
            if (node.goal.empty() || !node.ancestor_of_selected) continue;
            int b = *node.ancestor_of_selected;
            size_t frame = t.nodes[b].goal.size();
            for (int m : t.path(b, node.id)) {
                if (m == b) continue;
                CHECK(t.nodes[m].goal.size() >= frame);
            }
        }
    }
}

TEST_CASE("fuzzed programs never escape the node cap") {
    std::mt19937 rng(2026);
    std::uniform_int_distribution<int> nclauses(1, 5), nbody(0, 3), narity(0, 2), pick(0, 5);
    for (int it = 0; it < 200; ++it) {
        std::ostringstream src;
        int preds = 3;
        auto atom = [&](int i) {
            int pr = pick(rng) % preds;
            int ar = narity(rng);
            std::string s = "p" + std::to_string(pr);
            (void)i;
            if (ar > 0) {
                s += "(";
                for (int a = 0; a < ar; ++a) {
                    if (a) s += ",";
                    switch (pick(rng)) {
                        case 0: s += "X"; break;
                        case 1: s += "Y"; break;
                        case 2: s += "a"; break;
                        case 3: s += "f(X)"; break;
                        case 4: s += std::to_string(pick(rng)); break;
                        default: s += "Z"; break;
                    }
                }
                s += ")";
            }
            return s;
        };
        int nc = nclauses(rng);
        for (int c = 0; c < nc; ++c) {
            src << atom(c);
            int nb = nbody(rng);
            if (nb > 0) {
                src << " :- ";
                for (int b = 0; b < nb; ++b) {
                    if (b) src << ", ";
                    src << atom(c);
                }
            }
            src << ".\n";
        }
        Program prog;
        try {
            prog = parse_program(src.str());
        } catch (const ParseError&) {
            continue;  // head happened to be a plain constant like "a"
        }
        if (prog.clauses.empty()) continue;
        const Clause& first = prog.clauses[0];
        ModedQuery q;
        q.atom = first.head;
        BuildLimits limits;
        limits.node_cap = 2000;
        ModedTree t = build_tree(prog, q, limits);
        CHECK(t.nodes.size() <= 2000);
    }
}

TEST_CASE("tree dumps") {
    ModedTree t = tree_for(testing::kCountTo);
    std::string dot = tree_to_dot(t);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("cut: clause 3") != std::string::npos);
    std::string js = tree_to_json(t);
    auto parsed = nlohmann::json::parse(js);
    CHECK(parsed["nodes"].size() == 11);
    CHECK(parsed["cut_points"][0]["node"] == 9);
}
