#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "looper/constraints.hpp"
#include "looper/parser.hpp"

using namespace looper;

namespace {

struct Pipeline {
    ParsedFile file;
    ModedTree tree;
    std::vector<LoopCandidate> cands;
    Pipeline(const char* src) {
        file = parse_file(src);
        tree = build_tree(file.program, file.queries[0]);
        cands = find_candidates(tree, file.queries[0]);
        REQUIRE(!cands.empty());
    }
    ConstraintBuilder builder() { return {tree, file.queries[0], cands[0]}; }
};

TermPtr cond_at(const ModedTree& t, int node) {
    for (int child : t.nodes[node].children) {
        const Edge& e = t.edge_into(child);
        if (const auto* c = std::get_if<CondStep>(&e.step)) return c->condition;
    }
    REQUIRE(false);
    return nullptr;
}

}  // namespace

TEST_CASE("apply_cons on the count_to paths") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    TermPtr cond3 = cond_at(p.tree, 3);  // 0 > N
    TermPtr cond7 = cond_at(p.tree, 7);  // M1 > N

    CHECK(term_equal(b.apply_cons(cond3, 0, 3), cond3));
    // expressed over the query integer: M1 becomes 0+1
    TermPtr r = b.apply_cons(cond7, 0, 7);
    CHECK(term_to_string(r) == "0+1 > X1");
    // within the loop scope M1 stays
    CHECK(term_equal(b.apply_cons(cond7, 5, 7), cond7));
    // idempotent once no in-scope constructor variable remains
    CHECK(term_equal(b.apply_cons(r, 0, 7), r));
}

TEST_CASE("replace maps loop variables to next-iteration subterms") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    TermPtr cond7 = cond_at(p.tree, 7);
    TermPtr a5 = p.tree.selected_atom(5);
    TermPtr a9 = p.tree.selected_atom(9);

    std::vector<TermPtr> replaced = b.replace({cond7}, 5, 9);
    REQUIRE(replaced.size() == 1);
    // M1 (first argument of A5) has been replaced by A9's first argument
    TermPtr expected = mk_compound(">", {a9->args[0], a9->args[1]});
    CHECK(term_equal(replaced[0], expected));

    // identity over identical atoms
    std::vector<TermPtr> same = b.replace({cond7}, 5, 5);
    CHECK(term_equal(same[0], cond7));

    // then apply_cons expresses it over the previous iteration
    TermPtr conclusion = b.apply_cons(replaced[0], 5, 9);
    TermPtr m1 = a5->args[0];
    TermPtr expected2 =
        mk_compound(">", {mk_compound("+", {m1, mk_int(1)}), a5->args[1]});
    CHECK(term_equal(conclusion, expected2));
}

TEST_CASE("reachability for the three programs") {
    {
        Pipeline p(testing::kCountTo);
        ConstraintBuilder b = p.builder();
        auto conds = b.reachability();
        REQUIRE(conds.size() == 2);
        CHECK(cond_to_string(conds[0], b.symbols()) == "0 > n1");
        CHECK(cond_to_string(conds[1], b.symbols()) == "0+1 > n1");
    }
    {
        Pipeline p(testing::kConstants);
        ConstraintBuilder b = p.builder();
        auto conds = b.reachability();
        REQUIRE(conds.size() == 1);
        CHECK(cond_to_string(conds[0], b.symbols()) == "n1 =:= 2");
    }
    {
        Pipeline p(testing::kEqPlus);
        ConstraintBuilder b = p.builder();
        CHECK(b.reachability().empty());
    }
}

TEST_CASE("build_implication for count_to") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    Implication imp = b.build_implication();
    REQUIRE(imp.quantified.size() == 2);
    REQUIRE(imp.premises.size() == 1);
    REQUIRE(imp.conclusions.size() == 1);
    const SymbolTable& syms = b.symbols();
    CHECK(cond_to_string(imp.premises[0], syms) == "M1 > X1");
    CHECK(cond_to_string(imp.conclusions[0], syms) == "M1+1 > X1");
}

TEST_CASE("build_implication for constants matches the published system") {
    Pipeline p(testing::kConstants);
    ConstraintBuilder b = p.builder();
    Implication imp = b.build_implication();
    const SymbolTable& syms = b.symbols();
    REQUIRE(imp.premises.size() == 1);
    CHECK(cond_to_string(imp.premises[0], syms) == "X1 =:= 2");
    REQUIRE(imp.conclusions.size() == 1);
    CHECK(cond_to_string(imp.conclusions[0], syms) == "X2*2 =:= 2");
}

TEST_CASE("pure-logic loops yield an empty implication") {
    Pipeline p(testing::kEqPlus);
    ConstraintBuilder b = p.builder();
    Implication imp = b.build_implication();
    CHECK(imp.quantified.empty());
    CHECK(imp.premises.empty());
    CHECK(imp.conclusions.empty());
    SymbolicSystem sys = b.add_domain_symbols(imp);
    CHECK(sys.domains.empty());
    CHECK(sys.linking.empty());
}

TEST_CASE("add_domain_symbols") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    SymbolicSystem sys = b.add_domain_symbols(b.build_implication());
    const SymbolTable& syms = b.symbols();

    REQUIRE(sys.domains.size() == 2);
    // one loop condition plus one domain premise per integer variable
    CHECK(sys.implication.premises.size() == 3);
    // one loop conclusion plus a domain and a singleton guard per variable
    CHECK(sys.implication.conclusions.size() == 5);
    REQUIRE(sys.linking.size() == 2);
    CHECK(syms.name(sys.linking[0].first) == "c_M1");
    CHECK(ie_to_string(sys.linking[0].second, syms) == "0+1");
    CHECK(syms.name(sys.linking[1].first) == "c_X1");
    CHECK(ie_to_string(sys.linking[1].second, syms) == "n1");

    CHECK(cond_to_string(sys.implication.premises[1], syms) == "d_M1*M1 >= d_M1*c_M1");
    CHECK(cond_to_string(sys.implication.conclusions[1], syms) ==
          "d_M1*(M1+1) >= d_M1*c_M1");
    CHECK(cond_to_string(sys.implication.conclusions[2], syms) ==
          "(1-d_M1*d_M1)*(M1+1) =:= (1-d_M1*d_M1)*c_M1");
}

TEST_CASE("to_natural_form substitutes domain expressions") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    SymbolicSystem sys = b.add_domain_symbols(b.build_implication());
    SymbolicSystem nat = b.to_natural_form(sys);
    const SymbolTable& syms = b.symbols();

    // the domain premise d*I >= d*c collapses to d^2 * N >= 0
    const IntCondition& dom = nat.implication.premises[1];
    Polynomial diff = Polynomial::from_expr(dom.lhs) - Polynomial::from_expr(dom.rhs);
    int d = sys.domains[0].second;
    int n_m1 = syms.find("N_M1");
    REQUIRE(n_m1 >= 0);
    Polynomial expected =
        Polynomial::symbol(d) * Polynomial::symbol(d) * Polynomial::symbol(n_m1);
    CHECK(diff == expected);

    // sampling agreement at 100 random points
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> small(-10, 10), nat_val(0, 20);
    for (int it = 0; it < 100; ++it) {
        std::map<int, mpz_class> point;
        for (int s = 0; s < syms.size(); ++s)
            point[s] = syms.kind(s) == SymKind::QuantNat ? nat_val(rng) : small(rng);
        CHECK(diff.eval(point) == Polynomial::from_expr(dom.lhs).eval(point) -
                                      Polynomial::from_expr(dom.rhs).eval(point));
    }

    // quantifiers now range over the naturals
    for (int q : nat.implication.quantified) CHECK(syms.kind(q) == SymKind::QuantNat);
}

TEST_CASE("strict comparisons convert with unit offsets") {
    SymbolTable syms;
    int x = syms.add(SymKind::QuantNat, "x");
    int y = syms.add(SymKind::QuantNat, "y");
    IntExprPtr ex = ie_sym(x), ey = ie_sym(y);
    Polynomial px = Polynomial::symbol(x), py = Polynomial::symbol(y);
    Polynomial one = Polynomial::constant(1);

    auto pairs = condition_to_geq_pairs({ex, CmpOp::Gt, ey});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == px);
    CHECK(pairs[0].second == py + one);

    pairs = condition_to_geq_pairs({ex, CmpOp::Eq, ey});
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first - pairs[0].second == px - py);
    CHECK(pairs[1].first - pairs[1].second == py - px);

    pairs = condition_to_geq_pairs({ex, CmpOp::Le, ey});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == py);

    pairs = condition_to_geq_pairs({ex, CmpOp::Lt, ey});
    CHECK(pairs[0].second == px + one);
}

TEST_CASE("conversion preserves integer semantics on random instances") {
    SymbolTable syms;
    int x = syms.add(SymKind::QuantInt, "x");
    int y = syms.add(SymKind::QuantInt, "y");
    std::mt19937 rng(9);
    std::uniform_int_distribution<int> val(-50, 50), op_pick(0, 4);
    CmpOp ops[] = {CmpOp::Gt, CmpOp::Ge, CmpOp::Le, CmpOp::Lt, CmpOp::Eq};
    for (int it = 0; it < 300; ++it) {
        CmpOp op = ops[op_pick(rng)];
        IntCondition cond{ie_add(ie_sym(x), ie_const(val(rng))), op,
                          ie_mul(ie_const(2), ie_sym(y))};
        auto pairs = condition_to_geq_pairs(cond);
        std::map<int, mpz_class> point{{x, val(rng)}, {y, val(rng)}};
        bool direct = cmp_eval(op, ie_eval(cond.lhs, point), ie_eval(cond.rhs, point));
        bool via_pairs = true;
        for (const auto& [l, r] : pairs) via_pairs = via_pairs && l.eval(point) >= r.eval(point);
        CHECK(direct == via_pairs);
    }
}

TEST_CASE("normalize yields one implication per conclusion") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    SymbolicSystem nat = b.to_natural_form(b.add_domain_symbols(b.build_implication()));
    auto branches = b.normalize(nat);
    REQUIRE(branches.size() == 1);  // no disequalities
    // conclusions: loop condition (1) + two domains (2) + two guards as =:= (2*2)
    CHECK(branches[0].implications.size() == 7);
    // premises: condition (1) + two domains (2), shared by every implication
    for (const auto& ni : branches[0].implications) CHECK(ni.premises.size() == 3);
}

TEST_CASE("disequalities split into two consistent branches") {
    Pipeline p("m(X) :- X =/= 4, Y is X+1, m(Y).\n:- nt_query(m(+int)).");
    ConstraintBuilder b = p.builder();
    SymbolicSystem nat = b.to_natural_form(b.add_domain_symbols(b.build_implication()));
    auto branches = b.normalize(nat);
    // premise, conclusion and reachability copies of one disequality flip together
    REQUIRE(branches.size() == 2);
    CHECK(branches[0].label == "=/= as >");
    CHECK(branches[1].label == "=/= as <");
    for (const auto& ni : branches[0].implications) CHECK(ni.premises.size() == 2);
}

TEST_CASE("apply_prop3 on a hand-checked implication") {
    SymbolTable syms;
    // stand-alone builder needs a candidate; reuse count_to's and add fresh syms
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    int x = b.symbols().add(SymKind::QuantNat, "x");
    int y = b.symbols().add(SymKind::QuantNat, "y");
    Polynomial px = Polynomial::symbol(x), py = Polynomial::symbol(y);
    Polynomial one = Polynomial::constant(1);

    NormalizedImplication ni;
    ni.premises = {{px, py}};                 // x >= y
    ni.conclusion = {px + one, py};           // x + 1 >= y
    std::vector<int> tsyms;
    Polynomial r = b.apply_prop3(ni, PremTemplate::Linear, tsyms);
    REQUIRE(tsyms.size() == 1);
    Polynomial a = Polynomial::symbol(tsyms[0]);
    // (1 - a)x + (a - 1)y + 1
    CHECK(r == (one - a) * px + (a - one) * py + one);

    auto cons = b.absolute_positiveness(r);
    REQUIRE(cons.size() == 3);
    bool has_one = false, has_a_minus_1 = false, has_1_minus_a = false;
    for (const auto& c : cons) {
        CHECK_FALSE(c.equality);
        if (c.poly == one) has_one = true;
        if (c.poly == a - one) has_a_minus_1 = true;
        if (c.poly == one - a) has_1_minus_a = true;
    }
    CHECK(has_one);
    CHECK(has_a_minus_1);
    CHECK(has_1_minus_a);

    // zero premises leave the conclusion difference
    NormalizedImplication n0;
    n0.conclusion = {px, py + one};
    std::vector<int> t0;
    CHECK(b.apply_prop3(n0, PremTemplate::Linear, t0) == px - py - one);
    CHECK(t0.empty());

    // the max2 class adds one pairwise weight
    std::vector<int> t2;
    Polynomial r2 = b.apply_prop3(ni, PremTemplate::Max2, t2);
    REQUIRE(t2.size() == 2);
    Polynomial bb = Polynomial::symbol(t2[1]);
    CHECK(r2 == (one - a.substitute(tsyms[0], Polynomial::symbol(t2[0]))) * px +
                    (Polynomial::symbol(t2[0]) - one) * py + one -
                    bb * (px * px - py * py));
}

TEST_CASE("constant polynomial positivity") {
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    auto cons = b.absolute_positiveness(Polynomial::constant(5));
    REQUIRE(cons.size() == 1);
    CHECK(cons[0].poly == Polynomial::constant(5));
}

TEST_CASE("count_to admits the unit premise weight") {
    // exhaustive confirmation that a = (1,0,0) satisfies the main implication
    Pipeline p(testing::kCountTo);
    ConstraintBuilder b = p.builder();
    CandidateSystem cs = b.build(PremTemplate::Linear);
    REQUIRE(cs.branches.size() == 1);
    REQUIRE(!cs.branches[0].implications.empty());

    // rebuild the first implication's polynomial with fresh weights
    std::vector<int> tsyms;
    Polynomial r = b.apply_prop3(cs.branches[0].implications[0], PremTemplate::Linear, tsyms);
    REQUIRE(tsyms.size() == 3);
    auto cons = b.absolute_positiveness(r);

    const SymbolTable& syms = b.symbols();
    std::map<int, mpz_class> base;
    base[syms.find("c_M1")] = 1;
    base[syms.find("c_X1")] = -1;
    base[syms.find("d_M1")] = 1;
    base[syms.find("d_X1")] = 0;
    base[syms.find("n1")] = -1;

    int solutions = 0;
    bool unit_works = false;
    for (int a1 = 0; a1 <= 7; ++a1)
        for (int a2 = 0; a2 <= 7; ++a2)
            for (int a3 = 0; a3 <= 7; ++a3) {
                std::map<int, mpz_class> point = base;
                point[tsyms[0]] = a1;
                point[tsyms[1]] = a2;
                point[tsyms[2]] = a3;
                bool ok = true;
                for (const auto& c : cons) ok = ok && c.poly.eval(point) >= 0;
                if (ok) {
                    ++solutions;
                    if (a1 == 1 && a2 == 0 && a3 == 0) unit_works = true;
                }
            }
    CHECK(solutions > 0);
    CHECK(unit_works);
}

TEST_CASE("diophantine systems house no stray symbols") {
    for (const char* src : {testing::kCountTo, testing::kConstants, testing::kEqPlus}) {
        Pipeline p(src);
        ConstraintBuilder b = p.builder();
        CandidateSystem cs = b.build(PremTemplate::Linear);
        for (const auto& br : cs.branches)
            for (const auto& c : br.dioph.constraints)
                for (int s : c.poly.symbols()) {
                    SymKind k = cs.syms.kind(s);
                    CHECK(k != SymKind::QuantInt);
                    CHECK(k != SymKind::QuantNat);
                }
    }
}

TEST_CASE("every symbolic coefficient is typed") {
    Pipeline p(testing::kConstants);
    ConstraintBuilder b = p.builder();
    CandidateSystem cs = b.build(PremTemplate::Linear);
    for (const auto& br : cs.branches)
        for (const auto& c : br.dioph.constraints)
            for (int s : c.poly.symbols()) {
                SymKind k = cs.syms.kind(s);
                bool housed = k == SymKind::QueryInt || k == SymKind::DomainBase ||
                              k == SymKind::DomainDir || k == SymKind::Template;
                CHECK(housed);
            }
}
