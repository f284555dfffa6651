#include "looper/constraints.hpp"

#include <algorithm>

namespace looper {

std::string to_string(PremTemplate t) { return t == PremTemplate::Linear ? "linear" : "max2"; }

ConstraintBuilder::ConstraintBuilder(const ModedTree& tree, const ModedQuery& query,
                                     const LoopCandidate& cand)
    : tree_(tree), query_(query), cand_(cand) {
    int n = 0;
    for (const auto& v : vars_of(query.atom)) {
        if (!v->integer) continue;
        int sym = syms_.add(SymKind::QueryInt, "n" + std::to_string(++n), v->var_id);
        query_syms_.push_back(sym);
        query_sym_of_var_[v->var_id] = sym;
    }
    const TermPtr& begin_atom = tree_.selected_atom(cand_.begin);
    for (const auto& v : vars_of(begin_atom)) {
        if (!v->integer) continue;
        int sym = syms_.add(SymKind::QuantInt, v->name, v->var_id);
        quant_vars_.push_back(v);
        quant_sym_of_var_[v->var_id] = sym;
    }
}

TermPtr ConstraintBuilder::apply_cons(const TermPtr& c, int ni, int nj) const {
    Subst defs;
    std::vector<int> nodes = tree_.path(ni, nj);
    for (int node : nodes) {
        if (node == ni) continue;
        const Edge& e = tree_.edge_into(node);
        if (const auto* cons = std::get_if<ConsStep>(&e.step))
            defs.bind(cons->var->var_id, cons->expr);
    }
    // a constructor selected at nj itself defines within the range too
    for (int child : tree_.nodes[nj].children) {
        const Edge& e = tree_.edge_into(child);
        if (const auto* cons = std::get_if<ConsStep>(&e.step))
            defs.bind(cons->var->var_id, cons->expr);
    }
    if (defs.empty()) return c;
    TermPtr cur = c;
    for (int guard = 0; guard < 10000; ++guard) {
        TermPtr next = defs.apply(cur);
        if (term_equal(next, cur)) return cur;
        cur = next;
    }
    throw UnsupportedCandidate("constructor substitution did not terminate");
}

std::vector<TermPtr> ConstraintBuilder::replace(const std::vector<TermPtr>& conds, int ni,
                                                int nj) const {
    const TermPtr& ai = tree_.selected_atom(ni);
    const TermPtr& aj = tree_.selected_atom(nj);
    std::map<int, TermPtr> mapping;
    bool consistent = true;
    for_each_position(ai, [&](const Position& pos, const TermPtr& t) {
        if (!consistent || !t->is_var() || !t->integer) return;
        auto sub = subterm(pos, aj);
        if (!sub) {
            consistent = false;
            return;
        }
        auto it = mapping.find(t->var_id);
        if (it == mapping.end()) {
            mapping.emplace(t->var_id, *sub);
        } else if (!term_equal(it->second, *sub)) {
            consistent = false;
        }
    });
    if (!consistent) throw UnsupportedCandidate("position mismatch in loop variable replacement");
    Subst s;
    for (const auto& [vid, t] : mapping) s.bind(vid, t);
    std::vector<TermPtr> out;
    out.reserve(conds.size());
    for (const auto& c : conds) out.push_back(s.apply(c));
    return out;
}

IntExprPtr ConstraintBuilder::to_expr(const TermPtr& t, const std::map<int, int>& var_syms) const {
    switch (t->kind) {
        case TermKind::Int:
            return ie_const(t->value);
        case TermKind::Var: {
            auto it = var_syms.find(t->var_id);
            if (it == var_syms.end())
                throw UnsupportedCandidate("integer variable " + t->name +
                                           " escapes the loop atom");
            return ie_sym(it->second);
        }
        case TermKind::Compound:
            if (t->name == "-" && t->arity() == 1) return ie_neg(to_expr(t->args[0], var_syms));
            if (t->arity() == 2) {
                auto a = to_expr(t->args[0], var_syms);
                auto b = to_expr(t->args[1], var_syms);
                if (t->name == "+") return ie_add(a, b);
                if (t->name == "-") return ie_sub(a, b);
                if (t->name == "*") return ie_mul(a, b);
            }
            throw UnsupportedCandidate("not an integer expression: " + term_to_string(t));
    }
    throw UnsupportedCandidate("not an integer expression");
}

IntCondition ConstraintBuilder::to_condition(const TermPtr& t,
                                             const std::map<int, int>& var_syms) const {
    if (!t->is_compound() || t->arity() != 2 || !is_comparison_functor(t->name))
        throw UnsupportedCandidate("not an integer condition: " + term_to_string(t));
    return {to_expr(t->args[0], var_syms), cmp_from_functor(t->name),
            to_expr(t->args[1], var_syms)};
}

namespace {

TermPtr condition_of(const ModedTree& tree, int cond_node) {
    for (int child : tree.nodes[cond_node].children) {
        const Edge& e = tree.edge_into(child);
        if (const auto* cond = std::get_if<CondStep>(&e.step)) return cond->condition;
    }
    throw std::logic_error("node carries no condition");
}

}  // namespace

std::vector<IntCondition> ConstraintBuilder::reachability() {
    std::vector<int> nodes = cand_.cond_nodes_prefix;
    nodes.insert(nodes.end(), cand_.cond_nodes_loop.begin(), cand_.cond_nodes_loop.end());
    std::sort(nodes.begin(), nodes.end());
    std::vector<IntCondition> out;
    for (int node : nodes) {
        TermPtr cond = apply_cons(condition_of(tree_, node), 0, node);
        out.push_back(to_condition(cond, query_sym_of_var_));
    }
    return out;
}

Implication ConstraintBuilder::build_implication() {
    Implication imp;
    for (const auto& v : quant_vars_) imp.quantified.push_back(quant_sym_of_var_.at(v->var_id));
    std::vector<TermPtr> premise_terms;
    for (int node : cand_.cond_nodes_loop)
        premise_terms.push_back(apply_cons(condition_of(tree_, node), cand_.begin, node));
    std::vector<TermPtr> conclusion_terms = replace(premise_terms, cand_.begin, cand_.end);
    for (auto& c : conclusion_terms) c = apply_cons(c, cand_.begin, cand_.end);
    for (const auto& t : premise_terms) imp.premises.push_back(to_condition(t, quant_sym_of_var_));
    for (const auto& t : conclusion_terms)
        imp.conclusions.push_back(to_condition(t, quant_sym_of_var_));
    return imp;
}

IntExprPtr ConstraintBuilder::next_iteration_expr(const TermPtr& var) {
    std::vector<TermPtr> replaced = replace({var}, cand_.begin, cand_.end);
    TermPtr expanded = apply_cons(replaced.front(), cand_.begin, cand_.end);
    return to_expr(expanded, quant_sym_of_var_);
}

IntExprPtr ConstraintBuilder::root_expr(const TermPtr& var) const {
    TermPtr expanded = apply_cons(var, 0, cand_.begin);
    return to_expr(expanded, query_sym_of_var_);
}

SymbolicSystem ConstraintBuilder::add_domain_symbols(const Implication& imp) {
    SymbolicSystem sys;
    sys.reachability = reachability();
    sys.implication = imp;
    for (const auto& v : quant_vars_) {
        int i_sym = quant_sym_of_var_.at(v->var_id);
        int c_sym = syms_.add(SymKind::DomainBase, "c_" + v->name);
        int d_sym = syms_.add(SymKind::DomainDir, "d_" + v->name);
        sys.domains.emplace_back(c_sym, d_sym);

        IntExprPtr i_expr = ie_sym(i_sym);
        IntExprPtr c_expr = ie_sym(c_sym);
        IntExprPtr d_expr = ie_sym(d_sym);
        // d_I * I >= d_I * c_I keeps I inside the half-open domain
        sys.implication.premises.push_back(
            {ie_mul(d_expr, i_expr), CmpOp::Ge, ie_mul(d_expr, c_expr)});
        IntExprPtr next = next_iteration_expr(v);
        sys.implication.conclusions.push_back(
            {ie_mul(d_expr, next), CmpOp::Ge, ie_mul(d_expr, c_expr)});
        // (1 - d_I^2) * I' = (1 - d_I^2) * c_I pins singleton domains
        IntExprPtr one_minus_d2 = ie_sub(ie_const(1), ie_mul(d_expr, d_expr));
        sys.implication.conclusions.push_back(
            {ie_mul(one_minus_d2, next), CmpOp::Eq, ie_mul(one_minus_d2, c_expr)});
        sys.linking.emplace_back(c_sym, root_expr(v));
    }
    return sys;
}

SymbolicSystem ConstraintBuilder::to_natural_form(const SymbolicSystem& sys) {
    std::map<int, IntExprPtr> map;
    std::vector<int> nat_quant;
    for (size_t i = 0; i < quant_vars_.size(); ++i) {
        const auto& v = quant_vars_[i];
        int i_sym = quant_sym_of_var_.at(v->var_id);
        int nat;
        auto it = nat_of_quant_.find(i_sym);
        if (it != nat_of_quant_.end()) {
            nat = it->second;
        } else {
            nat = syms_.add(SymKind::QuantNat, "N_" + v->name);
            nat_of_quant_[i_sym] = nat;
            nat_syms_.push_back(nat);
        }
        nat_quant.push_back(nat);
        int c_sym = sys.domains[i].first;
        int d_sym = sys.domains[i].second;
        map[i_sym] = ie_add(ie_sym(c_sym), ie_mul(ie_sym(d_sym), ie_sym(nat)));
    }
    SymbolicSystem out = sys;
    out.implication.quantified = nat_quant;
    for (auto& p : out.implication.premises) p = {ie_subst(p.lhs, map), p.op, ie_subst(p.rhs, map)};
    for (auto& c : out.implication.conclusions)
        c = {ie_subst(c.lhs, map), c.op, ie_subst(c.rhs, map)};
    return out;
}

std::vector<std::pair<Polynomial, Polynomial>> condition_to_geq_pairs(const IntCondition& c) {
    Polynomial l = Polynomial::from_expr(c.lhs);
    Polynomial r = Polynomial::from_expr(c.rhs);
    Polynomial one = Polynomial::constant(1);
    switch (c.op) {
        case CmpOp::Ge: return {{l, r}};
        case CmpOp::Gt: return {{l, r + one}};
        case CmpOp::Le: return {{r, l}};
        case CmpOp::Lt: return {{r, l + one}};
        case CmpOp::Eq: return {{l, r}, {r, l}};
        case CmpOp::Ne: throw std::logic_error("disequality must be branched before normalizing");
    }
    return {};
}

std::vector<NormalizedBranch> ConstraintBuilder::normalize(const SymbolicSystem& sys) {
    // One case split per disequality-carrying condition node. The premise,
    // its transformed conclusion and its reachability copy flip together:
    // a strengthened premise is only re-established by the equally
    // strengthened conclusion.
    std::vector<int> reach_nodes = cand_.cond_nodes_prefix;
    reach_nodes.insert(reach_nodes.end(), cand_.cond_nodes_loop.begin(),
                       cand_.cond_nodes_loop.end());
    std::sort(reach_nodes.begin(), reach_nodes.end());

    struct Split {
        std::vector<size_t> reach;   // indices into reachability
        std::vector<size_t> prem;    // indices into premises
        std::vector<size_t> concl;   // indices into conclusions
    };
    std::map<int, Split> by_node;
    size_t n_loop = cand_.cond_nodes_loop.size();
    for (size_t i = 0; i < sys.reachability.size() && i < reach_nodes.size(); ++i)
        if (sys.reachability[i].op == CmpOp::Ne) by_node[reach_nodes[i]].reach.push_back(i);
    for (size_t k = 0; k < n_loop && k < sys.implication.premises.size(); ++k) {
        if (sys.implication.premises[k].op == CmpOp::Ne)
            by_node[cand_.cond_nodes_loop[k]].prem.push_back(k);
        if (k < sys.implication.conclusions.size() &&
            sys.implication.conclusions[k].op == CmpOp::Ne)
            by_node[cand_.cond_nodes_loop[k]].concl.push_back(k);
    }
    std::vector<Split> splits;
    for (auto& [node, split] : by_node) {
        (void)node;
        splits.push_back(split);
    }
    if (splits.size() > 4) throw UnsupportedCandidate("too many disequality case splits");

    std::vector<NormalizedBranch> out;
    for (unsigned mask = 0; mask < (1u << splits.size()); ++mask) {
        SymbolicSystem branch = sys;
        std::string label;
        for (size_t k = 0; k < splits.size(); ++k) {
            CmpOp op = (mask >> k) & 1 ? CmpOp::Lt : CmpOp::Gt;
            for (size_t i : splits[k].reach) branch.reachability[i].op = op;
            for (size_t i : splits[k].prem) branch.implication.premises[i].op = op;
            for (size_t i : splits[k].concl) branch.implication.conclusions[i].op = op;
            if (!label.empty()) label += ", ";
            label += "=/= as " + cmp_to_string(op);
        }
        NormalizedBranch nb;
        nb.label = label;
        nb.reachability = branch.reachability;
        std::vector<std::pair<Polynomial, Polynomial>> premises;
        for (const auto& p : branch.implication.premises)
            for (auto& pair : condition_to_geq_pairs(p)) premises.push_back(std::move(pair));
        for (const auto& c : branch.implication.conclusions) {
            for (auto& pair : condition_to_geq_pairs(c)) {
                NormalizedImplication ni;
                ni.premises = premises;
                ni.conclusion = std::move(pair);
                nb.implications.push_back(std::move(ni));
            }
        }
        out.push_back(std::move(nb));
    }
    return out;
}

Polynomial ConstraintBuilder::apply_prop3(const NormalizedImplication& imp, PremTemplate prem,
                                          std::vector<int>& template_syms_out) {
    size_t n = imp.premises.size();
    Polynomial result = imp.conclusion.first - imp.conclusion.second;
    // a weighted sum of each premise; the constant weight cancels out
    std::vector<int> weights;
    for (size_t i = 0; i < n; ++i) {
        int a = syms_.add(SymKind::Template, "a" + std::to_string(++template_count_));
        weights.push_back(a);
        template_syms_out.push_back(a);
        Polynomial diff = imp.premises[i].first - imp.premises[i].second;
        result = result - Polynomial::symbol(a) * diff;
    }
    if (prem == PremTemplate::Max2) {
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i; j < n; ++j) {
                int b = syms_.add(SymKind::Template, "b" + std::to_string(++template_count_));
                template_syms_out.push_back(b);
                Polynomial pp = imp.premises[i].first * imp.premises[j].first;
                Polynomial qq = imp.premises[i].second * imp.premises[j].second;
                result = result - Polynomial::symbol(b) * (pp - qq);
            }
        }
    }
    return result;
}

std::vector<DiophConstraint> ConstraintBuilder::absolute_positiveness(const Polynomial& p) const {
    std::vector<int> quantified;
    for (int s = 0; s < syms_.size(); ++s)
        if (syms_.is_quantified(s)) quantified.push_back(s);
    std::vector<DiophConstraint> out;
    for (const auto& [mono, coeff] : p.coefficients_in(quantified)) {
        (void)mono;
        out.push_back({coeff, false});
    }
    return out;
}

CandidateSystem ConstraintBuilder::build(PremTemplate prem) {
    CandidateSystem cs;
    Implication imp = build_implication();
    cs.symbolic = add_domain_symbols(imp);
    cs.natural = to_natural_form(cs.symbolic);
    std::vector<NormalizedBranch> branches = normalize(cs.natural);
    for (const auto& nb : branches) {
        CandidateSystem::Branch br;
        br.label = nb.label;
        br.implications = nb.implications;
        DiophantineSystem ds;
        ds.branch = nb.label;
        for (const auto& cond : nb.reachability)
            for (const auto& [l, r] : condition_to_geq_pairs(cond)) ds.constraints.push_back({l - r, false});
        for (const auto& [c_sym, expr] : cs.natural.linking)
            ds.constraints.push_back(
                {Polynomial::symbol(c_sym) - Polynomial::from_expr(expr), true});
        for (const auto& [c_sym, d_sym] : cs.natural.domains) {
            (void)c_sym;
            Polynomial d = Polynomial::symbol(d_sym);
            Polynomial one = Polynomial::constant(1);
            ds.constraints.push_back({one - d, false});  // d <= 1
            ds.constraints.push_back({d + one, false});  // d >= -1
        }
        for (const auto& ni : nb.implications) {
            Polynomial p = apply_prop3(ni, prem, br.template_syms);
            for (auto& c : absolute_positiveness(p)) ds.constraints.push_back(std::move(c));
        }
        for (int t : br.template_syms)
            ds.constraints.push_back({Polynomial::symbol(t), false});  // natural coefficients
        br.dioph = std::move(ds);
        cs.branches.push_back(std::move(br));
    }
    for (const auto& v : vars_of(cand_.class_query))
        if (v->integer) cs.witness_exprs[v->var_id] = root_expr(v);
    cs.query_syms = query_syms_;
    cs.query_sym_of_var = query_sym_of_var_;
    cs.nat_syms = nat_syms_;
    cs.syms = syms_;
    return cs;
}

nlohmann::json symbolic_system_to_json(const SymbolicSystem& sys, const SymbolTable& syms) {
    nlohmann::json j;
    auto conds = [&](const std::vector<IntCondition>& cs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : cs) arr.push_back(cond_to_string(c, syms));
        return arr;
    };
    j["reachability"] = conds(sys.reachability);
    auto& link = j["linking"] = nlohmann::json::array();
    for (const auto& [c_sym, e] : sys.linking)
        link.push_back(syms.name(c_sym) + " = " + ie_to_string(e, syms));
    auto& dom = j["domains"] = nlohmann::json::array();
    for (const auto& [c_sym, d_sym] : sys.domains)
        dom.push_back({{"base", syms.name(c_sym)}, {"direction", syms.name(d_sym)}});
    nlohmann::json imp;
    nlohmann::json quant = nlohmann::json::array();
    for (int q : sys.implication.quantified) quant.push_back(syms.name(q));
    imp["quantified"] = quant;
    imp["premises"] = conds(sys.implication.premises);
    imp["conclusions"] = conds(sys.implication.conclusions);
    j["implication"] = imp;
    return j;
}

nlohmann::json dioph_system_to_json(const DiophantineSystem& ds, const SymbolTable& syms) {
    nlohmann::json j;
    if (!ds.branch.empty()) j["branch"] = ds.branch;
    auto& cs = j["constraints"] = nlohmann::json::array();
    for (const auto& c : ds.constraints)
        cs.push_back({{"poly", c.poly.to_json(syms)},
                      {"kind", c.equality ? "eq0" : "ge0"},
                      {"text", c.poly.to_string(syms) + (c.equality ? " = 0" : " >= 0")}});
    return j;
}

}  // namespace looper
