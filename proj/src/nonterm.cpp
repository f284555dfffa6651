#include "looper/nonterm.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace looper {

namespace {

/// Unifier for the static more-general checks. No label propagation; the
/// variable-variable orientation is chosen to satisfy the binding rules
/// whenever possible.
struct CheckUnifier {
    std::unordered_set<int> b_side;
    std::unordered_map<int, TermPtr> bind;
    std::vector<std::pair<TermPtr, TermPtr>> order;

    bool in_b(const TermPtr& v) const { return b_side.count(v->var_id) != 0; }

    TermPtr walk(TermPtr t) const {
        while (t->is_var()) {
            auto it = bind.find(t->var_id);
            if (it == bind.end()) break;
            t = it->second;
        }
        return t;
    }

    bool occurs_walked(int var_id, const TermPtr& t) const {
        TermPtr w = walk(t);
        if (w->is_var()) return w->var_id == var_id;
        for (const auto& a : w->args)
            if (occurs_walked(var_id, a)) return true;
        return false;
    }

    bool unify(const TermPtr& x0, const TermPtr& y0) {
        TermPtr x = walk(x0);
        TermPtr y = walk(y0);
        if (x->is_var() && y->is_var() && x->var_id == y->var_id) return true;
        if (x->is_var() || y->is_var()) {
            TermPtr v, t;
            if (x->is_var() && y->is_var()) {
                auto prefer_x = [&]() {
                    v = x;
                    t = y;
                };
                auto prefer_y = [&]() {
                    v = y;
                    t = x;
                };
                bool xb = in_b(x) && x->input;
                bool yb = in_b(y) && y->input;
                if (xb && yb) {
                    // favor the rule for plain input variables
                    if (x->integer && !y->integer) prefer_y();
                    else prefer_x();
                } else if (xb) {
                    prefer_x();
                } else if (yb) {
                    prefer_y();
                } else if (!in_b(x) && !x->input) {
                    prefer_x();
                } else if (!in_b(y) && !y->input) {
                    prefer_y();
                } else {
                    prefer_x();
                }
            } else if (x->is_var()) {
                v = x;
                t = y;
            } else {
                v = y;
                t = x;
            }
            if (occurs_walked(v->var_id, t)) return false;
            bind.emplace(v->var_id, t);
            order.emplace_back(v, t);
            return true;
        }
        if (x->is_int() && y->is_int()) return x->value == y->value;
        if (x->is_int() || y->is_int()) return false;
        if (x->name != y->name || x->args.size() != y->args.size()) return false;
        for (size_t i = 0; i < x->args.size(); ++i)
            if (!unify(x->args[i], y->args[i])) return false;
        return true;
    }

    TermPtr resolve(const TermPtr& t) const {
        TermPtr w = walk(t);
        if (w->is_var() || w->is_int()) return w;
        std::vector<TermPtr> args;
        args.reserve(w->args.size());
        for (const auto& a : w->args) args.push_back(resolve(a));
        return mk_compound(w->name, std::move(args));
    }
};

bool any_input_var(const TermPtr& t) {
    for (const auto& v : vars_of(t))
        if (v->input) return true;
    return false;
}

enum class Rule { MoreGeneral, WithIntegers };

bool unify_and_verify(const TermPtr& a, const TermPtr& b, Rule rule) {
    VarGen gen(0);
    std::unordered_map<int, TermPtr> map_a, map_b;
    TermPtr ra = gen.rename_apart(a, map_a);
    TermPtr rb = gen.rename_apart(b, map_b);

    CheckUnifier u;
    for (const auto& [orig, fresh] : map_b) {
        (void)orig;
        u.b_side.insert(fresh->var_id);
    }
    if (!u.unify(ra, rb)) return false;

    for (const auto& [v, raw] : u.order) {
        TermPtr t = u.resolve(raw);
        bool ok = false;
        if (rule == Rule::MoreGeneral) {
            if (u.in_b(v) && v->input) ok = true;
            else if (!u.in_b(v) && !v->input && !any_input_var(t)) ok = true;
        } else {
            if (u.in_b(v) && v->integer && is_integer_expression(t)) ok = true;
            else if (u.in_b(v) && v->input && !v->integer) ok = true;
            else if (!u.in_b(v) && !v->input && !any_input_var(t) &&
                     !contains_integer_constant(t))
                ok = true;
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace

bool is_moded_more_general(const TermPtr& a, const TermPtr& b) {
    return unify_and_verify(a, b, Rule::MoreGeneral);
}

bool is_integer_similar(const TermPtr& a, const TermPtr& b) {
    bool similar = true;
    for_each_position(b, [&](const Position& pos, const TermPtr& tb) {
        if (!similar || !is_integer_expression(tb)) return;
        auto ta = subterm(pos, a);
        if (!ta || !is_integer_expression(*ta)) similar = false;
    });
    return similar;
}

bool check_pair(const TermPtr& a, const TermPtr& b) {
    return unify_and_verify(a, b, Rule::WithIntegers);
}

namespace {

std::vector<int> cond_nodes_on_path(const ModedTree& tree, int from, int to) {
    std::vector<int> out;
    for (int node : tree.path(from, to)) {
        if (node == from) continue;
        const Edge& e = tree.edge_into(node);
        if (std::holds_alternative<CondStep>(e.step)) out.push_back(e.from);
    }
    return out;
}

}  // namespace

std::vector<LoopCandidate> find_candidates(const ModedTree& tree, const ModedQuery& query) {
    std::vector<LoopCandidate> out;
    for (const TreeNode& node : tree.nodes) {
        if (node.goal.empty()) continue;
        const TermPtr& end_atom = node.goal.front().atom;
        if (!end_atom->is_compound() || is_builtin_functor(end_atom->name, end_atom->arity()))
            continue;
        int b = node.goal.front().origin;
        while (b >= 0) {
            const TreeNode& anc = tree.nodes[b];
            const TermPtr& begin_atom = anc.goal.front().atom;
            if (input_bindings_on_path(tree, b, node.id).empty() &&
                check_pair(end_atom, begin_atom)) {
                LoopCandidate cand;
                cand.begin = b;
                cand.end = node.id;
                cand.class_query =
                    apply_bindings(query.atom, input_bindings_on_path(tree, 0, b));
                cand.class_modes = query.modes;
                cand.cond_nodes_prefix = cond_nodes_on_path(tree, 0, b);
                cand.cond_nodes_loop = cond_nodes_on_path(tree, b, node.id);
                out.push_back(std::move(cand));
            }
            b = anc.goal.front().origin;
        }
    }
    std::sort(out.begin(), out.end(), [](const LoopCandidate& x, const LoopCandidate& y) {
        return std::tie(x.begin, x.end) < std::tie(y.begin, y.end);
    });
    return out;
}

}  // namespace looper
