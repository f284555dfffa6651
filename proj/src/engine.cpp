#include "looper/engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace looper {

namespace {

/// Triangular unifier state; bindings are resolved on completion.
struct Unifier {
    std::unordered_map<int, TermPtr> bind;
    std::vector<std::pair<TermPtr, TermPtr>> order;  // (var as bound, raw rhs)

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
                // keep input variables alive: bind the less constrained one
                if (x->input != y->input) {
                    v = x->input ? y : x;
                    t = x->input ? x : y;
                } else if (x->integer != y->integer) {
                    v = x->integer ? y : x;
                    t = x->integer ? x : y;
                } else if (x->input) {
                    // both input: constrain the left (goal-side) variable
                    v = x;
                    t = y;
                } else {
                    // no labels involved: the right (clause-side) variable goes
                    v = y;
                    t = x;
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

}  // namespace

std::optional<UnifyResult> moded_unify(const TermPtr& a, const TermPtr& b) {
    Unifier u;
    if (!u.unify(a, b)) return std::nullopt;

    // label upgrades implied by the bindings
    std::unordered_map<int, std::pair<bool, bool>> upgrade;  // var id -> (input, integer)
    std::vector<std::pair<TermPtr, TermPtr>> resolved;
    for (const auto& [v, raw] : u.order) {
        TermPtr rhs = u.resolve(raw);
        resolved.emplace_back(v, rhs);
        if (v->input) {
            for (const auto& w : vars_of(rhs)) {
                auto& up = upgrade[w->var_id];
                up.first = true;
                if (v->integer && rhs->is_var()) up.second = true;
            }
        }
    }

    Subst relabel_subst;
    std::unordered_map<int, bool> gained_input;
    for (const auto& [v, rhs] : resolved) {
        for (const auto& w : vars_of(rhs)) {
            auto it = upgrade.find(w->var_id);
            if (it == upgrade.end()) continue;
            bool ninput = w->input || it->second.first;
            bool ninteger = w->integer || it->second.second;
            if (ninput != w->input || ninteger != w->integer) {
                relabel_subst.bind(w->var_id, mk_var(w->var_id, w->name, ninput, ninteger));
                if (!w->input && ninput) gained_input[w->var_id] = true;
            }
        }
    }

    UnifyResult res;
    for (const auto& [v, rhs] : resolved) {
        TermPtr final_rhs = relabel_subst.apply(rhs);
        res.mgu.emplace_back(v, final_rhs);
        bool record = v->input;
        if (!record && final_rhs->is_var() && gained_input.count(final_rhs->var_id)) record = true;
        if (record) res.input_bindings.emplace_back(v, final_rhs);
        res.subst.bind(v->var_id, final_rhs);
    }
    // relabel entries for upgraded variables that stay unbound
    for (const auto& [vid, flags] : upgrade) {
        if (res.subst.contains(vid)) continue;
        TermPtr nv = relabel_subst.lookup(vid);
        if (nv) res.subst.bind(vid, nv);
        (void)flags;
    }
    return res;
}

namespace {

using VarMapBij = std::unordered_map<int, int>;

bool ev_match(const TermPtr& s, const TermPtr& t, VarMapBij& fwd, VarMapBij& rev);

bool ev_exact(const TermPtr& s, const TermPtr& t, VarMapBij& fwd, VarMapBij& rev) {
    if (s->is_var() && t->is_var()) {
        if (s->input != t->input || s->integer != t->integer) return false;
        auto f = fwd.find(s->var_id);
        if (f != fwd.end() && f->second != t->var_id) return false;
        auto r = rev.find(t->var_id);
        if (r != rev.end() && r->second != s->var_id) return false;
        fwd[s->var_id] = t->var_id;
        rev[t->var_id] = s->var_id;
        return true;
    }
    if (s->is_int() && t->is_int()) return s->value == t->value;
    if (s->is_compound() && t->is_compound() && s->name == t->name &&
        s->args.size() == t->args.size()) {
        for (size_t i = 0; i < s->args.size(); ++i)
            if (!ev_match(s->args[i], t->args[i], fwd, rev)) return false;
        return true;
    }
    return false;
}

bool ev_match(const TermPtr& s, const TermPtr& t, VarMapBij& fwd, VarMapBij& rev) {
    VarMapBij sf = fwd, sr = rev;
    if (ev_exact(s, t, fwd, rev)) return true;
    fwd = sf;
    rev = sr;
    // subterm growth: the descendant wraps the ancestor subterm
    if (t->is_compound()) {
        for (const auto& arg : t->args) {
            if (ev_match(s, arg, fwd, rev)) return true;
            fwd = sf;
            rev = sr;
        }
    }
    return false;
}

}  // namespace

bool expanded_variant(const TermPtr& ancestor, const TermPtr& descendant) {
    if (!ancestor->is_compound() || !descendant->is_compound()) return false;
    if (ancestor->name != descendant->name || ancestor->args.size() != descendant->args.size())
        return false;
    VarMapBij fwd, rev;
    for (size_t i = 0; i < ancestor->args.size(); ++i)
        if (!ev_match(ancestor->args[i], descendant->args[i], fwd, rev)) return false;
    return true;
}

namespace {

int max_var_id(const TermPtr& t) {
    int m = -1;
    if (t->is_var()) return t->var_id;
    for (const auto& a : t->args) m = std::max(m, max_var_id(a));
    return m;
}

struct TreeBuilder {
    const Program& program;
    const BuildLimits& limits;
    ModedTree tree;
    VarGen gen;
    std::unordered_map<int, int> path_clause;  // node -> clause applied on current path

    TreeBuilder(const Program& p, const BuildLimits& l, int first_free_id)
        : program(p), limits(l), gen(first_free_id) {}

    int add_node(std::vector<GoalAtom> goal, int parent, Edge edge) {
        TreeNode n;
        n.id = static_cast<int>(tree.nodes.size());
        n.goal = std::move(goal);
        n.parent = parent;
        n.depth = parent < 0 ? 0 : tree.nodes[parent].depth + 1;
        if (!n.goal.empty() && n.goal.front().origin >= 0)
            n.ancestor_of_selected = n.goal.front().origin;
        if (parent >= 0) {
            edge.from = parent;
            edge.to = n.id;
            tree.edges.push_back(std::move(edge));
            tree.nodes[parent].children.push_back(n.id);
        }
        tree.nodes.push_back(std::move(n));
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    bool capped() {
        if (static_cast<int>(tree.nodes.size()) >= limits.node_cap) {
            tree.node_cap_hit = true;
            return true;
        }
        return false;
    }

    bool loop_cut(int node_id, int clause_index) {
        const TermPtr& sel = tree.selected_atom(node_id);
        int hits = 0;
        int cur = tree.nodes[node_id].goal.front().origin;
        while (cur >= 0) {
            const TreeNode& anc = tree.nodes[cur];
            const TermPtr& anc_sel = anc.goal.front().atom;
            auto it = path_clause.find(cur);
            if (it != path_clause.end() && it->second == clause_index &&
                anc_sel->name == sel->name && anc_sel->arity() == sel->arity() &&
                expanded_variant(anc_sel, sel)) {
                if (++hits >= limits.repetition - 1) return true;
            }
            if (anc.goal.empty()) break;
            cur = anc.goal.front().origin;
        }
        return false;
    }

    void expand(int id) {
        const std::vector<GoalAtom> goal = tree.nodes[id].goal;  // copy: nodes vector grows
        if (goal.empty()) {
            tree.nodes[id].leaf = LeafKind::Success;
            return;
        }
        const TermPtr sel = goal.front().atom;
        const std::vector<GoalAtom> rest(goal.begin() + 1, goal.end());

        if (sel->is_compound() && sel->name == "is" && sel->arity() == 2) {
            const TermPtr& lhs = sel->args[0];
            const TermPtr& rhs = sel->args[1];
            if (lhs->is_var() && !lhs->input && is_integer_expression(rhs)) {
                if (capped()) return;
                TermPtr labeled = mk_var(lhs->var_id, lhs->name, true, true);
                Subst s;
                s.bind(lhs->var_id, labeled);
                std::vector<GoalAtom> child;
                child.reserve(rest.size());
                for (const auto& g : rest) child.push_back({s.apply(g.atom), g.origin});
                Edge e;
                e.step = ConsStep{labeled, rhs};
                int c = add_node(std::move(child), id, std::move(e));
                expand(c);
            } else {
                tree.nodes[id].leaf = LeafKind::Unsupported;
            }
            return;
        }
        if (sel->is_compound() && is_comparison_functor(sel->name) && sel->arity() == 2) {
            if (is_integer_expression(sel->args[0]) && is_integer_expression(sel->args[1])) {
                if (capped()) return;
                Edge e;
                e.step = CondStep{sel};
                int c = add_node(rest, id, std::move(e));
                expand(c);
            } else {
                tree.nodes[id].leaf = LeafKind::Unsupported;
            }
            return;
        }

        bool any_child = false;
        bool any_cut = false;
        for (int ci : program.matching(sel->name, sel->arity())) {
            if (loop_cut(id, ci)) {
                tree.cut_points.emplace_back(id, ci);
                any_cut = true;
                continue;
            }
            const Clause& clause = program.clauses[ci];
            std::unordered_map<int, TermPtr> renaming;
            TermPtr head = gen.rename_apart(clause.head, renaming);
            auto res = moded_unify(sel, head);
            if (!res) continue;
            if (capped()) return;
            std::vector<GoalAtom> child;
            child.reserve(clause.body.size() + rest.size());
            for (const auto& b : clause.body) {
                TermPtr rb = gen.rename_apart(b, renaming);
                child.push_back({res->subst.apply(rb), id});
            }
            for (const auto& g : rest) child.push_back({res->subst.apply(g.atom), g.origin});
            Edge e;
            e.step = ClauseStep{ci, res->mgu, res->input_bindings};
            int c = add_node(std::move(child), id, std::move(e));
            path_clause[id] = ci;
            expand(c);
            path_clause.erase(id);
            any_child = true;
        }
        if (!any_child) tree.nodes[id].leaf = any_cut ? LeafKind::Cut : LeafKind::Failed;
    }
};

}  // namespace

ModedTree build_tree(const Program& program, const ModedQuery& query, const BuildLimits& limits) {
    int first_free = max_var_id(query.atom) + 1;
    for (const auto& c : program.clauses) {
        first_free = std::max(first_free, max_var_id(c.head) + 1);
        for (const auto& b : c.body) first_free = std::max(first_free, max_var_id(b) + 1);
    }
    TreeBuilder builder(program, limits, first_free);
    builder.add_node({GoalAtom{query.atom, -1}}, -1, {});
    builder.expand(0);
    return std::move(builder.tree);
}

bool ModedTree::is_ancestor_node(int ancestor, int descendant) const {
    const TreeNode& d = nodes[descendant];
    if (d.goal.empty()) return false;
    int cur = d.goal.front().origin;
    while (cur >= 0) {
        if (cur == ancestor) return true;
        const TreeNode& n = nodes[cur];
        if (n.goal.empty()) break;
        cur = n.goal.front().origin;
    }
    return false;
}

std::vector<int> ModedTree::path(int from, int to) const {
    std::vector<int> rev;
    int cur = to;
    while (cur >= 0) {
        rev.push_back(cur);
        if (cur == from) break;
        cur = nodes[cur].parent;
    }
    if (rev.empty() || rev.back() != from) throw std::invalid_argument("invalid tree path");
    std::reverse(rev.begin(), rev.end());
    return rev;
}

std::vector<Binding> input_bindings_on_path(const ModedTree& tree, int from, int to) {
    std::vector<Binding> out;
    for (int node : tree.path(from, to)) {
        if (node == from) continue;
        const Edge& e = tree.edge_into(node);
        if (const auto* cs = std::get_if<ClauseStep>(&e.step))
            out.insert(out.end(), cs->input_bindings.begin(), cs->input_bindings.end());
    }
    return out;
}

TermPtr apply_bindings(const TermPtr& t, const std::vector<Binding>& bindings) {
    TermPtr cur = t;
    for (const auto& [v, rhs] : bindings) {
        Subst s;
        s.bind(v->var_id, rhs);
        cur = s.apply(cur);
    }
    return cur;
}

std::string goal_to_string(const std::vector<GoalAtom>& goal) {
    if (goal.empty()) return "[]";
    std::ostringstream os;
    for (size_t i = 0; i < goal.size(); ++i) {
        if (i) os << ", ";
        os << term_to_string(goal[i].atom);
    }
    return os.str();
}

namespace {

std::string labels_of_goal(const std::vector<GoalAtom>& goal) {
    std::vector<TermPtr> vars;
    for (const auto& g : goal) collect_vars(g.atom, vars);
    std::string in, intg;
    for (const auto& v : vars) {
        if (v->integer) {
            if (!intg.empty()) intg += ",";
            intg += v->name;
        } else if (v->input) {
            if (!in.empty()) in += ",";
            in += v->name;
        }
    }
    std::string out;
    if (!in.empty()) out += "input: " + in;
    if (!intg.empty()) out += (out.empty() ? "" : "  ") + std::string("int: ") + intg;
    return out;
}

std::string edge_label(const Edge& e) {
    if (const auto* cs = std::get_if<ClauseStep>(&e.step)) {
        std::string s = "clause " + std::to_string(cs->clause_index + 1);
        for (const auto& [v, t] : cs->input_bindings)
            s += "\n" + v->name + "\\" + term_to_string(t);
        return s;
    }
    if (const auto* co = std::get_if<ConsStep>(&e.step))
        return "cons: " + co->var->name + " is " + term_to_string(co->expr);
    return "cond: " + term_to_string(std::get<CondStep>(e.step).condition);
}

}  // namespace

std::string tree_to_dot(const ModedTree& tree) {
    std::ostringstream os;
    os << "digraph moded_sld_tree {\n  node [shape=box,fontname=\"monospace\"];\n";
    for (const auto& n : tree.nodes) {
        std::string label = "N" + std::to_string(n.id) + ": " + goal_to_string(n.goal);
        std::string lab = labels_of_goal(n.goal);
        if (!lab.empty()) label += "\\n" + lab;
        for (const auto& [node, clause] : tree.cut_points)
            if (node == n.id) label += "\\ncut: clause " + std::to_string(clause + 1);
        std::string shape;
        switch (n.leaf) {
            case LeafKind::Success: shape = ",style=filled,fillcolor=palegreen"; break;
            case LeafKind::Failed: shape = ",style=filled,fillcolor=mistyrose"; break;
            case LeafKind::Cut: shape = ",style=filled,fillcolor=lightyellow"; break;
            case LeafKind::Unsupported: shape = ",style=filled,fillcolor=lightgray"; break;
            case LeafKind::Internal: break;
        }
        std::string escaped;
        for (char c : label) {
            if (c == '"') escaped += "\\\"";
            else escaped += c;
        }
        os << "  n" << n.id << " [label=\"" << escaped << "\"" << shape << "];\n";
    }
    for (const auto& e : tree.edges) {
        std::string label = edge_label(e);
        std::string escaped;
        for (char c : label) {
            if (c == '"') escaped += "\\\"";
            else if (c == '\n') escaped += "\\n";
            else escaped += c;
        }
        bool builtin = !std::holds_alternative<ClauseStep>(e.step);
        os << "  n" << e.from << " -> n" << e.to << " [label=\"" << escaped << "\""
           << (builtin ? ",style=dashed" : "") << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string tree_to_json(const ModedTree& tree) {
    nlohmann::json j;
    j["root"] = tree.root;
    j["node_cap_hit"] = tree.node_cap_hit;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        nlohmann::json nj;
        nj["id"] = n.id;
        nj["depth"] = n.depth;
        nj["parent"] = n.parent;
        auto& goal = nj["goal"] = nlohmann::json::array();
        for (const auto& g : n.goal)
            goal.push_back({{"atom", term_to_string(g.atom)}, {"origin", g.origin}});
        if (n.ancestor_of_selected) nj["ancestor_of_selected"] = *n.ancestor_of_selected;
        switch (n.leaf) {
            case LeafKind::Internal: nj["leaf"] = "internal"; break;
            case LeafKind::Success: nj["leaf"] = "success"; break;
            case LeafKind::Failed: nj["leaf"] = "failed"; break;
            case LeafKind::Cut: nj["leaf"] = "cut"; break;
            case LeafKind::Unsupported: nj["leaf"] = "unsupported"; break;
        }
        nodes.push_back(std::move(nj));
    }
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& e : tree.edges) {
        nlohmann::json ej;
        ej["from"] = e.from;
        ej["to"] = e.to;
        if (const auto* cs = std::get_if<ClauseStep>(&e.step)) {
            ej["kind"] = "clause";
            ej["clause"] = cs->clause_index;
            auto& bs = ej["input_bindings"] = nlohmann::json::array();
            for (const auto& [v, t] : cs->input_bindings)
                bs.push_back({{"var", v->name}, {"term", term_to_string(t)}});
        } else if (const auto* co = std::get_if<ConsStep>(&e.step)) {
            ej["kind"] = "cons";
            ej["var"] = co->var->name;
            ej["expr"] = term_to_string(co->expr);
        } else {
            ej["kind"] = "cond";
            ej["condition"] = term_to_string(std::get<CondStep>(e.step).condition);
        }
        edges.push_back(std::move(ej));
    }
    auto& cuts = j["cut_points"] = nlohmann::json::array();
    for (const auto& [node, clause] : tree.cut_points)
        cuts.push_back({{"node", node}, {"clause", clause}});
    return j.dump(2);
}

}  // namespace looper
