#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "looper/program.hpp"

namespace looper {

using Binding = std::pair<TermPtr, TermPtr>;  // bound variable, replacement term

struct UnifyResult {
    /// Resolved most general unifier. Bound-variable entries carry the
    /// pre-unification labels, replacement terms the propagated ones.
    std::vector<Binding> mgu;
    /// Subset of mgu whose bound variable is input-labeled (or whose
    /// replacement variable gained the input label through propagation).
    std::vector<Binding> input_bindings;
    /// mgu plus relabeling entries for variables that gained labels.
    Subst subst;
};

/// Unification with occurs check and input/integer label propagation.
/// a and b must be renamed apart.
std::optional<UnifyResult> moded_unify(const TermPtr& a, const TermPtr& b);

struct GoalAtom {
    TermPtr atom;
    int origin;  // node whose clause step introduced this atom; -1 for the query
};

enum class LeafKind { Internal, Success, Failed, Cut, Unsupported };

struct TreeNode {
    int id = 0;
    std::vector<GoalAtom> goal;
    int depth = 0;
    int parent = -1;
    std::optional<int> ancestor_of_selected;  // origin of the selected atom
    LeafKind leaf = LeafKind::Internal;
    std::vector<int> children;
};

struct ClauseStep {
    int clause_index;
    std::vector<Binding> mgu;
    std::vector<Binding> input_bindings;
};

struct ConsStep {
    TermPtr var;   // with the integer label it acquires
    TermPtr expr;  // defining integer expression at the time of selection
};

struct CondStep {
    TermPtr condition;  // comparison atom as recorded at the node
};

struct Edge {
    int from = -1;
    int to = -1;
    std::variant<ClauseStep, ConsStep, CondStep> step;
};

struct BuildLimits {
    int node_cap = 10000;
    int repetition = 2;  // loop-check threshold r
};

/// Finite moded SLD-tree: depth-first left-most expansion with cons/cond
/// transitions and per-clause loop-check cuts. Node ids follow depth-first
/// preorder.
struct ModedTree {
    std::vector<TreeNode> nodes;
    std::vector<Edge> edges;  // edges[i] leads into node i+1
    int root = 0;
    std::vector<std::pair<int, int>> cut_points;  // (node id, clause index)
    bool node_cap_hit = false;

    const Edge& edge_into(int node_id) const { return edges[node_id - 1]; }
    const TermPtr& selected_atom(int node_id) const { return nodes[node_id].goal.front().atom; }
    bool is_ancestor_node(int ancestor, int descendant) const;
    /// Nodes on the tree path from `from` down to `to`, inclusive.
    std::vector<int> path(int from, int to) const;
};

ModedTree build_tree(const Program& program, const ModedQuery& query,
                     const BuildLimits& limits = {});

/// Concatenated input bindings of the clause steps on the path from->to.
std::vector<Binding> input_bindings_on_path(const ModedTree& tree, int from, int to);

/// Applies a binding list left to right.
TermPtr apply_bindings(const TermPtr& t, const std::vector<Binding>& bindings);

/// True when the descendant atom is a variant of the ancestor atom up to
/// subterm growth at identical positions (the loop-check relation).
bool expanded_variant(const TermPtr& ancestor, const TermPtr& descendant);

std::string tree_to_dot(const ModedTree& tree);
std::string tree_to_json(const ModedTree& tree);
std::string goal_to_string(const std::vector<GoalAtom>& goal);

}  // namespace looper
