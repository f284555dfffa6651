#pragma once

#include "looper/engine.hpp"

namespace looper {

/// Every concrete instance of a is more general than some instance of b
/// (sufficient unification-based condition over renamed copies).
bool is_moded_more_general(const TermPtr& a, const TermPtr& b);

/// a has integer expressions at every position where b has one.
bool is_integer_similar(const TermPtr& a, const TermPtr& b);

/// Strengthened condition implying both relations above.
bool check_pair(const TermPtr& a, const TermPtr& b);

/// A node pair (begin, end) whose path can repeat forever once the integer
/// conditions along it are satisfiable.
struct LoopCandidate {
    int begin = -1;
    int end = -1;
    /// The query narrowed by the input bindings of the prefix path.
    TermPtr class_query;
    std::vector<ArgMode> class_modes;
    /// Nodes carrying integer conditions on the prefix (root..begin) and on
    /// the loop (begin..end).
    std::vector<int> cond_nodes_prefix;
    std::vector<int> cond_nodes_loop;
};

/// All node pairs satisfying: ancestor relation between the selected atoms,
/// no input bindings on the loop path, and check_pair(end atom, begin atom).
/// Ordered by (begin, end).
std::vector<LoopCandidate> find_candidates(const ModedTree& tree, const ModedQuery& query);

}  // namespace looper
