#include "looper/sat_solver.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace looper {

namespace {

// internal literal: 2*(var-1) | sign
inline int ilit(int dimacs_lit) {
    int v = dimacs_lit > 0 ? dimacs_lit : -dimacs_lit;
    return 2 * (v - 1) + (dimacs_lit < 0 ? 1 : 0);
}
inline int ivar(int l) { return l >> 1; }
inline int ineg(int l) { return l ^ 1; }

/// Max-heap over variable activities with position tracking.
struct VarOrder {
    std::vector<int> heap;
    std::vector<int> pos;  // var -> heap index or -1
    const std::vector<double>* act = nullptr;

    void init(int n, const std::vector<double>* activities) {
        act = activities;
        pos.assign(n, -1);
        heap.clear();
        for (int v = 0; v < n; ++v) insert(v);
    }
    bool less(int a, int b) const { return (*act)[a] > (*act)[b]; }
    void sift_up(int i) {
        int v = heap[i];
        while (i > 0) {
            int p = (i - 1) / 2;
            if (!less(v, heap[p])) break;
            heap[i] = heap[p];
            pos[heap[i]] = i;
            i = p;
        }
        heap[i] = v;
        pos[v] = i;
    }
    void sift_down(int i) {
        int v = heap[i];
        size_t n = heap.size();
        while (true) {
            size_t c = 2 * i + 1;
            if (c >= n) break;
            if (c + 1 < n && less(heap[c + 1], heap[c])) ++c;
            if (!less(heap[c], v)) break;
            heap[i] = heap[c];
            pos[heap[i]] = i;
            i = static_cast<int>(c);
        }
        heap[i] = v;
        pos[v] = i;
    }
    bool contains(int v) const { return pos[v] >= 0; }
    void insert(int v) {
        if (contains(v)) return;
        heap.push_back(v);
        pos[v] = static_cast<int>(heap.size()) - 1;
        sift_up(pos[v]);
    }
    void bumped(int v) {
        if (contains(v)) sift_up(pos[v]);
    }
    int pop() {
        int v = heap.front();
        pos[v] = -1;
        heap.front() = heap.back();
        heap.pop_back();
        if (!heap.empty()) {
            pos[heap.front()] = 0;
            sift_down(0);
        }
        return v;
    }
    bool empty() const { return heap.empty(); }
};

struct Cdcl {
    int nvars = 0;
    std::vector<std::vector<int>> clauses;  // internal literals
    std::vector<std::vector<int>> watches;  // lit -> clause indices
    std::vector<int8_t> assign;             // var -> -1 / 0 / 1
    std::vector<int> level;
    std::vector<int> reason;  // clause index or -1
    std::vector<int> trail;
    std::vector<int> trail_lim;
    size_t qhead = 0;
    std::vector<double> activity;
    std::vector<int8_t> phase;
    VarOrder order;
    double var_inc = 1.0;
    long conflicts = 0;
    std::chrono::steady_clock::time_point deadline;
    bool timed_out = false;

    bool lit_true(int l) const {
        int8_t a = assign[ivar(l)];
        if (a < 0) return false;
        return (l & 1) ? a == 0 : a == 1;
    }
    bool lit_false(int l) const {
        int8_t a = assign[ivar(l)];
        if (a < 0) return false;
        return (l & 1) ? a == 1 : a == 0;
    }
    bool unassigned(int l) const { return assign[ivar(l)] < 0; }
    int decision_level() const { return static_cast<int>(trail_lim.size()); }

    void init(int n) {
        nvars = n;
        watches.assign(2 * n, {});
        assign.assign(n, -1);
        level.assign(n, 0);
        reason.assign(n, -1);
        activity.assign(n, 0.0);
        phase.assign(n, 0);
        order.init(n, &activity);
    }

    // returns false when the clause is a tautology
    static bool clean_clause(std::vector<int>& c) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        for (size_t i = 0; i + 1 < c.size(); ++i)
            if (c[i] == ineg(c[i + 1]) && ivar(c[i]) == ivar(c[i + 1])) return false;
        return true;
    }

    int add_clause(std::vector<int> c) {  // returns clause idx or -1 when absorbed
        clauses.push_back(std::move(c));
        int idx = static_cast<int>(clauses.size()) - 1;
        watches[clauses[idx][0]].push_back(idx);
        if (clauses[idx].size() > 1) watches[clauses[idx][1]].push_back(idx);
        return idx;
    }

    void enqueue(int l, int why) {
        int v = ivar(l);
        assign[v] = (l & 1) ? 0 : 1;
        level[v] = decision_level();
        reason[v] = why;
        trail.push_back(l);
    }

    int propagate() {  // returns conflicting clause or -1
        while (qhead < trail.size()) {
            int p = trail[qhead++];
            int np = ineg(p);
            std::vector<int>& ws = watches[np];
            size_t keep = 0;
            for (size_t i = 0; i < ws.size(); ++i) {
                int ci = ws[i];
                std::vector<int>& c = clauses[ci];
                if (c[0] == np) std::swap(c[0], c[1]);
                if (lit_true(c[0])) {
                    ws[keep++] = ci;
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < c.size(); ++k) {
                    if (!lit_false(c[k])) {
                        std::swap(c[1], c[k]);
                        watches[c[1]].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[keep++] = ci;
                if (lit_false(c[0])) {
                    for (size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
                    ws.resize(keep);
                    qhead = trail.size();
                    return ci;
                }
                enqueue(c[0], ci);
            }
            ws.resize(keep);
        }
        return -1;
    }

    void bump(int v) {
        activity[v] += var_inc;
        if (activity[v] > 1e100) {
            for (double& a : activity) a *= 1e-100;
            var_inc *= 1e-100;
        }
        order.bumped(v);
    }

    void analyze(int confl, std::vector<int>& learnt, int& bt_level) {
        learnt.assign(1, -1);
        std::vector<char> seen(nvars, 0);
        int counter = 0;
        int p = -1;
        size_t index = trail.size();
        int ci = confl;
        do {
            const std::vector<int>& c = clauses[ci];
            for (size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
                int q = c[k];
                int v = ivar(q);
                if (!seen[v] && level[v] > 0) {
                    seen[v] = 1;
                    bump(v);
                    if (level[v] >= decision_level()) {
                        ++counter;
                    } else {
                        learnt.push_back(q);
                    }
                }
            }
            while (!seen[ivar(trail[index - 1])]) --index;
            p = trail[--index];
            seen[ivar(p)] = 0;
            ci = reason[ivar(p)];
            --counter;
        } while (counter > 0);
        learnt[0] = ineg(p);

        bt_level = 0;
        if (learnt.size() > 1) {
            size_t max_i = 1;
            for (size_t i = 2; i < learnt.size(); ++i)
                if (level[ivar(learnt[i])] > level[ivar(learnt[max_i])]) max_i = i;
            std::swap(learnt[1], learnt[max_i]);
            bt_level = level[ivar(learnt[1])];
        }
        var_inc /= 0.95;
    }

    void backtrack(int target) {
        while (decision_level() > target) {
            int lim = trail_lim.back();
            trail_lim.pop_back();
            for (int i = static_cast<int>(trail.size()) - 1; i >= lim; --i) {
                int v = ivar(trail[i]);
                phase[v] = assign[v];
                assign[v] = -1;
                reason[v] = -1;
                order.insert(v);
            }
            trail.resize(lim);
        }
        qhead = trail.size();
    }

    int pick_branch() {
        while (!order.empty()) {
            int v = order.pop();
            if (assign[v] < 0) return v;
        }
        return -1;
    }

    static long luby(long i) {
        long k = 1;
        while ((1L << k) - 1 < i + 1) ++k;
        while ((1L << (k - 1)) - 1 != i) {
            i = i - ((1L << (k - 1)) - 1);
            k = 1;
            while ((1L << k) - 1 < i + 1) ++k;
        }
        return 1L << (k - 1);
    }

    SatResult search() {
        long restart_idx = 0;
        long conflicts_until_restart = luby(restart_idx) * 256;
        long since_check = 0;
        while (true) {
            int confl = propagate();
            if (confl >= 0) {
                ++conflicts;
                if (decision_level() == 0) return SatResult::Unsat;
                std::vector<int> learnt;
                int bt = 0;
                analyze(confl, learnt, bt);
                backtrack(bt);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    int ci = add_clause(std::move(learnt));
                    enqueue(clauses[ci][0], ci);
                }
                if (--conflicts_until_restart <= 0) {
                    ++restart_idx;
                    conflicts_until_restart = luby(restart_idx) * 256;
                    backtrack(0);
                }
            } else {
                if (++since_check >= 2048) {
                    since_check = 0;
                    if (std::chrono::steady_clock::now() > deadline) {
                        timed_out = true;
                        return SatResult::Unknown;
                    }
                }
                int v = pick_branch();
                if (v < 0) return SatResult::Sat;
                trail_lim.push_back(static_cast<int>(trail.size()));
                enqueue(2 * v + (phase[v] == 1 ? 0 : 1), -1);
            }
        }
    }
};

SatSolution run_internal(const CnfFormula& f, const SolveConfig& cfg) {
    SatSolution sol;
    Cdcl s;
    s.init(f.num_vars);
    s.deadline = std::chrono::steady_clock::now() +
                 std::chrono::microseconds(static_cast<long>(cfg.timeout_secs * 1e6));
    bool contradiction = false;
    std::vector<int> clause;
    f.for_each_clause([&](const int32_t* begin, const int32_t* end) {
        if (contradiction) return;
        clause.clear();
        for (const int32_t* it = begin; it != end; ++it) clause.push_back(ilit(*it));
        if (clause.empty()) {
            contradiction = true;
            return;
        }
        if (!Cdcl::clean_clause(clause)) return;  // tautology
        if (clause.size() == 1) {
            if (s.lit_false(clause[0])) {
                contradiction = true;
            } else if (s.unassigned(clause[0])) {
                s.enqueue(clause[0], -1);
            }
            return;
        }
        s.add_clause(clause);
    });
    if (contradiction) {
        sol.result = SatResult::Unsat;
        return sol;
    }
    if (s.propagate() >= 0) {
        sol.result = SatResult::Unsat;
        return sol;
    }
    sol.result = s.search();
    sol.conflicts = s.conflicts;
    if (sol.result == SatResult::Sat) {
        sol.model.assign(f.num_vars + 1, false);
        for (int v = 0; v < f.num_vars; ++v) sol.model[v + 1] = s.assign[v] == 1;
    }
    return sol;
}

SatSolution run_external(const CnfFormula& f, const SolveConfig& cfg) {
    SatSolution sol;
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path();
    std::string stem = "looper_" + std::to_string(::getpid()) + "_" +
                       std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
    fs::path in = dir / (stem + ".cnf");
    fs::path out = dir / (stem + ".out");
    write_dimacs(f, in.string());
    std::string cmd = cfg.external_solver + " " + in.string() + " " + out.string() + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    std::string captured;
    if (pipe) {
        char buf[4096];
        size_t n;
        while ((n = ::fread(buf, 1, sizeof buf, pipe)) > 0) captured.append(buf, n);
        ::pclose(pipe);
    }
    std::string text;
    {
        std::ifstream of(out);
        if (of) {
            std::ostringstream os;
            os << of.rdbuf();
            text = os.str();
        }
    }
    if (text.find("SAT") == std::string::npos && text.find("UNSAT") == std::string::npos)
        text = captured;
    std::error_code ec;
    fs::remove(in, ec);
    fs::remove(out, ec);

    // accepts both minisat-style output files and competition s/v lines
    std::istringstream is(text);
    std::string line;
    bool sat = false, unsat = false;
    std::vector<int> lits;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "c") continue;
        if (first == "s" || first == "SAT" || first == "UNSAT" || first == "SATISFIABLE" ||
            first == "UNSATISFIABLE") {
            std::string verdict = first;
            if (first == "s") ls >> verdict;
            if (verdict.find("UNSAT") != std::string::npos) unsat = true;
            else if (verdict.find("SAT") != std::string::npos) sat = true;
            if (first == "SAT") {
                int l;
                while (ls >> l)
                    if (l != 0) lits.push_back(l);
            }
            continue;
        }
        if (first == "v") {
            int l;
            while (ls >> l)
                if (l != 0) lits.push_back(l);
            continue;
        }
        // bare literal lines (minisat result files put them after SAT)
        try {
            int l = std::stoi(first);
            if (l != 0) lits.push_back(l);
            int m;
            while (ls >> m)
                if (m != 0) lits.push_back(m);
        } catch (...) {
        }
    }
    if (unsat) {
        sol.result = SatResult::Unsat;
    } else if (sat) {
        sol.result = SatResult::Sat;
        sol.model.assign(f.num_vars + 1, false);
        for (int l : lits) {
            int v = l > 0 ? l : -l;
            if (v <= f.num_vars) sol.model[v] = l > 0;
        }
    }
    return sol;
}

}  // namespace

SatSolution solve_cnf(const CnfFormula& f, const SolveConfig& cfg) {
    if (!cfg.external_solver.empty()) return run_external(f, cfg);
    return run_internal(f, cfg);
}

}  // namespace looper
