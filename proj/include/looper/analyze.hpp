#pragma once

#include <json.hpp>

#include "looper/constraints.hpp"
#include "looper/encode.hpp"
#include "looper/interp.hpp"
#include "looper/parser.hpp"

namespace looper {

struct AnalyzeOptions {
    int bits = 3;
    PremTemplate prem = PremTemplate::Linear;
    int repetition = 2;        // loop-check threshold
    long oracle_budget = 10000;
    int node_cap = 10000;
    long clause_budget = 5000000;
    double time_limit_secs = 60.0;  // LOOPER_TIMEOUT_SECS overrides
    std::string solver_path;        // external DIMACS solver, empty = built-in
    std::string emit_dimacs_dir;
    std::string emit_tree;  // "", "dot" or "json"
    bool minimize_witness = true;
};

struct CandidateReport {
    int begin = -1;
    int end = -1;
    std::vector<std::string> reachability;
    std::string status;  // proved | no-model | encoding-too-large | timeout
    std::map<std::string, std::string> model;
    std::string class_query;
    std::string witness;
    std::string oracle;
    std::string note;
    nlohmann::json symbolic_system;
    nlohmann::json diophantine_system;
    bool operator==(const CandidateReport&) const = default;
};

struct AnalysisReport {
    std::string program_path;
    std::string query;
    std::string result;  // proved | no-proof | error
    std::string error;
    std::vector<CandidateReport> candidates;
    std::map<std::string, double> timings;
    int bits = 3;
    std::string prem = "linear";
    int repetition = 2;
    long oracle_budget = 10000;
    int node_cap = 10000;
    long clause_budget = 5000000;
    std::string tree_dump;

    bool proved() const { return result == "proved"; }
    nlohmann::json to_json() const;
    static AnalysisReport from_json(const nlohmann::json& j);
    std::string to_text() const;
    bool operator==(const AnalysisReport&) const = default;
};

/// Full pipeline result with programmatic access to every stage.
struct CandidateOutcome {
    LoopCandidate cand;
    bool has_system = false;
    CandidateSystem system;
    IntegerModel model;
    int solved_branch = -1;
    std::string status;
    std::string note;
    TermPtr witness;
    bool oracle_valid = false;
    ConcreteOutcome oracle{ConcreteOutcome::Kind::FinitelyFailed, 0, 0, 0};
};

struct DetailedAnalysis {
    ParsedFile parsed;
    ModedTree tree;
    std::vector<CandidateOutcome> candidates;
    AnalysisReport report;
};

DetailedAnalysis analyze_detailed(const std::string& text, const std::string& name,
                                  const AnalyzeOptions& options);
AnalysisReport analyze_text(const std::string& text, const std::string& name,
                            const AnalyzeOptions& options);
AnalysisReport analyze_file(const std::string& path, const AnalyzeOptions& options);

struct BenchTable {
    std::vector<std::string> programs;
    std::vector<std::string> settings;
    std::map<std::string, std::map<std::string, std::string>> cells;    // program -> setting -> + / - / OS
    std::map<std::string, std::map<std::string, double>> secs;
    std::vector<std::string> footnotes;
    std::string to_text() const;
    nlohmann::json to_json() const;
};

BenchTable bench(const std::string& dir, const AnalyzeOptions& base);

}  // namespace looper
