#include "looper/analyze.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "looper/sat_solver.hpp"

namespace looper {

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

TermPtr build_witness(const LoopCandidate& cand, const CandidateSystem& cs,
                      const IntegerModel& model) {
    std::map<int, mpz_class> query_values;
    for (int s : cs.query_syms) {
        auto it = model.find(s);
        query_values[s] = it == model.end() ? mpz_class(0) : it->second;
    }
    Subst s;
    for (const auto& v : vars_of(cand.class_query)) {
        if (v->integer) {
            auto it = cs.witness_exprs.find(v->var_id);
            mpz_class value = it == cs.witness_exprs.end()
                                  ? mpz_class(0)
                                  : ie_eval(it->second, query_values);
            s.bind(v->var_id, mk_int(value));
        } else if (v->input) {
            s.bind(v->var_id, mk_atom("a"));
        }
    }
    return s.apply(cand.class_query);
}

struct CandidateRunner {
    const AnalyzeOptions& opts;
    const Program& program;
    Clock::time_point deadline;
    std::string dimacs_stem;

    double remaining() const {
        return std::chrono::duration<double>(deadline - Clock::now()).count();
    }

    /// Re-solves with query symbols pinned to magnitudes near zero so the
    /// reported witness is canonical.
    void minimize(const DiophantineSystem& ds, int bits, long clause_budget,
                  const std::vector<int>& query_syms, IntegerModel& model) {
        IntegerModel pins;
        mpz_class limit = (mpz_class(1) << bits) - 1;
        for (int sym : query_syms) {
            auto cur_it = model.find(sym);
            if (cur_it == model.end()) continue;  // symbol absent from the system
            mpz_class current = cur_it->second;
            bool pinned = false;
            std::vector<mpz_class> order{0};
            for (mpz_class m = 1; m <= limit; ++m) {
                order.push_back(-m);
                order.push_back(m);
            }
            for (const mpz_class& v : order) {
                if (abs(v) > abs(current)) break;
                if (remaining() <= 0) return;
                IntegerModel trial = pins;
                trial[sym] = v;
                EncodeResult enc = encode_with_pins(ds, bits, clause_budget, trial);
                if (enc.too_large) return;
                SolveConfig scfg;
                scfg.timeout_secs = std::max(0.1, remaining());
                SatSolution sol = solve_cnf(enc.cnf, scfg);
                if (sol.result != SatResult::Sat) continue;
                IntegerModel decoded = decode(sol.model, enc.vm);
                if (!check_model(ds, decoded)) continue;
                pins = trial;
                model = decoded;
                pinned = true;
                break;
            }
            if (!pinned) pins[sym] = current;
        }
    }

    void run(CandidateOutcome& out, const ModedTree& tree, const ModedQuery& query) {
        out.status = "no-model";
        try {
            ConstraintBuilder builder(tree, query, out.cand);
            out.system = builder.build(opts.prem);
            out.has_system = true;
        } catch (const UnsupportedCandidate& e) {
            out.note = e.what();
            return;
        }
        bool any_too_large = false;
        bool timed_out = false;
        for (size_t bi = 0; bi < out.system.branches.size(); ++bi) {
            const auto& branch = out.system.branches[bi];
            if (remaining() <= 0) {
                timed_out = true;
                break;
            }
            EncodeResult enc = encode(branch.dioph, opts.bits, opts.clause_budget);
            if (!opts.emit_dimacs_dir.empty() && !enc.too_large) {
                std::filesystem::create_directories(opts.emit_dimacs_dir);
                write_dimacs(enc.cnf, opts.emit_dimacs_dir + "/" + dimacs_stem + "_b" +
                                          std::to_string(bi) + ".cnf");
            }
            if (enc.too_large) {
                any_too_large = true;
                continue;
            }
            SolveConfig scfg;
            scfg.timeout_secs = std::max(0.1, remaining());
            scfg.external_solver = opts.solver_path;
            SatSolution sol = solve_cnf(enc.cnf, scfg);
            if (sol.result == SatResult::Unknown) {
                timed_out = true;
                continue;
            }
            if (sol.result != SatResult::Sat) continue;
            IntegerModel model = decode(sol.model, enc.vm);
            if (!check_model(branch.dioph, model)) {
                out.note = "internal: decoded model failed the exact check";
                continue;
            }
            if (opts.minimize_witness && enc.cnf.num_clauses <= 200000)
                minimize(branch.dioph, opts.bits, opts.clause_budget, out.system.query_syms,
                         model);
            out.model = model;
            out.solved_branch = static_cast<int>(bi);
            out.witness = build_witness(out.cand, out.system, model);
            out.oracle = run_concrete(program, out.witness, opts.oracle_budget);
            out.oracle_valid = true;
            if (out.oracle.budget_exceeded()) {
                out.status = "proved";
            } else {
                // hard gate: a refuted witness is never reported as a proof
                out.status = "no-model";
                out.note = "witness refuted by the oracle: " + to_string(out.oracle);
            }
            return;
        }
        if (any_too_large)
            out.status = "encoding-too-large";
        else if (timed_out)
            out.status = "timeout";
    }
};

}  // namespace

DetailedAnalysis analyze_detailed(const std::string& text, const std::string& name,
                                  const AnalyzeOptions& options_in) {
    AnalyzeOptions opts = options_in;
    if (const char* env = std::getenv("LOOPER_TIMEOUT_SECS")) {
        double v = std::atof(env);
        if (v > 0) opts.time_limit_secs = v;
    }
    DetailedAnalysis da;
    AnalysisReport& rep = da.report;
    rep.program_path = name;
    rep.bits = opts.bits;
    rep.prem = to_string(opts.prem);
    rep.repetition = opts.repetition;
    rep.oracle_budget = opts.oracle_budget;
    rep.node_cap = opts.node_cap;
    rep.clause_budget = opts.clause_budget;

    Clock::time_point t0 = Clock::now();
    Clock::time_point deadline =
        t0 + std::chrono::microseconds(static_cast<long>(opts.time_limit_secs * 1e6));

    try {
        da.parsed = parse_file(text);
    } catch (const ParseError& e) {
        rep.result = "error";
        rep.error = e.what();
        return da;
    }
    if (da.parsed.queries.size() != 1) {
        rep.result = "error";
        rep.error = da.parsed.queries.empty() ? "no nt_query directive"
                                              : "more than one nt_query directive";
        return da;
    }
    const ModedQuery& query = da.parsed.queries.front();
    rep.query = term_to_string(query.atom);
    rep.timings["parse"] = secs_since(t0);

    Clock::time_point t1 = Clock::now();
    BuildLimits limits;
    limits.node_cap = opts.node_cap;
    limits.repetition = opts.repetition;
    da.tree = build_tree(da.parsed.program, query, limits);
    rep.timings["tree"] = secs_since(t1);
    if (opts.emit_tree == "dot") rep.tree_dump = tree_to_dot(da.tree);
    if (opts.emit_tree == "json") rep.tree_dump = tree_to_json(da.tree);

    Clock::time_point t2 = Clock::now();
    std::vector<LoopCandidate> cands = find_candidates(da.tree, query);
    rep.timings["candidates"] = secs_since(t2);

    Clock::time_point t3 = Clock::now();
    std::string stem = std::filesystem::path(name).stem().string();
    for (size_t i = 0; i < cands.size(); ++i) {
        CandidateOutcome out;
        out.cand = cands[i];
        if (Clock::now() > deadline) {
            out.status = "timeout";
            out.note = "time budget exhausted";
            da.candidates.push_back(std::move(out));
            continue;
        }
        CandidateRunner runner{opts, da.parsed.program, deadline,
                               stem + "_cand" + std::to_string(i)};
        runner.run(out, da.tree, query);
        da.candidates.push_back(std::move(out));
    }
    rep.timings["solve"] = secs_since(t3);
    rep.timings["total"] = secs_since(t0);

    bool any_proved = false;
    for (const auto& c : da.candidates) {
        CandidateReport cr;
        cr.begin = c.cand.begin;
        cr.end = c.cand.end;
        cr.status = c.status;
        cr.note = c.note;
        cr.class_query = term_to_string(c.cand.class_query);
        if (c.has_system) {
            for (const auto& cond : c.system.symbolic.reachability)
                cr.reachability.push_back(cond_to_string(cond, c.system.syms));
            cr.symbolic_system = symbolic_system_to_json(c.system.symbolic, c.system.syms);
            if (!c.system.branches.empty()) {
                int bi = c.solved_branch >= 0 ? c.solved_branch : 0;
                cr.diophantine_system =
                    dioph_system_to_json(c.system.branches[bi].dioph, c.system.syms);
            }
            for (const auto& [sym, value] : c.model)
                cr.model[c.system.syms.name(sym)] = value.get_str();
        }
        if (c.witness) cr.witness = term_to_string(c.witness);
        if (c.oracle_valid) cr.oracle = to_string(c.oracle);
        any_proved = any_proved || c.status == "proved";
        rep.candidates.push_back(std::move(cr));
    }
    rep.result = any_proved ? "proved" : "no-proof";
    return da;
}

AnalysisReport analyze_text(const std::string& text, const std::string& name,
                            const AnalyzeOptions& options) {
    return analyze_detailed(text, name, options).report;
}

AnalysisReport analyze_file(const std::string& path, const AnalyzeOptions& options) {
    std::ifstream in(path);
    if (!in) {
        AnalysisReport rep;
        rep.program_path = path;
        rep.result = "error";
        rep.error = "cannot open file";
        return rep;
    }
    std::ostringstream os;
    os << in.rdbuf();
    return analyze_text(os.str(), path, options);
}

nlohmann::json AnalysisReport::to_json() const {
    nlohmann::json j;
    j["program"] = program_path;
    j["query"] = query;
    j["result"] = result;
    if (!error.empty()) j["error"] = error;
    j["settings"] = {{"bits", bits},           {"prem", prem},
                     {"repetition", repetition}, {"oracle_budget", oracle_budget},
                     {"node_cap", node_cap},    {"clause_budget", clause_budget}};
    auto& cands = j["candidates"] = nlohmann::json::array();
    for (const auto& c : candidates) {
        nlohmann::json cj;
        cj["begin"] = c.begin;
        cj["end"] = c.end;
        cj["status"] = c.status;
        cj["class_query"] = c.class_query;
        cj["reachability"] = c.reachability;
        cj["model"] = c.model;
        cj["witness"] = c.witness;
        cj["oracle"] = c.oracle;
        cj["note"] = c.note;
        cj["symbolic_system"] = c.symbolic_system;
        cj["diophantine_system"] = c.diophantine_system;
        cands.push_back(std::move(cj));
    }
    j["timings"] = timings;
    if (!tree_dump.empty()) j["tree_dump"] = tree_dump;
    return j;
}

AnalysisReport AnalysisReport::from_json(const nlohmann::json& j) {
    AnalysisReport r;
    r.program_path = j.value("program", "");
    r.query = j.value("query", "");
    r.result = j.value("result", "");
    r.error = j.value("error", "");
    if (j.contains("settings")) {
        const auto& s = j["settings"];
        r.bits = s.value("bits", 3);
        r.prem = s.value("prem", "linear");
        r.repetition = s.value("repetition", 2);
        r.oracle_budget = s.value("oracle_budget", 10000L);
        r.node_cap = s.value("node_cap", 10000);
        r.clause_budget = s.value("clause_budget", 5000000L);
    }
    for (const auto& cj : j.value("candidates", nlohmann::json::array())) {
        CandidateReport c;
        c.begin = cj.value("begin", -1);
        c.end = cj.value("end", -1);
        c.status = cj.value("status", "");
        c.class_query = cj.value("class_query", "");
        c.reachability = cj.value("reachability", std::vector<std::string>{});
        c.model = cj.value("model", std::map<std::string, std::string>{});
        c.witness = cj.value("witness", "");
        c.oracle = cj.value("oracle", "");
        c.note = cj.value("note", "");
        if (cj.contains("symbolic_system")) c.symbolic_system = cj["symbolic_system"];
        if (cj.contains("diophantine_system")) c.diophantine_system = cj["diophantine_system"];
        r.candidates.push_back(std::move(c));
    }
    r.timings = j.value("timings", std::map<std::string, double>{});
    r.tree_dump = j.value("tree_dump", "");
    return r;
}

std::string AnalysisReport::to_text() const {
    std::ostringstream os;
    os << "program: " << program_path << "\n";
    if (result == "error") {
        os << "error: " << error << "\n";
        return os.str();
    }
    os << "query:   " << query << "\n";
    os << "settings: bits=" << bits << " prem=" << prem << " r=" << repetition << "\n";
    os << "candidates: " << candidates.size() << "\n";
    for (size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        os << "  [" << i + 1 << "] N" << c.begin << " -> N" << c.end << "  status: " << c.status
           << "\n";
        os << "      class: " << c.class_query << "\n";
        if (!c.reachability.empty()) {
            os << "      reachability:";
            for (const auto& r : c.reachability) os << "  " << r;
            os << "\n";
        }
        if (!c.model.empty()) {
            os << "      model:";
            for (const auto& [k, v] : c.model)
                if (k[0] == 'n' || k[0] == 'c' || k[0] == 'd') os << " " << k << "=" << v;
            os << "\n";
        }
        if (!c.witness.empty())
            os << "      witness: " << c.witness << "  (oracle: " << c.oracle << ")\n";
        if (!c.note.empty()) os << "      note: " << c.note << "\n";
    }
    os << "result: "
       << (result == "proved" ? "NON-TERMINATION PROVED" : "no non-termination proof") << "\n";
    return os.str();
}

std::string BenchTable::to_text() const {
    std::ostringstream os;
    size_t w = 12;
    for (const auto& p : programs) w = std::max(w, p.size() + 2);
    os << std::string(w, ' ');
    for (const auto& s : settings) os << s << "    ";
    os << "\n";
    for (const auto& p : programs) {
        os << p << std::string(w - p.size(), ' ');
        for (const auto& s : settings) {
            std::string cell = cells.at(p).count(s) ? cells.at(p).at(s) : "?";
            size_t field = s.size() + 4;
            os << cell
               << (cell.size() < field ? std::string(field - cell.size(), ' ') : std::string(" "));
        }
        os << "\n";
    }
    for (const auto& f : footnotes) os << "note: " << f << "\n";
    return os.str();
}

nlohmann::json BenchTable::to_json() const {
    nlohmann::json j;
    j["programs"] = programs;
    j["settings"] = settings;
    j["cells"] = cells;
    j["seconds"] = secs;
    j["footnotes"] = footnotes;
    return j;
}

BenchTable bench(const std::string& dir, const AnalyzeOptions& base) {
    BenchTable table;
    table.settings = {"linear/3", "linear/4", "max2/3", "max2/4"};
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".pl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::string name = file.stem().string();
        table.programs.push_back(name);
        for (const std::string& setting : table.settings) {
            AnalyzeOptions opts = base;
            opts.prem = setting.substr(0, 4) == "max2" ? PremTemplate::Max2 : PremTemplate::Linear;
            opts.bits = setting.back() == '4' ? 4 : 3;
            Clock::time_point t0 = Clock::now();
            AnalysisReport rep = analyze_file(file.string(), opts);
            double secs = secs_since(t0);
            std::string cell;
            if (rep.result == "error") {
                cell = "err";
                table.footnotes.push_back(name + " (" + setting + "): " + rep.error);
            } else if (rep.proved()) {
                cell = "+";
            } else {
                bool os_hit = false;
                for (const auto& c : rep.candidates)
                    if (c.status == "encoding-too-large") os_hit = true;
                cell = os_hit ? "OS" : "-";
            }
            table.cells[name][setting] = cell;
            table.secs[name][setting] = secs;
        }
    }
    return table;
}

}  // namespace looper
