#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "looper/analyze.hpp"

using namespace looper;

namespace {

void add_common_flags(CLI::App* cmd, AnalyzeOptions& opts) {
    cmd->add_option("--bits", opts.bits, "magnitude bits in the SAT encoding")
        ->check(CLI::Range(2, 8));
    cmd->add_option_function<std::string>(
           "--prem",
           [&opts](const std::string& v) {
               opts.prem = v == "max2" ? PremTemplate::Max2 : PremTemplate::Linear;
           },
           "premise template class")
        ->check(CLI::IsMember({"linear", "max2"}));
    cmd->add_option("--rep", opts.repetition, "loop-check repetition threshold");
    cmd->add_option("--budget", opts.oracle_budget, "oracle step budget");
    cmd->add_option("--node-cap", opts.node_cap, "tree node cap");
    cmd->add_option("--clause-budget", opts.clause_budget, "CNF clause budget");
    cmd->add_option("--solver", opts.solver_path, "external DIMACS solver executable");
    cmd->add_option("--emit-dimacs", opts.emit_dimacs_dir, "write CNF files into this directory");
    cmd->add_option("--emit-tree", opts.emit_tree, "dump the moded SLD-tree")
        ->check(CLI::IsMember({"dot", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"looper: non-termination prover for logic programs with integer arithmetic"};
    app.require_subcommand(1);

    AnalyzeOptions opts;
    bool json_out = false;
    std::string file;
    std::string dir;

    CLI::App* analyze = app.add_subcommand("analyze", "analyze one program file");
    analyze->add_option("file", file, "program with an nt_query directive")->required();
    add_common_flags(analyze, opts);
    analyze->add_flag("--json", json_out, "emit the report as JSON");

    CLI::App* bench_cmd = app.add_subcommand("bench", "run the settings grid over a directory");
    bench_cmd->add_option("dir", dir, "directory of .pl programs")->required();
    add_common_flags(bench_cmd, opts);
    bench_cmd->add_flag("--json", json_out, "emit the table as JSON");

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        AnalysisReport rep = analyze_file(file, opts);
        if (!rep.tree_dump.empty()) {
            std::string ext = opts.emit_tree == "dot" ? ".tree.dot" : ".tree.json";
            std::string out = std::filesystem::path(file).stem().string() + ext;
            std::ofstream(out) << rep.tree_dump;
            std::cerr << "tree written to " << out << "\n";
            rep.tree_dump.clear();
        }
        if (json_out)
            std::cout << rep.to_json().dump(2) << "\n";
        else
            std::cout << rep.to_text();
        if (rep.result == "error") return 2;
        return rep.proved() ? 0 : 1;
    }

    if (!std::filesystem::is_directory(dir)) {
        std::cerr << "not a directory: " << dir << "\n";
        return 2;
    }
    BenchTable table = bench(dir, opts);
    if (json_out)
        std::cout << table.to_json().dump(2) << "\n";
    else
        std::cout << table.to_text();
    return 0;
}
