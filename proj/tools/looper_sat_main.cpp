// Standalone DIMACS front-end for the built-in CDCL solver. Doubles as a
// stand-in external solver in tests: looper_sat in.cnf [out.txt]
#include <fstream>
#include <iostream>
#include <sstream>

#include "looper/sat_solver.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: looper_sat input.cnf [output]\n";
        return 2;
    }
    std::ifstream in(argv[1]);
    if (!in) {
        std::cerr << "cannot open " << argv[1] << "\n";
        return 2;
    }
    std::ostringstream os;
    os << in.rdbuf();
    auto cnf = looper::parse_dimacs(os.str());
    if (!cnf) {
        std::cerr << "not a DIMACS file\n";
        return 2;
    }
    looper::SatSolution sol = looper::solve_cnf(*cnf);

    std::ostringstream out;
    if (sol.result == looper::SatResult::Sat) {
        out << "SAT\n";
        for (int v = 1; v <= cnf->num_vars; ++v) out << (sol.model[v] ? v : -v) << ' ';
        out << "0\n";
    } else if (sol.result == looper::SatResult::Unsat) {
        out << "UNSAT\n";
    } else {
        out << "INDETERMINATE\n";
    }
    if (argc >= 3) {
        std::ofstream of(argv[2]);
        of << out.str();
    }
    std::cout << out.str();
    return sol.result == looper::SatResult::Sat ? 10
           : sol.result == looper::SatResult::Unsat ? 20
                                                    : 1;
}
