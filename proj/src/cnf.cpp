#include "looper/cnf.hpp"

#include <fstream>
#include <sstream>

namespace looper {

std::string to_dimacs(const CnfFormula& f) {
    std::ostringstream os;
    os << "p cnf " << f.num_vars << ' ' << f.num_clauses << '\n';
    f.for_each_clause([&](const int32_t* begin, const int32_t* end) {
        for (const int32_t* it = begin; it != end; ++it) os << *it << ' ';
        os << "0\n";
    });
    return os.str();
}

void write_dimacs(const CnfFormula& f, const std::string& path) {
    std::ofstream out(path);
    out << to_dimacs(f);
}

std::optional<CnfFormula> parse_dimacs(const std::string& text) {
    CnfFormula f;
    std::istringstream is(text);
    std::string line;
    bool header = false;
    std::vector<int> clause;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == 'c') continue;
        if (line[0] == 'p') {
            std::istringstream hs(line);
            std::string p, cnf;
            long clauses = 0;
            if (!(hs >> p >> cnf >> f.num_vars >> clauses) || cnf != "cnf") return std::nullopt;
            header = true;
            continue;
        }
        std::istringstream ls(line);
        int lit;
        while (ls >> lit) {
            if (lit == 0) {
                f.add_clause(clause);
                clause.clear();
            } else {
                clause.push_back(lit);
            }
        }
    }
    if (!header) return std::nullopt;
    if (!clause.empty()) f.add_clause(clause);
    return f;
}

}  // namespace looper
