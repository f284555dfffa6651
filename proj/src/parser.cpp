#include "looper/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

namespace looper {

namespace {

enum class TokKind { Name, Var, Int, Punct, End };

struct Token {
    TokKind kind;
    std::string text;
    mpz_class value;
    int line = 1;
    int column = 1;
};

bool symbol_char(char c) {
    static const std::string chars = "+-*/\\^<>=~:.?@#&";
    return chars.find(c) != std::string::npos;
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_layout();
        tok_.line = line_;
        tok_.column = col_;
        if (pos_ >= text_.size()) {
            tok_ = {TokKind::End, "", 0, line_, col_};
            return;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                digits += get();
            tok_ = {TokKind::Int, digits, mpz_class(digits), tok_.line, tok_.column};
            return;
        }
        if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
            std::string name;
            while (pos_ < text_.size() && ident_char(text_[pos_])) name += get();
            tok_ = {TokKind::Var, name, 0, tok_.line, tok_.column};
            return;
        }
        if (std::islower(static_cast<unsigned char>(c))) {
            std::string name;
            while (pos_ < text_.size() && ident_char(text_[pos_])) name += get();
            tok_ = {TokKind::Name, name, 0, tok_.line, tok_.column};
            return;
        }
        if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == '|' || c == '!' ||
            c == ';') {
            tok_ = {TokKind::Punct, std::string(1, get()), 0, tok_.line, tok_.column};
            return;
        }
        if (symbol_char(c)) {
            // a lone '.' followed by layout or EOF ends a clause
            if (c == '.' && (pos_ + 1 >= text_.size() || !symbol_char(text_[pos_ + 1]))) {
                get();
                tok_ = {TokKind::Punct, ".", 0, tok_.line, tok_.column};
                return;
            }
            std::string sym;
            while (pos_ < text_.size() && symbol_char(text_[pos_])) {
                if (text_[pos_] == '.' &&
                    (pos_ + 1 >= text_.size() || !symbol_char(text_[pos_ + 1])))
                    break;
                sym += get();
            }
            tok_ = {TokKind::Punct, sym, 0, tok_.line, tok_.column};
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    char get() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_layout() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

const std::set<std::string> kUnsupportedPredicates = {
    "!",   "\\+",   ";",      "->",     "=",       "\\=",   "==",     "\\==",  "=..",
    "@<",  "@>",    "@=<",    "@>=",    "call",    "not",   "fail",   "true",  "var",
    "nonvar", "atom", "number", "is_list", "findall", "bagof", "setof", "assert",
    "asserta", "assertz", "retract", "between", "length", "halt"};

const std::set<std::string> kUnsupportedArith = {
    "/",  "//", "mod", "rem", "^",  "**",  "min", "max",
    "abs", ">>", "<<",  "\\/", "/\\", "xor", "msb", "gcd", "sign"};

int infix_priority(const std::string& op) {
    if (op == "is" || op == ">" || op == ">=" || op == "=<" || op == "<" || op == "=:=" ||
        op == "=/=" || op == "=\\=")
        return 700;
    if (op == "+" || op == "-") return 500;
    // the division family parses but is rejected during validation
    if (op == "*" || op == "/" || op == "//" || op == "mod" || op == "rem" || op == ">>" ||
        op == "<<")
        return 400;
    if (op == "^" || op == "**") return 200;
    return 0;
}

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    ParsedFile parse() {
        ParsedFile file;
        while (lex_.peek().kind != TokKind::End) {
            if (lex_.peek().kind == TokKind::Punct && lex_.peek().text == ":-") {
                file.queries.push_back(parse_directive());
            } else {
                file.program.clauses.push_back(parse_clause());
            }
        }
        for (const auto& q : file.queries) validate_query(q, file.program);
        return file;
    }

    ModedQuery parse_single_directive() {
        expect_punct(":-");
        ModedQuery q = parse_nt_query();
        return q;
    }

private:
    Lexer lex_;
    std::unordered_map<std::string, TermPtr> clause_vars_;
    int next_var_id_ = 0;
    int anon_count_ = 0;

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, lex_.peek().line, lex_.peek().column);
    }

    void expect_punct(const std::string& p) {
        Token t = lex_.take();
        if (t.kind != TokKind::Punct || t.text != p)
            throw ParseError("expected '" + p + "', found '" + t.text + "'", t.line, t.column);
    }

    bool peek_punct(const std::string& p) {
        return lex_.peek().kind == TokKind::Punct && lex_.peek().text == p;
    }

    ModedQuery parse_directive() {
        expect_punct(":-");
        ModedQuery q = parse_nt_query();
        return q;
    }

    ModedQuery parse_nt_query() {
        Token name = lex_.take();
        if (name.kind != TokKind::Name || name.text != "nt_query")
            throw ParseError("unsupported directive '" + name.text + "'", name.line, name.column);
        expect_punct("(");
        Token pred = lex_.take();
        if (pred.kind != TokKind::Name)
            throw ParseError("expected predicate name in nt_query", pred.line, pred.column);
        ModedQuery q;
        std::ostringstream src;
        src << ":- nt_query(" << pred.text;
        std::vector<TermPtr> args;
        if (peek_punct("(")) {
            lex_.take();
            src << '(';
            bool first = true;
            while (true) {
                ArgMode m = parse_mode();
                if (!first) src << ',';
                src << (m == ArgMode::Free ? "-" : m == ArgMode::Input ? "+" : "+int");
                first = false;
                q.modes.push_back(m);
                int idx = static_cast<int>(q.modes.size());
                args.push_back(mk_var(idx - 1, "X" + std::to_string(idx), m != ArgMode::Free,
                                      m == ArgMode::IntegerInput));
                if (peek_punct(",")) {
                    lex_.take();
                    continue;
                }
                break;
            }
            expect_punct(")");
            src << ')';
        }
        expect_punct(")");
        expect_punct(".");
        src << ").";
        q.atom = mk_compound(pred.text, std::move(args));
        q.source_text = src.str();
        return q;
    }

    ArgMode parse_mode() {
        Token t = lex_.take();
        if (t.kind == TokKind::Punct && t.text == "-") return ArgMode::Free;
        if (t.kind == TokKind::Punct && t.text == "+") {
            if (lex_.peek().kind == TokKind::Name && lex_.peek().text == "int") {
                lex_.take();
                return ArgMode::IntegerInput;
            }
            return ArgMode::Input;
        }
        if (t.kind == TokKind::Punct && t.text == "+int") return ArgMode::IntegerInput;
        throw ParseError("unknown mode token '" + t.text + "'", t.line, t.column);
    }

    Clause parse_clause() {
        clause_vars_.clear();
        Token head_tok = lex_.peek();
        TermPtr head = parse_term(699);
        if (!head->is_compound())
            throw ParseError("clause head must be an atom", head_tok.line, head_tok.column);
        if (is_builtin_functor(head->name, head->arity()))
            throw ParseError("built-in " + head->name + "/2 not allowed as clause head",
                             head_tok.line, head_tok.column);
        Clause clause;
        clause.head = head;
        if (peek_punct(":-")) {
            lex_.take();
            while (true) {
                Token body_tok = lex_.peek();
                TermPtr atom = parse_term(700);
                validate_body_atom(atom, body_tok);
                clause.body.push_back(atom);
                if (peek_punct(",")) {
                    lex_.take();
                    continue;
                }
                break;
            }
        }
        expect_punct(".");
        return clause;
    }

    void validate_body_atom(const TermPtr& atom, const Token& where) {
        if (!atom->is_compound())
            throw ParseError("body atom must be an atom", where.line, where.column);
        if (is_builtin_functor(atom->name, atom->arity())) {
            if (atom->name == "is") {
                check_arith(atom->args[1], where);
            } else {
                check_arith(atom->args[0], where);
                check_arith(atom->args[1], where);
            }
            return;
        }
        if (kUnsupportedPredicates.count(atom->name) || kUnsupportedArith.count(atom->name))
            throw ParseError("unsupported built-in " + atom->name, where.line, where.column);
    }

    void check_arith(const TermPtr& t, const Token& where) {
        if (t->is_var() || t->is_int()) return;
        if (t->name == "-" && t->arity() == 1) {
            check_arith(t->args[0], where);
            return;
        }
        if ((t->name == "+" || t->name == "-" || t->name == "*") && t->arity() == 2) {
            check_arith(t->args[0], where);
            check_arith(t->args[1], where);
            return;
        }
        if (kUnsupportedArith.count(t->name))
            throw ParseError("unsupported built-in " + t->name, where.line, where.column);
        // other compounds parse; the analysis treats such calls as dead ends
    }

    TermPtr parse_term(int max_prio) {
        TermPtr lhs = parse_unary(max_prio);
        int limit = max_prio;
        while (lex_.peek().kind == TokKind::Punct ||
               (lex_.peek().kind == TokKind::Name &&
                (lex_.peek().text == "is" || lex_.peek().text == "mod" ||
                 lex_.peek().text == "rem"))) {
            std::string op = lex_.peek().text;
            int prio = infix_priority(op);
            if (prio == 0 || prio > limit) break;
            lex_.take();
            if (op == "=\\=") op = "=/=";
            if (prio == 700) {
                TermPtr rhs = parse_term(699);
                lhs = mk_compound(op, {lhs, rhs});
                limit = 699;  // xfx: no chaining of comparisons
            } else {
                TermPtr rhs = parse_term(prio - 1);
                lhs = mk_compound(op, {lhs, rhs});
            }
        }
        return lhs;
    }

    TermPtr parse_unary(int max_prio) {
        if (peek_punct("-") && max_prio >= 200) {
            lex_.take();
            TermPtr operand = parse_unary(200);
            if (operand->is_int()) return mk_int(-operand->value);
            return mk_compound("-", {operand});
        }
        return parse_primary();
    }

    TermPtr parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
            case TokKind::Int:
                return mk_int(t.value);
            case TokKind::Var:
                return intern_var(t.text);
            case TokKind::Name: {
                if (peek_punct("(")) {
                    lex_.take();
                    std::vector<TermPtr> args;
                    while (true) {
                        args.push_back(parse_term(699));
                        if (peek_punct(",")) {
                            lex_.take();
                            continue;
                        }
                        break;
                    }
                    expect_punct(")");
                    return mk_compound(t.text, std::move(args));
                }
                return mk_atom(t.text);
            }
            case TokKind::Punct:
                if (t.text == "(") {
                    TermPtr inner = parse_term(700);
                    expect_punct(")");
                    return inner;
                }
                if (t.text == "[") return parse_list();
                throw ParseError("unexpected token '" + t.text + "'", t.line, t.column);
            case TokKind::End:
                throw ParseError("unexpected end of input", t.line, t.column);
        }
        throw ParseError("unexpected token", t.line, t.column);
    }

    TermPtr parse_list() {
        if (peek_punct("]")) {
            lex_.take();
            return mk_atom("[]");
        }
        std::vector<TermPtr> items;
        items.push_back(parse_term(699));
        while (peek_punct(",")) {
            lex_.take();
            items.push_back(parse_term(699));
        }
        TermPtr tail = mk_atom("[]");
        if (peek_punct("|")) {
            lex_.take();
            tail = parse_term(699);
        }
        expect_punct("]");
        for (auto it = items.rbegin(); it != items.rend(); ++it)
            tail = mk_compound(".", {*it, tail});
        return tail;
    }

    TermPtr intern_var(const std::string& name) {
        if (name == "_") {
            return mk_var(next_var_id_++, "_" + std::to_string(++anon_count_));
        }
        auto it = clause_vars_.find(name);
        if (it != clause_vars_.end()) return it->second;
        TermPtr v = mk_var(next_var_id_++, name);
        clause_vars_.emplace(name, v);
        return v;
    }

    void validate_query(const ModedQuery& q, const Program& program) {
        if (!program.defines(q.atom->name, q.atom->arity()))
            throw ParseError("nt_query arity mismatch: no clauses for " + q.atom->name + "/" +
                                 std::to_string(q.atom->arity()),
                             1, 1);
    }
};

}  // namespace

std::vector<int> Program::matching(const std::string& functor, int arity) const {
    std::vector<int> out;
    for (size_t i = 0; i < clauses.size(); ++i) {
        const auto& h = clauses[i].head;
        if (h->name == functor && h->arity() == arity) out.push_back(static_cast<int>(i));
    }
    return out;
}

bool Program::defines(const std::string& functor, int arity) const {
    return !matching(functor, arity).empty();
}

ParsedFile parse_file(const std::string& text) { return Parser(text).parse(); }

Program parse_program(const std::string& text) { return parse_file(text).program; }

ModedQuery parse_query_directive(const std::string& text, const Program* program) {
    Parser p(text);
    ModedQuery q = p.parse_single_directive();
    if (program && !program->defines(q.atom->name, q.atom->arity()))
        throw ParseError("nt_query arity mismatch: no clauses for " + q.atom->name + "/" +
                             std::to_string(q.atom->arity()),
                         1, 1);
    return q;
}

std::string pretty_print(const Program& program) {
    std::ostringstream os;
    for (const auto& c : program.clauses) {
        os << term_to_string(c.head);
        if (!c.body.empty()) {
            os << " :- ";
            for (size_t i = 0; i < c.body.size(); ++i) {
                if (i) os << ", ";
                os << term_to_string(c.body[i]);
            }
        }
        os << ".\n";
    }
    return os.str();
}

std::string pretty_print(const ModedQuery& query) { return query.source_text; }

bool program_equal(const Program& a, const Program& b) {
    if (a.clauses.size() != b.clauses.size()) return false;
    for (size_t i = 0; i < a.clauses.size(); ++i) {
        const Clause& ca = a.clauses[i];
        const Clause& cb = b.clauses[i];
        if (!term_equal_by_name(ca.head, cb.head)) return false;
        if (ca.body.size() != cb.body.size()) return false;
        for (size_t j = 0; j < ca.body.size(); ++j)
            if (!term_equal_by_name(ca.body[j], cb.body[j])) return false;
    }
    return true;
}

}  // namespace looper
