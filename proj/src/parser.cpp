#include "tgdlog/parser.hpp"

#include <cctype>
#include <sstream>

namespace tgdlog {

namespace {

enum class Tok { Ident, Number, LParen, RParen, Comma, Dot, Colon, Arrow, Implies, Query, End };

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws();
        SourceSpan span{line_, col_};
        if (pos_ >= text_.size()) return {Tok::End, "", span};
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                id += take();
            return {Tok::Ident, id, span};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                num += take();
            return {Tok::Number, num, span};
        }
        switch (c) {
            case '(': take(); return {Tok::LParen, "(", span};
            case ')': take(); return {Tok::RParen, ")", span};
            case ',': take(); return {Tok::Comma, ",", span};
            case '.': take(); return {Tok::Dot, ".", span};
            case '?': take(); return {Tok::Query, "?", span};
            case ':':
                take();
                if (pos_ < text_.size() && text_[pos_] == '-') {
                    take();
                    return {Tok::Implies, ":-", span};
                }
                return {Tok::Colon, ":", span};
            case '-':
                take();
                if (pos_ < text_.size() && text_[pos_] == '>') {
                    take();
                    return {Tok::Arrow, "->", span};
                }
                throw ParseError(span, "stray '-'");
            default:
                throw ParseError(span, std::string("unexpected character '") + c + "'");
        }
    }

private:
    char take() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }
    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Where a term appears decides which term kinds are admissible.
enum class TermContext { RuleLike, Fact, Program };

class Parser {
public:
    Parser(const std::string& text, NumericMode mode) : lex_(text), mode_(mode) { advance(); }

    bool at_end() const { return cur_.kind == Tok::End; }
    SourceSpan span() const { return cur_.span; }

    Token expect(Tok kind, const std::string& what) {
        if (cur_.kind != kind) throw ParseError(cur_.span, "expected " + what);
        Token t = cur_;
        advance();
        return t;
    }

    bool accept(Tok kind) {
        if (cur_.kind != kind) return false;
        advance();
        return true;
    }

    bool peek_ident(const std::string& word) const {
        return cur_.kind == Tok::Ident && cur_.text == word;
    }

    Term parse_term(TermContext ctx) {
        if (cur_.kind == Tok::Number) {
            Token t = cur_;
            advance();
            if (ctx == TermContext::Program) return Term::number(std::stoul(t.text));
            if (ctx == TermContext::Fact && mode_ == NumericMode::FreshCopy)
                return Term::constant(t.text);
            throw ParseError(t.span, "numeral not allowed here (see --numeric-domain)");
        }
        Token t = expect(Tok::Ident, "a term");
        if (is_variable_name(t.text)) {
            if (ctx == TermContext::Fact)
                throw ParseError(t.span, "variable " + t.text + " in a fact");
            return Term::variable(t.text);
        }
        return Term::constant(t.text);
    }

    Atom parse_atom(TermContext ctx) {
        Token name = expect(Tok::Ident, "a predicate name");
        Atom atom{name.text, {}};
        if (accept(Tok::LParen)) {
            atom.args.push_back(parse_term(ctx));
            while (accept(Tok::Comma)) atom.args.push_back(parse_term(ctx));
            expect(Tok::RParen, "')'");
        }
        return atom;
    }

    std::vector<Atom> parse_atoms(TermContext ctx) {
        std::vector<Atom> out{parse_atom(ctx)};
        while (accept(Tok::Comma)) out.push_back(parse_atom(ctx));
        return out;
    }

    Token current() const { return cur_; }
    void advance() { cur_ = lex_.next(); }

private:
    Lexer lex_;
    NumericMode mode_;
    Token cur_;
};

void check_schema(std::map<std::string, size_t>& arities, const Atom& a, SourceSpan span) {
    auto it = arities.find(a.pred);
    if (it == arities.end()) {
        arities.emplace(a.pred, a.arity());
    } else if (it->second != a.arity()) {
        throw ParseError(span, "arity conflict for predicate " + a.pred + ": " +
                                   std::to_string(it->second) + " vs " +
                                   std::to_string(a.arity()));
    }
}

}  // namespace

std::vector<Tgd> parse_tgds(const std::string& text) {
    Parser p(text, NumericMode::Reject);
    std::vector<Tgd> out;
    std::map<std::string, size_t> arities;
    while (!p.at_end()) {
        SourceSpan start = p.span();
        Tgd tgd;
        tgd.body = p.parse_atoms(TermContext::RuleLike);
        p.expect(Tok::Arrow, "'->'");
        if (p.peek_ident("exists")) {
            p.advance();
            tgd.existentials.push_back(
                p.expect(Tok::Ident, "an existential variable").text);
            while (p.accept(Tok::Comma))
                tgd.existentials.push_back(
                    p.expect(Tok::Ident, "an existential variable").text);
            for (const auto& v : tgd.existentials)
                if (!is_variable_name(v))
                    throw ParseError(start, "existential " + v + " is not a variable name");
            p.expect(Tok::Colon, "':'");
        }
        tgd.head = p.parse_atoms(TermContext::RuleLike);
        p.expect(Tok::Dot, "'.'");
        try {
            validate_tgd(tgd);
        } catch (const ValidationError& e) {
            throw ParseError(start, e.what());
        }
        for (const auto& a : tgd.body) check_schema(arities, a, start);
        for (const auto& a : tgd.head) check_schema(arities, a, start);
        out.push_back(std::move(tgd));
    }
    return out;
}

UnionQuery parse_query(const std::string& text) {
    Parser p(text, NumericMode::Reject);
    UnionQuery uq;
    std::map<std::string, size_t> arities;
    std::string head_name;
    while (!p.at_end()) {
        SourceSpan start = p.span();
        ConjunctiveQuery cq;
        std::string name;
        if (p.accept(Tok::Query)) {
            name = "?";
        } else {
            Atom head = p.parse_atom(TermContext::RuleLike);
            name = head.pred;
            for (const auto& t : head.args) {
                if (!t.is_variable())
                    throw ParseError(start, "query head arguments must be variables");
                cq.output_vars.push_back(t.symbol());
            }
        }
        p.expect(Tok::Implies, "':-'");
        cq.atoms = p.parse_atoms(TermContext::RuleLike);
        p.expect(Tok::Dot, "'.'");
        try {
            validate_query(cq);
        } catch (const ValidationError& e) {
            throw ParseError(start, e.what());
        }
        for (const auto& a : cq.atoms) check_schema(arities, a, start);
        if (uq.disjuncts.empty()) {
            head_name = name;
        } else if (name != head_name || cq.output_vars.size() !=
                                            uq.disjuncts.front().output_vars.size()) {
            throw ParseError(start, "query rules must share one head");
        }
        uq.disjuncts.push_back(std::move(cq));
    }
    if (uq.disjuncts.empty()) throw ParseError({1, 1}, "empty query");
    return uq;
}

Database parse_facts(const std::string& text, NumericMode mode) {
    Parser p(text, mode);
    Database db;
    while (!p.at_end()) {
        SourceSpan start = p.span();
        Atom fact = p.parse_atom(TermContext::Fact);
        p.expect(Tok::Dot, "'.'");
        try {
            db.add_fact(fact);
        } catch (const ValidationError& e) {
            throw ParseError(start, e.what());
        }
    }
    return db;
}

DatalogProgram parse_program(const std::string& text) {
    DatalogProgram prog;
    // The goal declaration travels as a structured comment.
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        auto pos = line.find("% goal:");
        if (pos != std::string::npos) {
            std::istringstream rest(line.substr(pos + 7));
            rest >> prog.goal;
            break;
        }
    }
    Parser p(text, NumericMode::Reject);
    std::map<std::string, size_t> arities;
    while (!p.at_end()) {
        SourceSpan start = p.span();
        Rule rule;
        rule.head = p.parse_atom(TermContext::Program);
        if (p.accept(Tok::Implies)) rule.body = p.parse_atoms(TermContext::Program);
        p.expect(Tok::Dot, "'.'");
        check_schema(arities, rule.head, start);
        for (const auto& a : rule.body) check_schema(arities, a, start);
        prog.rules.push_back(std::move(rule));
    }
    auto idb = prog.idb_predicates();
    for (const auto& r : prog.rules)
        for (const auto& a : r.body)
            if (!idb.count(a.pred)) prog.edb.insert(a.pred);
    return prog;
}

std::string serialize(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Number: return std::to_string(t.num());
        default: return t.symbol();
    }
}

std::string serialize(const Atom& a) {
    std::string out = a.pred;
    if (!a.args.empty()) {
        out += "(";
        for (size_t i = 0; i < a.args.size(); ++i) {
            if (i) out += ",";
            out += serialize(a.args[i]);
        }
        out += ")";
    }
    return out;
}

namespace {

std::string join_atoms(const std::vector<Atom>& atoms) {
    std::string out;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += ", ";
        out += serialize(atoms[i]);
    }
    return out;
}

}  // namespace

std::string serialize(const Tgd& tgd) {
    std::string out = join_atoms(tgd.body) + " -> ";
    if (!tgd.existentials.empty()) {
        out += "exists ";
        for (size_t i = 0; i < tgd.existentials.size(); ++i) {
            if (i) out += ",";
            out += tgd.existentials[i];
        }
        out += ": ";
    }
    out += join_atoms(tgd.head) + ".";
    return out;
}

std::string serialize(const std::vector<Tgd>& sigma) {
    std::string out;
    for (const auto& t : sigma) out += serialize(t) + "\n";
    return out;
}

std::string serialize(const ConjunctiveQuery& q) {
    std::string out;
    if (q.is_boolean()) {
        out = "?";
    } else {
        out = "q(";
        for (size_t i = 0; i < q.output_vars.size(); ++i) {
            if (i) out += ",";
            out += q.output_vars[i];
        }
        out += ")";
    }
    return out + " :- " + join_atoms(q.atoms) + ".";
}

std::string serialize(const UnionQuery& q) {
    std::string out;
    for (const auto& d : q.disjuncts) out += serialize(d) + "\n";
    return out;
}

std::string serialize(const Database& db) {
    std::string out;
    for (const auto& f : db.facts) out += serialize(f) + ".\n";
    return out;
}

std::string serialize(const DatalogProgram& program) {
    std::string out = "% goal: " + program.goal + "\n";
    if (!program.edb.empty()) {
        out += "% edb:";
        for (const auto& p : program.edb) out += " " + p;
        out += "\n";
    }
    for (const auto& r : program.rules) {
        out += serialize(r.head);
        if (!r.body.empty()) out += " :- " + join_atoms(r.body);
        out += ".\n";
    }
    return out;
}

}  // namespace tgdlog
