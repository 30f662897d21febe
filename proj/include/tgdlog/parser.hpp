// Text formats: .tgd dependencies, .cq queries, .facts databases and
// .dl Datalog programs. Grammars are documented in docs/formats.md.

#pragma once

#include <string>
#include <vector>

#include "tgdlog/model.hpp"

namespace tgdlog {

struct SourceSpan {
    int line = 1;
    int column = 1;
};

class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, const std::string& what)
        : std::runtime_error("line " + std::to_string(span.line) + ", column " +
                             std::to_string(span.column) + ": " + what),
          span_(span) {}
    SourceSpan span() const { return span_; }

private:
    SourceSpan span_;
};

// How numeral tokens in fact files are treated. The default rejects them,
// keeping the data domain non-numeric; FreshCopy admits them as opaque
// constants (the rewriting uses its own fresh numeric domain).
enum class NumericMode { Reject, FreshCopy };

std::vector<Tgd> parse_tgds(const std::string& text);
UnionQuery parse_query(const std::string& text);
Database parse_facts(const std::string& text, NumericMode mode = NumericMode::Reject);
DatalogProgram parse_program(const std::string& text);

std::string serialize(const Tgd& tgd);
std::string serialize(const std::vector<Tgd>& sigma);
std::string serialize(const ConjunctiveQuery& q);
std::string serialize(const UnionQuery& q);
std::string serialize(const Database& db);
std::string serialize(const DatalogProgram& program);
std::string serialize(const Term& t);
std::string serialize(const Atom& a);

}  // namespace tgdlog
