// Normal-form transformation (single-atom heads, at most one existential)
// and uniformization of arities and body widths for the rewriting.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "tgdlog/model.hpp"

namespace tgdlog {

struct NormalizationReport {
    std::vector<std::string> aux_predicates;
    size_t size_before = 0;  // total atom count of the input
    size_t size_after = 0;
};

// Rewrites arbitrary tgds into normal form. Multi-atom heads are split;
// multi-existential heads are chained through auxiliary predicates that
// carry the frontier variables, one existential per rule.
std::pair<std::vector<Tgd>, NormalizationReport> to_normal_form(const std::vector<Tgd>& sigma);

// The uniformized problem: every predicate has arity `a`, every body has
// exactly `k` atoms. Shorter tuples are padded by repeating the first
// entry, shorter bodies by repeating the first atom; query atoms are
// padded with globally fresh variables.
struct UniformizedProblem {
    std::vector<Tgd> sigma_u;
    UnionQuery query_u;
    size_t a = 1;
    size_t k = 1;
    std::vector<Rule> padding_rules;                  // padded(X1..Xr,X1,..) :- original(X1..Xr)
    std::map<std::string, std::string> padded_name;   // original -> name used in sigma_u/query_u
    std::vector<std::string> relation_order;          // relation j is relation_order[j-1]
    std::map<std::string, size_t> original_arity;

    size_t relation_count() const { return relation_order.size(); }
    size_t relation_number(const std::string& padded) const;
    const ConjunctiveQuery& single_query() const { return query_u.disjuncts.front(); }
};

UniformizedProblem uniformize(const std::vector<Tgd>& sigma, const ConjunctiveQuery& q);
UniformizedProblem uniformize(const std::vector<Tgd>& sigma, const UnionQuery& q);

// Applies the padding rules to a database: one padded fact per original
// fact of a schema predicate.
Database pad_database(const UniformizedProblem& u, const Database& db);

}  // namespace tgdlog
