// Nonrecursive Datalog evaluation over the N-numerical extension of a
// database. Ordinary predicates are materialized in dependency order;
// predicates whose extension would be too large (the tuple-guess table and
// the guarded-implication gadgets) are evaluated as rule-defined virtual
// predicates, and the wide goal rule is solved by backtracking join with
// forward checking and conflict-directed backjumping.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgdlog/model.hpp"

namespace tgdlog {

// Materializes the numeric side of the extension (Neq stays a filter).
NumericExtension build_extension(const Database& db, uint32_t n);

struct EvalOptions {
    uint64_t timeout_ms = 120000;
    size_t materialize_cap = 400000;  // per-predicate row budget
    bool want_assignment = false;     // extract a satisfying goal assignment
};

enum class EvalStatus { True, False, Tuples, Resource };

struct EvalResult {
    EvalStatus status = EvalStatus::False;
    std::set<std::vector<std::string>> tuples;   // when the goal has output
    std::map<std::string, Term> assignment;      // goal-rule variables
    uint64_t millis = 0;

    bool boolean() const { return status == EvalStatus::True; }
};

EvalResult evaluate(const DatalogProgram& program, const Database& db, uint32_t n,
                    const EvalOptions& opts = {});

// Checks whether a full assignment of the goal-rule variables satisfies the
// goal body (auxiliary circuit variables may be left out; they are derived).
bool check_assignment(const DatalogProgram& program, const Database& db, uint32_t n,
                      const std::map<std::string, Term>& assignment,
                      std::string* error = nullptr);

}  // namespace tgdlog
