// Compiles a uniformized problem into a nonrecursive Datalog program that
// guesses a bounded chase sequence symbolically and checks chase validity
// and query satisfaction, in three encodings: WIDE (tuple relation of arity
// a+k+4), REDUCED (arity max(a+1,3) via Boolean-gate gadgets), and BITVEC
// (numeric values replaced by bit vectors over {0,1}).

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgdlog/model.hpp"
#include "tgdlog/normalize.hpp"

namespace tgdlog {

// How a goal variable is typed in the symbolic encoding; drives the
// bit-vector expansion.
enum class VarKind { Rel, Flag, Value, RuleNo, Step, Out };

// Goal-rule conjuncts in the wide vocabulary, before arity reduction.
struct ProgramSkeleton {
    std::vector<Atom> r_tuples;               // T(i, r_i, f_i, x_i*, s_i, c_i*)
    std::vector<Atom> r_chase;                // chase-validity conditions
    std::vector<std::vector<Atom>> r_query;   // per union disjunct
    std::map<std::string, VarKind> var_kind;
    const UniformizedProblem* problem = nullptr;
    RewriteParams params;
};

ProgramSkeleton build_skeleton(const UniformizedProblem& u, const RewriteParams& params);

struct BitVectorLayout {
    uint32_t width = 1;
    // numeric goal variable -> its ordered bit variables (values carry a
    // leading payload column for domain constants)
    std::map<std::string, std::vector<std::string>> groups;
};

struct RewriteStats {
    size_t n = 0, a = 0, k = 0, m = 0, l = 0;
    Variant variant = Variant::Wide;
    size_t r_tuples_atoms = 0;
    size_t r_chase_atoms = 0;
    size_t r_query_atoms = 0;
    size_t goal_rule_atoms = 0;  // largest goal rule body
    size_t rule_count = 0;
    size_t total_atoms = 0;
    size_t max_arity = 0;
    size_t goal_variables = 0;

    std::string to_kv() const;
};

struct RewriteResult {
    DatalogProgram program;
    RewriteStats stats;
    std::optional<BitVectorLayout> layout;  // BITVEC only
};

// End-to-end construction for one variant. Throws when params.n_steps is
// below max(rule count, relation count, query atom count).
RewriteResult build_program(const UniformizedProblem& u, const RewriteParams& params);

// Individual lowering stages, exposed for inspection and tests.
RewriteResult assemble_wide(const ProgramSkeleton& skeleton);
RewriteResult reduce_arity(const ProgramSkeleton& skeleton);
RewriteResult to_bitvector(const ProgramSkeleton& skeleton, const BitVectorLayout& layout);

BitVectorLayout make_layout(const ProgramSkeleton& skeleton);
std::vector<uint32_t> to_bits(uint32_t value, uint32_t width);  // most significant first

// The generated bit-vector order family (strict less-than), usable on its own.
std::vector<Rule> lt_bits_rules(uint32_t width);

// A decoded row of the guessed tuple table, mirroring the symbolic encoding.
struct TupleEncodingRow {
    uint32_t index = 0;
    uint32_t rel = 0;
    uint32_t flag = 0;
    std::vector<Term> values;
    uint32_t rule = 0;
    std::vector<uint32_t> parents;
};

// Reconstructs the encoding table and query-atom positions from a
// satisfying goal-rule assignment.
struct DecodedAssignment {
    std::vector<TupleEncodingRow> rows;
    std::vector<uint32_t> query_positions;
};
DecodedAssignment decode_assignment(const RewriteResult& result,
                                    const std::map<std::string, Term>& assignment);

// Canonical names of the goal-rule variables, shared by the builder,
// the evaluator trace and the decoder.
std::string tuple_var_rel(uint32_t i);
std::string tuple_var_flag(uint32_t i);
std::string tuple_var_value(uint32_t i, uint32_t pos);
std::string tuple_var_rule(uint32_t i);
std::string tuple_var_parent(uint32_t i, uint32_t j);
std::string query_var(uint32_t t);

// Predicate names reserved for emitted programs; user schemas must avoid them.
const std::vector<std::string>& reserved_predicates();

}  // namespace tgdlog
