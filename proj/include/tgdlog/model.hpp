// Core logical model: terms, atoms, tgds, conjunctive queries, databases,
// Datalog programs and the numeric extension used by rewritten programs.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgdlog {

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A term is a constant symbol, a variable, or a natural number.
// Constants and numbers live in disjoint value spaces; variables start
// with an uppercase letter.
class Term {
public:
    enum class Kind { Constant, Variable, Number };

    static Term constant(std::string sym) { return Term(Kind::Constant, std::move(sym), 0); }
    static Term variable(std::string name) { return Term(Kind::Variable, std::move(name), 0); }
    static Term number(uint32_t n) { return Term(Kind::Number, {}, n); }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    bool is_variable() const { return kind_ == Kind::Variable; }
    bool is_number() const { return kind_ == Kind::Number; }

    const std::string& symbol() const { return sym_; }
    uint32_t num() const { return num_; }

    bool operator==(const Term& o) const {
        return kind_ == o.kind_ && sym_ == o.sym_ && num_ == o.num_;
    }
    bool operator!=(const Term& o) const { return !(*this == o); }
    bool operator<(const Term& o) const {
        if (kind_ != o.kind_) return kind_ < o.kind_;
        if (kind_ == Kind::Number) return num_ < o.num_;
        return sym_ < o.sym_;
    }

private:
    Term(Kind k, std::string s, uint32_t n) : kind_(k), sym_(std::move(s)), num_(n) {}
    Kind kind_;
    std::string sym_;
    uint32_t num_;
};

struct Atom {
    std::string pred;
    std::vector<Term> args;

    size_t arity() const { return args.size(); }
    bool operator==(const Atom& o) const { return pred == o.pred && args == o.args; }
    bool operator!=(const Atom& o) const { return !(*this == o); }
    bool operator<(const Atom& o) const {
        if (pred != o.pred) return pred < o.pred;
        return args < o.args;
    }
};

// Tuple-generating dependency body -> exists Z: head.
// Invariants (checked by validate): nonempty body and head, every
// non-existential head variable occurs in the body, existentials are
// disjoint from body variables, and no constants anywhere.
struct Tgd {
    std::vector<Atom> body;
    std::vector<Atom> head;
    std::vector<std::string> existentials;

    // Normal form: single head atom, at most one existential.
    bool is_normal_form() const { return head.size() == 1 && existentials.size() <= 1; }
};

void validate_tgd(const Tgd& tgd);

struct ConjunctiveQuery {
    std::vector<Atom> atoms;
    std::vector<std::string> output_vars;

    bool is_boolean() const { return output_vars.empty(); }
};

void validate_query(const ConjunctiveQuery& q);

struct UnionQuery {
    std::vector<ConjunctiveQuery> disjuncts;
};

void validate_query(const UnionQuery& q);

// A database: schema (predicate -> arity), ground facts over constants,
// and the active domain (exactly the constants occurring in facts).
struct Database {
    std::map<std::string, size_t> schema;
    std::set<Atom> facts;
    std::set<std::string> domain;

    // Inserts a fact, extending the schema; throws on arity conflicts
    // or non-constant arguments.
    void add_fact(const Atom& fact);
    void declare(const std::string& pred, size_t arity);
    bool empty() const { return facts.empty(); }
};

// Schema consistency across tgds, query and database.
void validate_problem(const std::vector<Tgd>& sigma, const ConjunctiveQuery& q,
                      const Database& db);

// The N-numerical extension: numbers 0..N with Num = {1..N},
// Succ = {(i,i+1) : 0 <= i < N}, Lt = {(i,j) : 0 <= i < j <= N},
// DNum = dom(D) + {0..N}, Zero = {0}, One = {1}, and Neq(a,b) iff a != b.
struct NumericExtension {
    uint32_t n_max = 0;
    std::set<std::string> dom;  // copied from the paired database

    static NumericExtension build(const Database& db, uint32_t n);

    std::vector<uint32_t> num() const;
    std::vector<std::pair<uint32_t, uint32_t>> succ() const;
    std::vector<std::pair<uint32_t, uint32_t>> lt() const;
    bool dnum_contains(const Term& ground) const;
    size_t dnum_size() const { return dom.size() + n_max + 1; }
};

struct Rule {
    Atom head;
    std::vector<Atom> body;
};

// Nonrecursive Datalog program with a designated goal predicate.
// The goal has arity 0 for Boolean queries and output arity otherwise.
struct DatalogProgram {
    std::vector<Rule> rules;
    std::string goal = "goal";
    std::set<std::string> edb;

    size_t goal_arity() const;
    std::set<std::string> idb_predicates() const;
    std::map<std::string, size_t> predicate_arities() const;
};

size_t max_arity(const DatalogProgram& program);
bool check_nonrecursive(const DatalogProgram& program);

// Topological order of IDB predicates; throws ValidationError when the
// dependency graph has a cycle.
std::vector<std::string> stratify(const DatalogProgram& program);

enum class Variant { Wide, Reduced, BitVec };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

// Parameters for the rewriting: the chase-sequence length N and the
// target encoding variant.
struct RewriteParams {
    uint32_t n_steps = 1;
    Variant variant = Variant::Reduced;
    std::string gamma_note;
};

// Alpha-canonical form: variables renamed V0,V1,... in order of first
// occurrence, making structural comparison insensitive to naming.
Tgd alpha_canonical(const Tgd& tgd);
ConjunctiveQuery alpha_canonical(const ConjunctiveQuery& q);
bool alpha_equal(const Tgd& a, const Tgd& b);
bool alpha_equal(const ConjunctiveQuery& a, const ConjunctiveQuery& b);

// Variable utilities shared by several modules.
std::set<std::string> atom_vars(const Atom& atom);
std::set<std::string> atoms_vars(const std::vector<Atom>& atoms);
bool is_variable_name(const std::string& s);
bool is_constant_name(const std::string& s);

}  // namespace tgdlog
