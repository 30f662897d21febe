// Oblivious chase with derivation levels, witness extraction by provenance
// back-tracing, and CQ entailment by homomorphism search. This module is the
// reference oracle the rewritten programs are verified against.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgdlog/model.hpp"

namespace tgdlog {

// A chase value: a database constant or a labelled null. Null ids are the
// index of the chase step that introduced them.
struct ChaseValue {
    bool is_null = false;
    uint32_t null_id = 0;
    std::string sym;

    static ChaseValue constant(std::string s) { return {false, 0, std::move(s)}; }
    static ChaseValue null(uint32_t id) { return {true, id, {}}; }

    bool operator==(const ChaseValue& o) const {
        return is_null == o.is_null && null_id == o.null_id && sym == o.sym;
    }
    bool operator<(const ChaseValue& o) const {
        if (is_null != o.is_null) return is_null < o.is_null;
        if (is_null) return null_id < o.null_id;
        return sym < o.sym;
    }
    std::string str() const { return is_null ? "_" + std::to_string(null_id) : sym; }
};

struct GroundAtom {
    std::string pred;
    std::vector<ChaseValue> args;

    bool operator==(const GroundAtom& o) const { return pred == o.pred && args == o.args; }
    bool operator<(const GroundAtom& o) const {
        if (pred != o.pred) return pred < o.pred;
        return args < o.args;
    }
    std::string str() const;
};

using Homomorphism = std::map<std::string, ChaseValue>;

struct Provenance {
    bool from_db = true;
    size_t rule_index = 0;            // into sigma, when !from_db
    size_t head_index = 0;            // which head atom this step instantiates
    std::vector<size_t> parents;      // 1-based step indices, when !from_db
    Homomorphism hom;                 // body variables and existentials
};

struct ChaseStep {
    GroundAtom atom;
    uint32_t level = 0;
    Provenance prov;
};

// An ordered chase sequence; step i may only depend on steps < i.
struct ChaseSequence {
    std::vector<ChaseStep> steps;
};

struct ChaseOptions {
    size_t atom_cap = 1'000'000;
    size_t hom_cap = 2'000'000;  // candidate homomorphisms examined per query
};

// All (rule, body homomorphism) pairs applicable to a state, enumerated in
// lexicographic order of (rule index, body image) for determinism.
std::vector<std::pair<size_t, Homomorphism>> applicable_steps(
    const std::vector<GroundAtom>& state, const std::vector<Tgd>& sigma);

struct ChaseLevels {
    std::vector<ChaseStep> atoms;  // in derivation order; atoms[i] has step index i+1
    bool truncated = false;
};

// Breadth-first oblivious chase up to the given derivation level.
ChaseLevels chase_to_level(const Database& db, const std::vector<Tgd>& sigma,
                           uint32_t max_level, const ChaseOptions& opts = {});

enum class EntailStatus { Yes, Unknown };

struct EntailResult {
    EntailStatus status = EntailStatus::Unknown;
    bool truncated = false;     // a resource cap was hit; Unknown is then inconclusive
    ChaseSequence witness;      // minimal-length sequence found, when Yes
    Homomorphism query_hom;     // query variables over the witness (nulls renumbered)
};

// Decides whether some homomorphism maps q into the atoms of a chase
// sequence of length <= max_steps. Sound; complete up to the bound.
EntailResult entails(const Database& db, const std::vector<Tgd>& sigma, const UnionQuery& q,
                     uint32_t max_steps, const ChaseOptions& opts = {});
EntailResult entails(const Database& db, const std::vector<Tgd>& sigma,
                     const ConjunctiveQuery& q, uint32_t max_steps,
                     const ChaseOptions& opts = {});

// Certain answers over dom(D): all constant tuples whose Boolean
// instantiation is entailed within the bound. Nulls never appear.
std::set<std::vector<std::string>> certain_answers(const Database& db,
                                                   const std::vector<Tgd>& sigma,
                                                   const ConjunctiveQuery& q,
                                                   uint32_t max_steps,
                                                   const ChaseOptions& opts = {});

// One step per line: index, atom, provenance.
std::string serialize_trace(const ChaseSequence& seq);

// Validates a sequence by replaying it: every step must be a database fact
// or follow from its recorded rule and parents.
bool replay_sequence(const ChaseSequence& seq, const Database& db,
                     const std::vector<Tgd>& sigma, std::string* error = nullptr);

// True when the sequence's atoms satisfy q under some homomorphism.
bool sequence_satisfies(const ChaseSequence& seq, const ConjunctiveQuery& q);

}  // namespace tgdlog
