#include "doctest.h"

#include <functional>
#include <random>

#include "support/fixtures.hpp"
#include "tgdlog/chase.hpp"

using namespace tgdlog;

namespace {

// Independent mini-saturation: naive fixpoint with unlimited fresh nulls up
// to a depth bound, used to cross-check entailment results.
std::set<GroundAtom> naive_saturate(const Database& db, const std::vector<Tgd>& sigma,
                                    int depth) {
    auto levels = chase_to_level(db, sigma, static_cast<uint32_t>(depth));
    std::set<GroundAtom> out;
    for (const auto& s : levels.atoms) out.insert(s.atom);
    return out;
}

// all-mappings homomorphism check (exponential, for tiny instances only)
bool naive_hom_exists(const ConjunctiveQuery& q, const std::set<GroundAtom>& atoms) {
    std::vector<GroundAtom> pool(atoms.begin(), atoms.end());
    std::vector<const GroundAtom*> image(q.atoms.size(), nullptr);
    std::function<bool(size_t, std::map<std::string, ChaseValue>&)> rec =
        [&](size_t i, std::map<std::string, ChaseValue>& env) -> bool {
        if (i == q.atoms.size()) return true;
        for (const auto& cand : pool) {
            if (cand.pred != q.atoms[i].pred || cand.args.size() != q.atoms[i].args.size())
                continue;
            std::map<std::string, ChaseValue> saved = env;
            bool ok = true;
            for (size_t p = 0; p < cand.args.size() && ok; ++p) {
                const Term& t = q.atoms[i].args[p];
                if (t.is_constant()) {
                    ok = !cand.args[p].is_null && cand.args[p].sym == t.symbol();
                } else {
                    auto it = env.find(t.symbol());
                    if (it == env.end())
                        env.emplace(t.symbol(), cand.args[p]);
                    else
                        ok = it->second == cand.args[p];
                }
            }
            if (ok && rec(i + 1, env)) return true;
            env = std::move(saved);
        }
        return false;
    };
    std::map<std::string, ChaseValue> env;
    (void)image;
    return rec(0, env);
}

}  // namespace

TEST_CASE("applicable_steps on the running example") {
    auto sigma = test::fig1_tgds();
    auto db = test::fig1_facts();
    std::vector<GroundAtom> state;
    for (const auto& f : db.facts) {
        GroundAtom g{f.pred, {}};
        for (const auto& t : f.args) g.args.push_back(ChaseValue::constant(t.symbol()));
        state.push_back(g);
    }
    auto steps = applicable_steps(state, sigma);
    bool ab = false, cd = false;
    for (const auto& [rule, hom] : steps) {
        if (rule != 0) continue;
        if (hom.at("X") == ChaseValue::constant("a") && hom.at("Y") == ChaseValue::constant("b"))
            ab = true;
        if (hom.at("X") == ChaseValue::constant("c") && hom.at("Y") == ChaseValue::constant("d"))
            cd = true;
    }
    CHECK(ab);
    CHECK(cd);
}

TEST_CASE("applicable_steps corner cases") {
    auto sigma = test::fig1_tgds();
    CHECK(applicable_steps({}, sigma).empty());

    std::vector<GroundAtom> state = {
        {"R4", {ChaseValue::constant("a"), ChaseValue::constant("b"), ChaseValue::null(2)}},
        {"R4", {ChaseValue::null(4), ChaseValue::constant("e"), ChaseValue::constant("g")}}};
    size_t sigma4 = 0;
    for (const auto& [rule, hom] : applicable_steps(state, sigma)) {
        (void)hom;
        if (rule == 3) ++sigma4;
    }
    CHECK(sigma4 == 4);  // 2x2 pairings
}

TEST_CASE("chase_to_level levels") {
    auto sigma = test::fig1_tgds();
    auto db = test::fig1_facts();

    SUBCASE("level 0 is the database") {
        auto res = chase_to_level(db, sigma, 0);
        CHECK(res.atoms.size() == db.facts.size());
        for (const auto& s : res.atoms) CHECK(s.level == 0);
    }
    SUBCASE("level 1 contains the expected derived atoms") {
        auto res = chase_to_level(db, sigma, 1);
        bool ab_null = false, null_eg = false;
        for (const auto& s : res.atoms) {
            if (s.atom.pred != "R4") continue;
            const auto& v = s.atom.args;
            if (!v[0].is_null && v[0].sym == "a" && v[1].sym == "b" && v[2].is_null)
                ab_null = true;
            if (v[0].is_null && !v[1].is_null && v[1].sym == "e" && v[2].sym == "g")
                null_eg = true;
        }
        CHECK(ab_null);
        CHECK(null_eg);
    }
    SUBCASE("no rules means the database at every level") {
        auto res = chase_to_level(db, {}, 5);
        CHECK(res.atoms.size() == db.facts.size());
    }
    SUBCASE("monotone in the level") {
        auto r1 = chase_to_level(db, sigma, 1);
        auto r2 = chase_to_level(db, sigma, 2);
        REQUIRE(r1.atoms.size() <= r2.atoms.size());
        for (size_t i = 0; i < r1.atoms.size(); ++i)
            CHECK(r1.atoms[i].atom == r2.atoms[i].atom);
    }
    SUBCASE("deterministic") {
        auto r1 = chase_to_level(db, sigma, 3);
        auto r2 = chase_to_level(db, sigma, 3);
        REQUIRE(r1.atoms.size() == r2.atoms.size());
        for (size_t i = 0; i < r1.atoms.size(); ++i) {
            CHECK(r1.atoms[i].atom == r2.atoms[i].atom);
            CHECK(r1.atoms[i].level == r2.atoms[i].level);
        }
    }
}

TEST_CASE("entails finds the 6-step witness on the running example") {
    auto sigma = test::fig1_tgds();
    auto db = test::fig1_facts();
    auto q = test::fig1_query();
    auto res = entails(db, sigma, q, 6);
    REQUIRE(res.status == EntailStatus::Yes);
    CHECK(res.witness.steps.size() <= 6);
    CHECK(res.query_hom.at("X") == ChaseValue::constant("a"));
    CHECK(res.query_hom.at("Y") == ChaseValue::constant("g"));
    std::string err;
    CHECK(replay_sequence(res.witness, db, sigma, &err));
    INFO(err);
    CHECK(sequence_satisfies(res.witness, q));

    // the six atoms match the expected witness, nulls aside
    std::multiset<std::string> shapes;
    for (const auto& s : res.witness.steps) {
        std::string shape = s.atom.pred;
        for (const auto& v : s.atom.args) shape += "|" + (v.is_null ? "*" : v.sym);
        shapes.insert(shape);
    }
    CHECK(shapes.count("R1|a|b") == 1);
    CHECK(shapes.count("R2|e|g") == 1);
    CHECK(shapes.count("R3|g|a") == 1);
    CHECK(shapes.count("R5|a|g") == 1);
    CHECK(shapes.count("R4|a|b|*") == 1);
    CHECK(shapes.count("R4|*|e|g") == 1);
}

TEST_CASE("entails with a single database atom") {
    auto db = test::fig1_facts();
    auto q = parse_query("? :- R1(a,b).").disjuncts.front();
    auto res = entails(db, {}, q, 1);
    REQUIRE(res.status == EntailStatus::Yes);
    CHECK(res.witness.steps.size() == 1);
}

TEST_CASE("entails is unknown when the fact chain is broken") {
    auto sigma = test::fig1_tgds();
    auto db = parse_facts("R1(a,b). R1(c,d). R2(e,g). R3(g,h).");  // R3(g,a) removed
    auto q = test::fig1_query();
    auto res = entails(db, sigma, q, 20);
    CHECK(res.status == EntailStatus::Unknown);
    CHECK_FALSE(res.truncated);
    // independent check: no homomorphism exists at all in a deep saturation
    CHECK_FALSE(naive_hom_exists(q, naive_saturate(db, sigma, 6)));
}

TEST_CASE("entails soundness cross-check on random small instances") {
    std::mt19937 rng(11);
    auto sigma = test::fig1_tgds();
    const char* names[] = {"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 30; ++trial) {
        Database db;
        int facts = 1 + static_cast<int>(rng() % 6);
        for (int f = 0; f < facts; ++f) {
            int rel = static_cast<int>(rng() % 3) + 1;
            Atom fact{"R" + std::to_string(rel), {}};
            fact.args.push_back(Term::constant(names[rng() % 5]));
            fact.args.push_back(Term::constant(names[rng() % 5]));
            db.add_fact(fact);
        }
        auto q = test::fig1_query();
        auto res = entails(db, sigma, q, 8);
        bool naive = naive_hom_exists(q, naive_saturate(db, sigma, 8));
        if (res.status == EntailStatus::Yes) {
            CHECK(naive);
            std::string err;
            CHECK(replay_sequence(res.witness, db, sigma, &err));
            CHECK(sequence_satisfies(res.witness, q));
        } else if (!naive) {
            CHECK(res.status == EntailStatus::Unknown);
        }
    }
}

TEST_CASE("witness replays through applicable_steps") {
    auto sigma = test::fig1_tgds();
    auto db = test::fig1_facts();
    auto res = entails(db, sigma, test::fig1_query(), 6);
    REQUIRE(res.status == EntailStatus::Yes);
    // prefix replay: every derived step's (rule, hom) is applicable to the prefix
    std::vector<GroundAtom> prefix;
    for (const auto& step : res.witness.steps) {
        if (!step.prov.from_db) {
            auto steps = applicable_steps(prefix, sigma);
            const auto body_vars = atoms_vars(sigma[step.prov.rule_index].body);
            bool found = false;
            for (const auto& [rule, hom] : steps) {
                if (rule != step.prov.rule_index) continue;
                bool same = true;
                for (const auto& [var, val] : step.prov.hom) {
                    if (!body_vars.count(var)) continue;  // existentials are fresh
                    auto it = hom.find(var);
                    if (it == hom.end() || !(it->second == val)) same = false;
                }
                if (same) found = true;
            }
            CHECK(found);
        }
        prefix.push_back(step.atom);
    }
}

TEST_CASE("certain answers") {
    auto db = test::fig1_facts();
    SUBCASE("projection with no rules") {
        auto q = parse_query("q(X) :- R1(X,Y).").disjuncts.front();
        auto ans = certain_answers(db, {}, q, 2);
        CHECK(ans == std::set<std::vector<std::string>>{{"a"}, {"c"}});
    }
    SUBCASE("derived answers") {
        auto q = parse_query("q(X,Y) :- R5(X,Y).").disjuncts.front();
        auto ans = certain_answers(db, test::fig1_tgds(), q, 6);
        CHECK(ans.count({"a", "g"}) == 1);
        for (const auto& t : ans)
            for (const auto& v : t) CHECK(!v.empty());
    }
    SUBCASE("empty database") {
        Database empty;
        auto q = parse_query("q(X) :- R1(X,Y).").disjuncts.front();
        CHECK(certain_answers(empty, {}, q, 2).empty());
    }
}

TEST_CASE("atom cap reports truncation") {
    // a generator that never stops: R(X,Y) -> exists Z: R(Y,Z)
    auto sigma = parse_tgds("R(X,Y) -> exists Z: R(Y,Z).");
    auto db = parse_facts("R(a,b).");
    ChaseOptions opts;
    opts.atom_cap = 40;
    auto res = chase_to_level(db, sigma, 100, opts);
    CHECK(res.truncated);
    auto q = parse_query("? :- R(X,X).").disjuncts.front();
    auto ent = entails(db, sigma, q, 100, opts);
    CHECK(ent.status == EntailStatus::Unknown);
    CHECK(ent.truncated);
}
