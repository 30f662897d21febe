#include "doctest.h"

#include <functional>
#include <random>

#include "tgdlog/model.hpp"
#include "tgdlog/parser.hpp"

using namespace tgdlog;

TEST_CASE("max_arity basics") {
    DatalogProgram p;
    p.goal = "goal";
    SUBCASE("single unary atom") {
        p.rules.push_back({Atom{"goal", {}}, {Atom{"one", {Term::variable("X")}}}});
        CHECK(max_arity(p) == 1);
    }
    SUBCASE("empty rule set with propositional goal") { CHECK(max_arity(p) == 0); }
}

TEST_CASE("check_nonrecursive") {
    DatalogProgram p;
    SUBCASE("chain is nonrecursive") {
        p.rules.push_back({Atom{"p", {}}, {Atom{"q", {}}}});
        p.rules.push_back({Atom{"q", {}}, {Atom{"r", {}}}});
        p.edb.insert("r");
        CHECK(check_nonrecursive(p));
    }
    SUBCASE("self loop is recursive") {
        p.rules.push_back({Atom{"p", {}}, {Atom{"p", {}}}});
        CHECK_FALSE(check_nonrecursive(p));
    }
    SUBCASE("two-step cycle is recursive") {
        p.rules.push_back({Atom{"p", {}}, {Atom{"q", {}}}});
        p.rules.push_back({Atom{"q", {}}, {Atom{"p", {}}}});
        CHECK_FALSE(check_nonrecursive(p));
    }
}

// brute-force cycle search over all paths, for cross-checking
namespace {
bool has_cycle_brute(const DatalogProgram& p) {
    std::map<std::string, std::set<std::string>> g;
    for (const auto& r : p.rules)
        for (const auto& a : r.body) g[r.head.pred].insert(a.pred);
    std::set<std::string> preds;
    for (const auto& [h, deps] : g) {
        preds.insert(h);
        for (const auto& d : deps) preds.insert(d);
    }
    for (const auto& start : preds) {
        // walk every simple path from start
        std::function<bool(const std::string&, std::set<std::string>&)> walk =
            [&](const std::string& at, std::set<std::string>& seen) -> bool {
            for (const auto& next : g[at]) {
                if (next == start) return true;
                if (seen.insert(next).second) {
                    if (walk(next, seen)) return true;
                    seen.erase(next);
                }
            }
            return false;
        };
        std::set<std::string> seen;
        if (walk(start, seen)) return true;
    }
    return false;
}
}  // namespace

TEST_CASE("check_nonrecursive agrees with brute-force cycle search") {
    // random small dependency graphs
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        DatalogProgram p;
        int preds = 2 + static_cast<int>(rng() % 8);
        int rules = 1 + static_cast<int>(rng() % 10);
        for (int r = 0; r < rules; ++r) {
            std::string h = "p" + std::to_string(rng() % preds);
            std::string b = "p" + std::to_string(rng() % preds);
            p.rules.push_back({Atom{h, {}}, {Atom{b, {}}}});
        }
        CHECK(check_nonrecursive(p) == !has_cycle_brute(p));
    }
}

TEST_CASE("alpha canonicalization") {
    auto t1 = parse_tgds("R1(X,Y) -> exists Z: R4(X,Y,Z).").front();
    auto t2 = parse_tgds("R1(A,B) -> exists W: R4(A,B,W).").front();
    auto t3 = parse_tgds("R1(Y,X) -> exists Z: R4(X,Y,Z).").front();
    CHECK(alpha_equal(t1, t2));
    CHECK_FALSE(alpha_equal(t1, t3));

    auto q1 = parse_query("? :- R5(X,Y), R3(Y,X).").disjuncts.front();
    auto q2 = parse_query("? :- R5(U,V), R3(V,U).").disjuncts.front();
    CHECK(alpha_equal(q1, q2));
}

TEST_CASE("tgd validation") {
    CHECK_THROWS_AS(parse_tgds("R(X) -> S(Y)."), ParseError);  // unsafe head
    CHECK_THROWS_AS(parse_tgds("R(X) -> exists X: S(X)."), ParseError);
    CHECK_NOTHROW(parse_tgds("R(X) -> exists Z: S(X,Z)."));
}

TEST_CASE("numeric extension shape") {
    Database db = parse_facts("R1(a,b).");
    auto ext = NumericExtension::build(db, 3);
    CHECK(ext.num() == std::vector<uint32_t>{1, 2, 3});
    CHECK(ext.succ().size() == 3);
    CHECK(ext.lt().size() == 6);
    CHECK(ext.dnum_contains(Term::constant("a")));
    CHECK(ext.dnum_contains(Term::number(0)));
    CHECK(ext.dnum_contains(Term::number(3)));
    CHECK_FALSE(ext.dnum_contains(Term::number(4)));
    CHECK_FALSE(ext.dnum_contains(Term::constant("zz")));
}

TEST_CASE("numeric extension is deterministic") {
    Database db = parse_facts("R1(a,b). R2(c,d).");
    auto e1 = NumericExtension::build(db, 5);
    auto e2 = NumericExtension::build(db, 5);
    CHECK(e1.num() == e2.num());
    CHECK(e1.lt() == e2.lt());
    CHECK(e1.dom == e2.dom);
}
