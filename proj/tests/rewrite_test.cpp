#include "doctest.h"

#include "support/fixtures.hpp"
#include "tgdlog/eval.hpp"
#include "tgdlog/normalize.hpp"
#include "tgdlog/parser.hpp"
#include "tgdlog/rewrite.hpp"

using namespace tgdlog;

namespace {

UniformizedProblem fig3() { return uniformize(test::fig1_tgds(), test::fig1_query()); }

RewriteParams params(uint32_t n, Variant v) {
    RewriteParams p;
    p.n_steps = n;
    p.variant = v;
    return p;
}

// Independent count of the chase-validity condition instances, following the
// per-tgd occurrence analysis directly (one pass per condition kind).
size_t expected_chase_atoms(const UniformizedProblem& u, uint32_t n) {
    size_t count = 0;
    const size_t N = n;
    for (const auto& tgd : u.sigma_u) {
        count += N;                             // (1)
        count += tgd.body.size() * N * N;       // (2)
        const Atom& head = tgd.head.front();
        std::string ex = tgd.existentials.empty() ? "" : tgd.existentials.front();
        for (const auto& t : head.args)
            if (!ex.empty() && t.symbol() == ex) count += N;  // (3)
        // occurrence lists per body variable
        std::map<std::string, std::vector<std::pair<size_t, size_t>>> occ;
        for (size_t b = 0; b < tgd.body.size(); ++b)
            for (size_t p = 0; p < tgd.body[b].args.size(); ++p)
                occ[tgd.body[b].args[p].symbol()].push_back({b, p});
        for (const auto& [var, os] : occ) {
            (void)var;
            for (size_t x = 0; x < os.size(); ++x)
                for (size_t y = x + 1; y < os.size(); ++y)
                    count += (os[x].first == os[y].first) ? N * N : N * N * N;  // (4)
        }
        for (size_t p = 0; p < head.args.size(); ++p) {
            const std::string& v = head.args[p].symbol();
            if (v == ex) continue;
            auto it = occ.find(v);
            if (it != occ.end()) count += it->second.size() * N * N;  // (5)
        }
    }
    return count;
}

}  // namespace

TEST_CASE("skeleton shape on the running example") {
    auto u = fig3();
    auto sk = build_skeleton(u, params(6, Variant::Wide));
    CHECK(sk.r_tuples.size() == 6);
    CHECK(sk.r_query.size() == 1);
    CHECK(sk.r_chase.size() == expected_chase_atoms(u, 6));
    // O(N^3 * l * k) with one constant across all N
    for (uint32_t n : {6u, 8u, 12u}) {
        auto skn = build_skeleton(u, params(n, Variant::Wide));
        double bound = 16.0 * n * n * n * u.sigma_u.size() * u.k;
        CHECK(static_cast<double>(skn.r_chase.size()) <= bound);
        CHECK(skn.r_chase.size() == expected_chase_atoms(u, n));
    }
}

TEST_CASE("n_steps guard") {
    auto u = fig3();
    CHECK_THROWS_AS(build_skeleton(u, params(3, Variant::Wide)), ValidationError);
    CHECK_NOTHROW(build_skeleton(u, params(5, Variant::Wide)));
}

TEST_CASE("arity laws on the running example") {
    auto u = fig3();  // a = 3, k = 2
    auto wide = build_program(u, params(6, Variant::Wide));
    CHECK(wide.stats.max_arity == u.a + u.k + 4);
    CHECK(check_nonrecursive(wide.program));

    auto reduced = build_program(u, params(6, Variant::Reduced));
    CHECK(reduced.stats.max_arity == std::max(u.a + 1, size_t{3}));
    CHECK(reduced.stats.max_arity == 4);
    CHECK(check_nonrecursive(reduced.program));

    auto bitvec = build_program(u, params(6, Variant::BitVec));
    REQUIRE(bitvec.layout.has_value());
    CHECK(bitvec.layout->width == 3);  // ceil(log2(7))
    CHECK(bitvec.stats.max_arity <= std::max(u.a + 1, size_t{3}) * bitvec.layout->width + 3);
    CHECK(check_nonrecursive(bitvec.program));
}

TEST_CASE("goal structure") {
    auto u = fig3();
    auto wide = build_program(u, params(6, Variant::Wide));
    CHECK(wide.program.goal == "goal");
    CHECK(wide.program.goal_arity() == 0);
    // the tuple table atoms carry literal step indices
    for (const auto& r : wide.program.rules) {
        if (r.head.pred != "goal") continue;
        uint32_t seen = 0;
        for (const auto& a : r.body)
            if (a.pred == "t") {
                ++seen;
                CHECK(a.args[0].is_number());
                CHECK(a.args[0].num() == seen);
            }
        CHECK(seen == 6);
    }
}

TEST_CASE("reserved names are rejected") {
    auto sigma = parse_tgds("num(X) -> goal2(X).");
    auto q = parse_query("? :- goal2(X).").disjuncts.front();
    auto u = uniformize(sigma, q);
    CHECK_THROWS_AS(build_skeleton(u, params(4, Variant::Wide)), ValidationError);
}

TEST_CASE("bit encoding helpers") {
    CHECK(to_bits(5, 3) == std::vector<uint32_t>{1, 0, 1});
    CHECK(to_bits(0, 3) == std::vector<uint32_t>{0, 0, 0});
    CHECK(to_bits(6, 3) == std::vector<uint32_t>{1, 1, 0});
    auto rules = lt_bits_rules(3);
    CHECK(rules.size() == 3);
    for (const auto& r : rules) CHECK(r.head.args.size() == 6);
}

TEST_CASE("vectorized order relation is the numeric order") {
    // wrap the generated family into a program and probe it pointwise
    const uint32_t w = 3;
    DatalogProgram p;
    for (auto& r : lt_bits_rules(w)) p.rules.push_back(r);
    p.rules.push_back({Atom{"bit", {Term::variable("X")}}, {Atom{"zero", {Term::variable("X")}}}});
    p.rules.push_back({Atom{"bit", {Term::variable("X")}}, {Atom{"one", {Term::variable("X")}}}});
    Database empty;
    for (uint32_t x = 0; x < 8; ++x) {
        for (uint32_t y = 0; y < 8; ++y) {
            DatalogProgram probe = p;
            probe.goal = "goal";
            Atom body{"lt_v", {}};
            for (uint32_t b : to_bits(x, w)) body.args.push_back(Term::number(b));
            for (uint32_t b : to_bits(y, w)) body.args.push_back(Term::number(b));
            probe.rules.push_back({Atom{"goal", {}}, {body}});
            auto res = evaluate(probe, empty, 1);
            CHECK(res.boolean() == (x < y));
        }
    }
}

TEST_CASE("stats block is machine readable") {
    auto u = fig3();
    auto r = build_program(u, params(6, Variant::Reduced));
    auto kv = r.stats.to_kv();
    CHECK(kv.find("max_arity=4") != std::string::npos);
    CHECK(kv.find("variant=reduced") != std::string::npos);
    CHECK(kv.find("n_steps=6") != std::string::npos);
}

TEST_CASE("emitted programs survive a serialization round-trip") {
    auto u = fig3();
    for (Variant v : {Variant::Wide, Variant::Reduced}) {
        auto r = build_program(u, params(6, v));
        auto text = serialize(r.program);
        auto back = parse_program(text);
        CHECK(back.goal == r.program.goal);
        CHECK(back.rules.size() == r.program.rules.size());
        CHECK(max_arity(back) == r.stats.max_arity);
    }
}
