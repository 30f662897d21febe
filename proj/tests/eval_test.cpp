#include "doctest.h"

#include <random>

#include "support/fixtures.hpp"
#include "support/ref_eval.hpp"
#include "tgdlog/chase.hpp"
#include "tgdlog/eval.hpp"
#include "tgdlog/normalize.hpp"
#include "tgdlog/parser.hpp"
#include "tgdlog/rewrite.hpp"

using namespace tgdlog;

namespace {

RewriteParams params(uint32_t n, Variant v) {
    RewriteParams p;
    p.n_steps = n;
    p.variant = v;
    return p;
}

}  // namespace

TEST_CASE("build_extension contents") {
    Database db = parse_facts("R1(a,b).");
    auto ext = build_extension(db, 3);
    CHECK(ext.num() == std::vector<uint32_t>{1, 2, 3});
    CHECK(ext.succ() ==
          std::vector<std::pair<uint32_t, uint32_t>>{{0, 1}, {1, 2}, {2, 3}});
    CHECK(ext.lt().size() == 6);
}

TEST_CASE("evaluate basics") {
    Database empty;
    SUBCASE("zero and one are distinct") {
        auto p = parse_program("% goal: goal\ngoal :- zero(X), one(X).\n");
        CHECK_FALSE(evaluate(p, empty, 2).boolean());
    }
    SUBCASE("goal without rules is false") {
        DatalogProgram p;
        p.goal = "goal";
        CHECK_FALSE(evaluate(p, empty, 2).boolean());
    }
    SUBCASE("propositional fact") {
        auto p = parse_program("% goal: goal\ngoal.\n");
        CHECK(evaluate(p, empty, 1).boolean());
    }
    SUBCASE("simple join over the database") {
        auto p = parse_program(
            "% goal: goal\n"
            "path(X,Z) :- edge(X,Y), edge(Y,Z).\n"
            "goal :- path(a,c).\n");
        auto db = parse_facts("edge(a,b). edge(b,c).");
        CHECK(evaluate(p, db, 1).boolean());
        auto db2 = parse_facts("edge(a,b). edge(c,c).");
        CHECK_FALSE(evaluate(p, db2, 1).boolean());
    }
}

TEST_CASE("boolean gate definitions behave as specified") {
    // gate semantics probed through their emitted rule definitions
    auto base =
        "dnum(X) :- num(X).\n"
        "dnum(0).\n"
        "if_eq(X,X,B) :- dnum(X), one(B).\n"
        "if_eq(X,Y,B) :- dnum(X), dnum(Y), neq(X,Y), zero(B).\n"
        "not_b(X,Y) :- zero(X), one(Y).\n"
        "not_b(X,Y) :- one(X), zero(Y).\n"
        "or_b(X,Y,Z) :- zero(X), zero(Y), zero(Z).\n"
        "or_b(X,Y,Z) :- zero(X), one(Y), one(Z).\n"
        "or_b(X,Y,Z) :- one(X), zero(Y), one(Z).\n"
        "or_b(X,Y,Z) :- one(X), one(Y), one(Z).\n"
        "true_b(X) :- one(X).\n";
    Database empty;
    auto probe = [&](const std::string& goal_body) {
        auto p = parse_program("% goal: goal\n" + std::string(base) + "goal :- " + goal_body +
                               ".\n");
        return evaluate(p, empty, 6).boolean();
    };
    CHECK(probe("if_eq(5,5,B), one(B)"));
    CHECK_FALSE(probe("if_eq(5,5,B), zero(B)"));
    CHECK(probe("if_eq(5,6,B), zero(B)"));
    CHECK_FALSE(probe("if_eq(5,6,B), one(B)"));
    CHECK(probe("or_b(0,0,B), zero(B)"));
    CHECK_FALSE(probe("or_b(0,0,B), true_b(B)"));
    CHECK_FALSE(probe("true_b(0)"));
    CHECK(probe("true_b(1)"));
}

TEST_CASE("guarded implications behave as specified") {
    auto base =
        "dnum(X) :- num(X).\n"
        "dnum(0).\n"
        "if_then(X,X,U,U) :- dnum(X), dnum(U).\n"
        "if_then(X1,X2,U1,U2) :- dnum(X1), dnum(X2), dnum(U1), dnum(U2), neq(X1,X2).\n";
    Database empty;
    auto probe = [&](const std::string& atom) {
        auto p =
            parse_program("% goal: goal\n" + std::string(base) + "goal :- " + atom + ".\n");
        return evaluate(p, empty, 9).boolean();
    };
    CHECK(probe("if_then(3,3,7,7)"));
    CHECK(probe("if_then(3,4,7,9)"));
    CHECK_FALSE(probe("if_then(3,3,7,9)"));
}

TEST_CASE("running example evaluates true in all variants") {
    auto sigma = test::fig1_tgds();
    auto q = test::fig1_query();
    auto db = test::fig1_facts();
    auto [normal, report] = to_normal_form(sigma);
    auto u = uniformize(normal, q);
    for (Variant v : {Variant::Wide, Variant::Reduced, Variant::BitVec}) {
        CAPTURE(variant_name(v));
        auto built = build_program(u, params(6, v));
        auto res = evaluate(built.program, db, 6);
        CHECK(res.status == EvalStatus::True);
        CHECK(res.millis < 10000);
    }
}

TEST_CASE("running example is false when the closing fact is removed") {
    auto sigma = test::fig1_tgds();
    auto q = test::fig1_query();
    auto db = parse_facts("R1(a,b). R1(c,d). R2(e,g). R3(g,h).");
    auto u = uniformize(sigma, q);
    for (Variant v : {Variant::Wide, Variant::Reduced, Variant::BitVec}) {
        CAPTURE(variant_name(v));
        auto built = build_program(u, params(6, v));
        CHECK_FALSE(evaluate(built.program, db, 6).boolean());
    }
}

TEST_CASE("the encoding of Figure-style row tables is a valid assignment") {
    auto u = uniformize(test::fig1_tgds(), test::fig1_query());
    auto built = build_program(u, params(6, Variant::Wide));
    auto db = test::fig1_facts();

    std::map<std::string, Term> rows;
    auto row = [&](uint32_t i, uint32_t r, uint32_t f, Term x1, Term x2, Term x3, uint32_t s,
                   uint32_t c1, uint32_t c2) {
        rows.insert_or_assign(tuple_var_rel(i), Term::number(r));
        rows.insert_or_assign(tuple_var_flag(i), Term::number(f));
        rows.insert_or_assign(tuple_var_value(i, 1), x1);
        rows.insert_or_assign(tuple_var_value(i, 2), x2);
        rows.insert_or_assign(tuple_var_value(i, 3), x3);
        rows.insert_or_assign(tuple_var_rule(i), Term::number(s));
        rows.insert_or_assign(tuple_var_parent(i, 1), Term::number(c1));
        rows.insert_or_assign(tuple_var_parent(i, 2), Term::number(c2));
    };
    auto c = [](const char* s) { return Term::constant(s); };
    row(1, 1, 0, c("a"), c("b"), c("a"), 0, 0, 0);
    row(2, 4, 1, c("a"), c("b"), Term::number(2), 1, 1, 1);
    row(3, 2, 0, c("e"), c("g"), c("e"), 0, 0, 0);
    row(4, 4, 1, Term::number(4), c("e"), c("g"), 2, 3, 3);
    row(5, 5, 1, c("a"), c("g"), c("a"), 4, 2, 4);
    row(6, 3, 0, c("g"), c("a"), c("g"), 0, 0, 0);
    rows.insert_or_assign(query_var(1), Term::number(5));
    rows.insert_or_assign(query_var(2), Term::number(6));

    std::string err;
    CHECK(check_assignment(built.program, db, 6, rows, &err));
    INFO(err);

    // flipping one entry breaks it
    rows.insert_or_assign(tuple_var_parent(5, 2), Term::number(3));
    CHECK_FALSE(check_assignment(built.program, db, 6, rows, &err));
}

TEST_CASE("satisfying assignments decode to replayable sequences") {
    auto u = uniformize(test::fig1_tgds(), test::fig1_query());
    auto db = test::fig1_facts();
    for (Variant v : {Variant::Wide, Variant::Reduced, Variant::BitVec}) {
        CAPTURE(variant_name(v));
        auto built = build_program(u, params(6, v));
        EvalOptions opts;
        opts.want_assignment = true;
        auto res = evaluate(built.program, db, 6, opts);
        REQUIRE(res.status == EvalStatus::True);
        auto decoded = decode_assignment(built, res.assignment);
        REQUIRE(decoded.rows.size() == 6);
        REQUIRE(decoded.query_positions.size() == 2);
        for (const auto& r : decoded.rows) {
            if (r.flag == 0) {
                CHECK(r.rule == 0);
                for (uint32_t p : r.parents) CHECK(p == 0);
            } else {
                CHECK(r.rule >= 1);
                for (uint32_t p : r.parents) CHECK(p < r.index);
            }
        }
    }
}

TEST_CASE("certain-answer programs produce the oracle's answers") {
    auto sigma = test::fig1_tgds();
    auto q = parse_query("q(X,Y) :- R5(X,Y).").disjuncts.front();
    auto db = test::fig1_facts();
    auto u = uniformize(sigma, q);
    auto oracle = certain_answers(db, sigma, q, 6);
    CHECK(oracle.count({"a", "g"}) == 1);
    for (Variant v : {Variant::Wide, Variant::Reduced}) {
        CAPTURE(variant_name(v));
        auto built = build_program(u, params(6, v));
        CHECK(built.program.goal_arity() == 2);
        auto res = evaluate(built.program, db, 6);
        REQUIRE(res.status == EvalStatus::Tuples);
        CHECK(res.tuples == oracle);
    }
}

TEST_CASE("union queries take either branch") {
    auto sigma = parse_tgds("P(X,Y) -> exists Z: Q(X,Z).");
    auto uq = parse_query("? :- Q(X,Y).\n? :- S(X,Y).");
    auto u = uniformize(sigma, uq);
    auto built = build_program(u, params(4, Variant::Reduced));
    CHECK(evaluate(built.program, parse_facts("P(a,b)."), 4).boolean());
    CHECK(evaluate(built.program, parse_facts("S(c,d)."), 4).boolean());
    CHECK_FALSE(evaluate(built.program, parse_facts("T2(c,d). P2(a,a)."), 4).boolean());
}

TEST_CASE("evaluation agrees with the naive reference on random programs") {
    std::mt19937 rng(17);
    const char* consts[] = {"a", "b", "c"};
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        // random EDB
        Database db;
        int facts = 1 + static_cast<int>(rng() % 5);
        for (int f = 0; f < facts; ++f) {
            Atom fact{"e" + std::to_string(rng() % 2), {}};
            fact.args.push_back(Term::constant(consts[rng() % 3]));
            fact.args.push_back(Term::constant(consts[rng() % 3]));
            db.add_fact(fact);
        }
        // random nonrecursive rules over p0 < p1 < p2 with EDB leaves
        DatalogProgram prog;
        prog.goal = "goal";
        const char* vars[] = {"X", "Y", "Z"};
        int layers = 1 + static_cast<int>(rng() % 3);
        for (int layer = 0; layer < layers; ++layer) {
            Atom head{"p" + std::to_string(layer), {}};
            head.args.push_back(Term::variable("X"));
            Rule r;
            int body = 1 + static_cast<int>(rng() % 2);
            bool head_bound = false;
            for (int b = 0; b < body; ++b) {
                std::string pred = layer > 0 && (rng() % 2) ? "p" + std::to_string(layer - 1)
                                                            : "e" + std::to_string(rng() % 2);
                Atom a{pred, {}};
                size_t arity = pred[0] == 'p' ? 1 : 2;
                for (size_t i = 0; i < arity; ++i) {
                    a.args.push_back(Term::variable(vars[rng() % 3]));
                    if (a.args.back().symbol() == "X") head_bound = true;
                }
                r.body.push_back(a);
            }
            if (!head_bound) r.body[0].args[0] = Term::variable("X");
            r.head = head;
            prog.rules.push_back(r);
        }
        Atom gb{"p" + std::to_string(layers - 1), {Term::variable("X")}};
        prog.rules.push_back({Atom{"goal", {}}, {gb}});
        prog.edb = {"e0", "e1"};
        auto fast = evaluate(prog, db, 2);
        auto slow = test::ref_evaluate(prog, db, 2);
        CHECK(fast.boolean() == slow.boolean);
        ++compared;
    }
    CHECK(compared == 200);
}

TEST_CASE("gadget tables match their defining property pointwise") {
    // materialize if_then from its rules with a tiny domain and compare
    // against the guarded-implication property
    auto text =
        "% goal: goal\n"
        "dnum(X) :- num(X).\n"
        "dnum(X) :- adom(X).\n"
        "dnum(0).\n"
        "adom(X) :- d(X).\n"
        "if_then(X,X,U,U) :- dnum(X), dnum(U).\n"
        "if_then(X1,X2,U1,U2) :- dnum(X1), dnum(X2), dnum(U1), dnum(U2), neq(X1,X2).\n"
        "goal :- if_then(1,1,1,1).\n";
    auto prog = parse_program(text);
    auto db = parse_facts("d(a). d(b).");
    auto slow = test::ref_evaluate(prog, db, 3);
    const auto& table = slow.relations.at("if_then");
    std::vector<std::string> dom = {"0", "1", "2", "3", "a", "b"};
    size_t rows = 0;
    for (const auto& x1 : dom)
        for (const auto& x2 : dom)
            for (const auto& u1 : dom)
                for (const auto& u2 : dom) {
                    bool expect = (x1 == x2) ? (u1 == u2) : true;
                    CHECK(table.count({x1, x2, u1, u2}) == (expect ? 1u : 0u));
                    rows += expect;
                }
    CHECK(table.size() == rows);
}

TEST_CASE("evaluation is monotone in the step bound") {
    auto u = uniformize(test::fig1_tgds(), test::fig1_query());
    auto db = test::fig1_facts();
    for (uint32_t n : {6u, 7u, 8u}) {
        auto built = build_program(u, params(n, Variant::Reduced));
        CHECK(evaluate(built.program, db, n).boolean());
    }
}

TEST_CASE("timeouts surface as a resource outcome") {
    auto u = uniformize(test::fig1_tgds(), test::fig1_query());
    auto built = build_program(u, params(10, Variant::BitVec));
    EvalOptions opts;
    opts.timeout_ms = 1;
    auto res = evaluate(built.program, test::fig1_facts(), 10, opts);
    CHECK((res.status == EvalStatus::Resource || res.status == EvalStatus::True));
}

TEST_CASE("empty tgd set reduces to testing the query directly") {
    std::vector<Tgd> sigma;
    auto q = parse_query("? :- R(X,Y,U).").disjuncts.front();
    auto u = uniformize(sigma, q);
    for (Variant v : {Variant::Wide, Variant::Reduced, Variant::BitVec}) {
        CAPTURE(variant_name(v));
        auto built = build_program(u, params(2, v));
        CHECK(evaluate(built.program, parse_facts("R(a,b,c)."), 2).boolean());
        CHECK_FALSE(evaluate(built.program, parse_facts("S(a,b,c)."), 2).boolean());
    }
}
