#include "tgdlog/rewrite.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace tgdlog {

namespace {

// Predicate vocabulary of emitted programs.
constexpr const char* kT = "t";
constexpr const char* kTp = "tp";
constexpr const char* kIfThen = "if_then";
constexpr const char* kIfThen2 = "if_then2";
constexpr const char* kIfThen3 = "if_then3";
constexpr const char* kIfEq = "if_eq";
constexpr const char* kNotB = "not_b";
constexpr const char* kOrB = "or_b";
constexpr const char* kTrueB = "true_b";
constexpr const char* kRelOk = "rel_ok";
constexpr const char* kRuleOk = "rule_ok";
constexpr const char* kParentOk = "parent_ok";
constexpr const char* kLeq = "leq";
constexpr const char* kNum = "num";
constexpr const char* kDnum = "dnum";
constexpr const char* kLt = "lt";
constexpr const char* kNeq = "neq";
constexpr const char* kZero = "zero";
constexpr const char* kOne = "one";
constexpr const char* kSucc = "succ";
constexpr const char* kAdom = "adom";
constexpr const char* kAdom0 = "adom0";
constexpr const char* kCval = "cval";
constexpr const char* kBit = "bit";
constexpr const char* kNumV = "num_v";
constexpr const char* kLtV = "lt_v";
constexpr const char* kLeqV = "leq_v";
constexpr const char* kGoal = "goal";

Term tnum(uint32_t n) { return Term::number(n); }
Term tvar(const std::string& v) { return Term::variable(v); }

}  // namespace

std::string tuple_var_rel(uint32_t i) { return "R" + std::to_string(i); }
std::string tuple_var_flag(uint32_t i) { return "F" + std::to_string(i); }
std::string tuple_var_value(uint32_t i, uint32_t pos) {
    return "X" + std::to_string(i) + "_" + std::to_string(pos);
}
std::string tuple_var_rule(uint32_t i) { return "S" + std::to_string(i); }
std::string tuple_var_parent(uint32_t i, uint32_t j) {
    return "C" + std::to_string(i) + "_" + std::to_string(j);
}
std::string query_var(uint32_t t) { return "Q" + std::to_string(t); }

const std::vector<std::string>& reserved_predicates() {
    static const std::vector<std::string> names = {
        kT,    kTp,   kIfThen, kIfThen2, kIfThen3, kIfEq, kNotB, kOrB,  kTrueB,
        kRelOk, kRuleOk, kParentOk, kLeq, kNum,  kDnum, kLt,   kNeq,  kZero, kOne,
        kSucc, kAdom, kAdom0,  kCval,    kBit,     kNumV, kLtV,  kLeqV, kGoal};
    return names;
}

namespace {

// Variable occurrences inside a (uniformized) tgd or query atom list.
struct Occurrence {
    size_t atom;  // 0-based atom index
    size_t pos;   // 0-based argument position
};

std::map<std::string, std::vector<Occurrence>> occurrences(const std::vector<Atom>& atoms) {
    std::map<std::string, std::vector<Occurrence>> out;
    for (size_t i = 0; i < atoms.size(); ++i)
        for (size_t p = 0; p < atoms[i].args.size(); ++p)
            if (atoms[i].args[p].is_variable())
                out[atoms[i].args[p].symbol()].push_back({i, p});
    return out;
}

void check_reserved(const UniformizedProblem& u) {
    const auto& reserved = reserved_predicates();
    auto is_reserved = [&](const std::string& p) {
        return std::find(reserved.begin(), reserved.end(), p) != reserved.end();
    };
    for (const auto& [orig, padded] : u.padded_name) {
        if (is_reserved(orig))
            throw ValidationError("predicate name '" + orig + "' is reserved by the rewriter");
        if (is_reserved(padded))
            throw ValidationError("padded name '" + padded + "' collides with a reserved name");
    }
}

}  // namespace

ProgramSkeleton build_skeleton(const UniformizedProblem& u, const RewriteParams& params) {
    check_reserved(u);
    const uint32_t N = params.n_steps;
    const size_t a = u.a;
    const size_t k = u.k;
    const size_t m = u.relation_count();
    const size_t l = u.sigma_u.size();
    size_t max_q_atoms = 0;
    for (const auto& d : u.query_u.disjuncts) max_q_atoms = std::max(max_q_atoms, d.atoms.size());
    if (N < std::max({l, m, max_q_atoms}))
        throw ValidationError("n_steps must be at least max(rules, relations, query atoms) = " +
                              std::to_string(std::max({l, m, max_q_atoms})));

    ProgramSkeleton sk;
    sk.problem = &u;
    sk.params = params;

    // the guessed tuple table
    for (uint32_t i = 1; i <= N; ++i) {
        Atom t{kT, {}};
        t.args.push_back(tnum(i));
        t.args.push_back(tvar(tuple_var_rel(i)));
        t.args.push_back(tvar(tuple_var_flag(i)));
        sk.var_kind[tuple_var_rel(i)] = VarKind::Rel;
        sk.var_kind[tuple_var_flag(i)] = VarKind::Flag;
        for (uint32_t p = 1; p <= a; ++p) {
            t.args.push_back(tvar(tuple_var_value(i, p)));
            sk.var_kind[tuple_var_value(i, p)] = VarKind::Value;
        }
        t.args.push_back(tvar(tuple_var_rule(i)));
        sk.var_kind[tuple_var_rule(i)] = VarKind::RuleNo;
        for (uint32_t j = 1; j <= k; ++j) {
            t.args.push_back(tvar(tuple_var_parent(i, j)));
            sk.var_kind[tuple_var_parent(i, j)] = VarKind::Step;
        }
        sk.r_tuples.push_back(std::move(t));
    }

    // chase-validity conditions, one batch per tgd
    auto emit = [&](const char* pred, std::vector<Term> args) {
        sk.r_chase.push_back(Atom{pred, std::move(args)});
    };
    for (size_t t0 = 0; t0 < l; ++t0) {
        const Tgd& tgd = u.sigma_u[t0];
        const uint32_t t = static_cast<uint32_t>(t0 + 1);
        const Atom& head = tgd.head.front();
        const uint32_t h = static_cast<uint32_t>(u.relation_number(head.pred));
        const std::string ex =
            tgd.existentials.empty() ? std::string() : tgd.existentials.front();

        // (1) the produced tuple's relation matches the rule head
        for (uint32_t i = 1; i <= N; ++i)
            emit(kIfThen, {tvar(tuple_var_rule(i)), tnum(t), tvar(tuple_var_rel(i)), tnum(h)});

        // (2) parent tuples carry the body's relations
        for (size_t uu = 0; uu < tgd.body.size(); ++uu) {
            const uint32_t b = static_cast<uint32_t>(u.relation_number(tgd.body[uu].pred));
            for (uint32_t i = 1; i <= N; ++i)
                for (uint32_t j = 1; j <= N; ++j)
                    emit(kIfThen2,
                         {tvar(tuple_var_rule(i)), tnum(t),
                          tvar(tuple_var_parent(i, static_cast<uint32_t>(uu + 1))), tnum(j),
                          tvar(tuple_var_rel(j)), tnum(b)});
        }

        // (3) existential head positions carry the step's own number
        if (!ex.empty()) {
            for (size_t p = 0; p < head.args.size(); ++p) {
                if (head.args[p].symbol() != ex) continue;
                for (uint32_t i = 1; i <= N; ++i)
                    emit(kIfThen, {tvar(tuple_var_rule(i)), tnum(t),
                                   tvar(tuple_var_value(i, static_cast<uint32_t>(p + 1))),
                                   tnum(i)});
            }
        }

        // (4) repeated body variables force agreeing parent values
        auto body_occ = occurrences(tgd.body);
        for (const auto& [var, occs] : body_occ) {
            (void)var;
            for (size_t x = 0; x < occs.size(); ++x) {
                for (size_t y = x + 1; y < occs.size(); ++y) {
                    const uint32_t cu = static_cast<uint32_t>(occs[x].atom + 1);
                    const uint32_t cv = static_cast<uint32_t>(occs[y].atom + 1);
                    const uint32_t pu = static_cast<uint32_t>(occs[x].pos + 1);
                    const uint32_t pv = static_cast<uint32_t>(occs[y].pos + 1);
                    if (cu == cv) {
                        // both occurrences come from the same parent tuple
                        for (uint32_t i = 1; i <= N; ++i)
                            for (uint32_t j = 1; j <= N; ++j)
                                emit(kIfThen2,
                                     {tvar(tuple_var_rule(i)), tnum(t),
                                      tvar(tuple_var_parent(i, cu)), tnum(j),
                                      tvar(tuple_var_value(j, pu)), tvar(tuple_var_value(j, pv))});
                    } else {
                        for (uint32_t i = 1; i <= N; ++i)
                            for (uint32_t j1 = 1; j1 <= N; ++j1)
                                for (uint32_t j2 = 1; j2 <= N; ++j2)
                                    emit(kIfThen3,
                                         {tvar(tuple_var_rule(i)), tnum(t),
                                          tvar(tuple_var_parent(i, cu)), tnum(j1),
                                          tvar(tuple_var_parent(i, cv)), tnum(j2),
                                          tvar(tuple_var_value(j1, pu)),
                                          tvar(tuple_var_value(j2, pv))});
                    }
                }
            }
        }

        // (5) body-to-head propagation of frontier variables
        for (size_t p = 0; p < head.args.size(); ++p) {
            const std::string& var = head.args[p].symbol();
            if (var == ex) continue;
            auto it = body_occ.find(var);
            if (it == body_occ.end()) continue;
            for (const auto& occ : it->second) {
                const uint32_t cu = static_cast<uint32_t>(occ.atom + 1);
                const uint32_t pu = static_cast<uint32_t>(occ.pos + 1);
                for (uint32_t i = 1; i <= N; ++i)
                    for (uint32_t j = 1; j <= N; ++j)
                        emit(kIfThen2, {tvar(tuple_var_rule(i)), tnum(t),
                                        tvar(tuple_var_parent(i, cu)), tnum(j),
                                        tvar(tuple_var_value(j, pu)),
                                        tvar(tuple_var_value(i, static_cast<uint32_t>(p + 1)))});
            }
        }
    }

    // query side, per disjunct
    for (const auto& d : u.query_u.disjuncts) {
        std::vector<Atom> rq;
        const uint32_t nq = static_cast<uint32_t>(d.atoms.size());
        for (uint32_t qa = 1; qa <= nq; ++qa) {
            rq.push_back(Atom{kNum, {tvar(query_var(qa))}});
            sk.var_kind[query_var(qa)] = VarKind::Step;
        }
        // relation checks
        for (uint32_t qa = 1; qa <= nq; ++qa) {
            const uint32_t rel =
                static_cast<uint32_t>(u.relation_number(d.atoms[qa - 1].pred));
            for (uint32_t i = 1; i <= N; ++i)
                rq.push_back(Atom{kIfThen, {tvar(query_var(qa)), tnum(i),
                                            tvar(tuple_var_rel(i)), tnum(rel)}});
        }
        // join checks for repeated variables and constants
        auto q_occ = occurrences(d.atoms);
        std::set<std::string> outs(d.output_vars.begin(), d.output_vars.end());
        for (const auto& [var, occs] : q_occ) {
            (void)var;
            for (size_t x = 0; x < occs.size(); ++x)
                for (size_t y = x + 1; y < occs.size(); ++y) {
                    const uint32_t qa = static_cast<uint32_t>(occs[x].atom + 1);
                    const uint32_t qb = static_cast<uint32_t>(occs[y].atom + 1);
                    const uint32_t pa = static_cast<uint32_t>(occs[x].pos + 1);
                    const uint32_t pb = static_cast<uint32_t>(occs[y].pos + 1);
                    for (uint32_t i = 1; i <= N; ++i)
                        for (uint32_t j = 1; j <= N; ++j)
                            rq.push_back(Atom{kIfThen2,
                                              {tvar(query_var(qa)), tnum(i), tvar(query_var(qb)),
                                               tnum(j), tvar(tuple_var_value(i, pa)),
                                               tvar(tuple_var_value(j, pb))}});
                }
        }
        for (size_t at = 0; at < d.atoms.size(); ++at)
            for (size_t p = 0; p < d.atoms[at].args.size(); ++p) {
                const Term& term = d.atoms[at].args[p];
                if (!term.is_constant()) continue;
                for (uint32_t i = 1; i <= N; ++i)
                    rq.push_back(Atom{kIfThen,
                                      {tvar(query_var(static_cast<uint32_t>(at + 1))), tnum(i),
                                       tvar(tuple_var_value(i, static_cast<uint32_t>(p + 1))),
                                       term}});
            }
        // output variables bind to mapped tuple values and range over adom
        for (size_t ov = 0; ov < d.output_vars.size(); ++ov) {
            const std::string canon = "OUT" + std::to_string(ov + 1);
            sk.var_kind[canon] = VarKind::Out;
            rq.push_back(Atom{kAdom, {tvar(canon)}});
            for (const auto& occ : q_occ.at(d.output_vars[ov])) {
                const uint32_t qa = static_cast<uint32_t>(occ.atom + 1);
                const uint32_t pp = static_cast<uint32_t>(occ.pos + 1);
                for (uint32_t i = 1; i <= N; ++i)
                    rq.push_back(Atom{kIfThen, {tvar(query_var(qa)), tnum(i),
                                                tvar(tuple_var_value(i, pp)), tvar(canon)}});
            }
        }
        sk.r_query.push_back(std::move(rq));
    }
    return sk;
}

namespace {

struct GadgetUse {
    bool if_then = false, if_then2 = false, if_then3 = false;
};

GadgetUse gadget_use(const ProgramSkeleton& sk) {
    GadgetUse use;
    auto scan = [&](const std::vector<Atom>& atoms) {
        for (const auto& a : atoms) {
            if (a.pred == kIfThen) use.if_then = true;
            if (a.pred == kIfThen2) use.if_then2 = true;
            if (a.pred == kIfThen3) use.if_then3 = true;
        }
    };
    scan(sk.r_chase);
    for (const auto& rq : sk.r_query) scan(rq);
    return use;
}

std::vector<Rule> padding_and_domain_rules(const UniformizedProblem& u) {
    std::vector<Rule> rules = u.padding_rules;
    // active non-numeric domain: every column of every original relation
    for (const auto& [pred, ar] : u.original_arity) {
        for (size_t p = 0; p < ar; ++p) {
            Rule r;
            r.head = Atom{kAdom, {tvar("X")}};
            Atom body{pred, {}};
            for (size_t q = 0; q < ar; ++q)
                body.args.push_back(q == p ? tvar("X") : tvar("Y" + std::to_string(q + 1)));
            r.body = {body};
            rules.push_back(std::move(r));
        }
    }
    return rules;
}

std::vector<Rule> dnum_rules() {
    std::vector<Rule> rules;
    rules.push_back({Atom{kDnum, {tvar("X")}}, {Atom{kNum, {tvar("X")}}}});
    rules.push_back({Atom{kDnum, {tvar("X")}}, {Atom{kAdom, {tvar("X")}}}});
    rules.push_back({Atom{kDnum, {tnum(0)}}, {}});
    return rules;
}

std::vector<Rule> leq_rules() {
    std::vector<Rule> rules;
    rules.push_back({Atom{kLeq, {tvar("X"), tvar("Y")}}, {Atom{kLt, {tvar("X"), tvar("Y")}}}});
    rules.push_back({Atom{kLeq, {tvar("X"), tvar("X")}}, {Atom{kNum, {tvar("X")}}}});
    return rules;
}

std::vector<Rule> if_then_rules(const GadgetUse& use) {
    std::vector<Rule> rules;
    auto dn = [&](const std::string& v) { return Atom{kDnum, {tvar(v)}}; };
    if (use.if_then) {
        rules.push_back({Atom{kIfThen, {tvar("X"), tvar("X"), tvar("U"), tvar("U")}},
                         {dn("X"), dn("U")}});
        rules.push_back({Atom{kIfThen, {tvar("X1"), tvar("X2"), tvar("U1"), tvar("U2")}},
                         {dn("X1"), dn("X2"), dn("U1"), dn("U2"),
                          Atom{kNeq, {tvar("X1"), tvar("X2")}}}});
    }
    if (use.if_then2) {
        rules.push_back(
            {Atom{kIfThen2,
                  {tvar("X"), tvar("X"), tvar("Y"), tvar("Y"), tvar("U"), tvar("U")}},
             {dn("X"), dn("Y"), dn("U")}});
        rules.push_back(
            {Atom{kIfThen2,
                  {tvar("X1"), tvar("X2"), tvar("Y1"), tvar("Y2"), tvar("U1"), tvar("U2")}},
             {dn("X1"), dn("X2"), dn("Y1"), dn("Y2"), dn("U1"), dn("U2"),
              Atom{kNeq, {tvar("X1"), tvar("X2")}}}});
        rules.push_back(
            {Atom{kIfThen2,
                  {tvar("X1"), tvar("X2"), tvar("Y1"), tvar("Y2"), tvar("U1"), tvar("U2")}},
             {dn("X1"), dn("X2"), dn("Y1"), dn("Y2"), dn("U1"), dn("U2"),
              Atom{kNeq, {tvar("Y1"), tvar("Y2")}}}});
    }
    if (use.if_then3) {
        rules.push_back({Atom{kIfThen3,
                              {tvar("X"), tvar("X"), tvar("Y"), tvar("Y"), tvar("Z"), tvar("Z"),
                               tvar("U"), tvar("U")}},
                         {dn("X"), dn("Y"), dn("Z"), dn("U")}});
        const char* pairs[3][2] = {{"X1", "X2"}, {"Y1", "Y2"}, {"Z1", "Z2"}};
        for (auto& pr : pairs) {
            Rule r;
            r.head = Atom{kIfThen3,
                          {tvar("X1"), tvar("X2"), tvar("Y1"), tvar("Y2"), tvar("Z1"),
                           tvar("Z2"), tvar("U1"), tvar("U2")}};
            for (const char* v :
                 {"X1", "X2", "Y1", "Y2", "Z1", "Z2", "U1", "U2"})
                r.body.push_back(dn(v));
            r.body.push_back(Atom{kNeq, {tvar(pr[0]), tvar(pr[1])}});
            rules.push_back(std::move(r));
        }
    }
    return rules;
}

// Shared assembly: goal rule(s) over the supplied per-disjunct bodies.
void assemble_goal(DatalogProgram& prog, const ProgramSkeleton& sk,
                   std::vector<std::vector<Atom>> bodies) {
    const auto& u = *sk.problem;
    const auto& outs = u.query_u.disjuncts.front().output_vars;
    Atom goal_head{kGoal, {}};
    for (size_t i = 0; i < outs.size(); ++i)
        goal_head.args.push_back(tvar("OUT" + std::to_string(i + 1)));
    if (bodies.size() == 1) {
        prog.rules.push_back({goal_head, std::move(bodies.front())});
        return;
    }
    std::set<std::string> taken;
    for (const auto& [orig, padded] : u.padded_name) {
        taken.insert(orig);
        taken.insert(padded);
    }
    for (size_t d = 0; d < bodies.size(); ++d) {
        std::string name = "goal_" + std::to_string(d + 1);
        while (taken.count(name)) name += "_";
        Atom dhead{name, goal_head.args};
        prog.rules.push_back({dhead, std::move(bodies[d])});
        prog.rules.push_back({goal_head, {dhead}});
    }
}

void finish(RewriteResult& res, const ProgramSkeleton& sk) {
    const auto& u = *sk.problem;
    res.stats.n = sk.params.n_steps;
    res.stats.a = u.a;
    res.stats.k = u.k;
    res.stats.m = u.relation_count();
    res.stats.l = u.sigma_u.size();
    res.stats.variant = sk.params.variant;
    res.stats.r_tuples_atoms = sk.r_tuples.size();
    res.stats.r_chase_atoms = sk.r_chase.size();
    res.stats.r_query_atoms = 0;
    for (const auto& rq : sk.r_query) res.stats.r_query_atoms += rq.size();
    res.stats.rule_count = res.program.rules.size();
    res.stats.total_atoms = 0;
    res.stats.goal_rule_atoms = 0;
    for (const auto& r : res.program.rules) {
        res.stats.total_atoms += 1 + r.body.size();
        res.stats.goal_rule_atoms = std::max(res.stats.goal_rule_atoms, r.body.size());
    }
    res.stats.max_arity = max_arity(res.program);
    std::set<std::string> vars;
    for (const auto& r : res.program.rules)
        if (r.body.size() == res.stats.goal_rule_atoms)
            for (const auto& a : r.body)
                for (const auto& t : a.args)
                    if (t.is_variable()) vars.insert(t.symbol());
    res.stats.goal_variables = vars.size();

    auto arities = res.program.predicate_arities();
    auto idb = res.program.idb_predicates();
    res.program.edb.clear();
    for (const auto& [pred, ar] : arities) {
        (void)ar;
        if (!idb.count(pred)) res.program.edb.insert(pred);
    }
    if (!check_nonrecursive(res.program))
        throw ValidationError("internal: emitted program is recursive");
}

}  // namespace

RewriteResult assemble_wide(const ProgramSkeleton& sk) {
    const auto& u = *sk.problem;
    const uint32_t m = static_cast<uint32_t>(u.relation_count());
    const uint32_t l = static_cast<uint32_t>(u.sigma_u.size());
    RewriteResult res;
    DatalogProgram& prog = res.program;
    prog.goal = kGoal;

    for (auto& r : padding_and_domain_rules(u)) prog.rules.push_back(std::move(r));
    for (auto& r : dnum_rules()) prog.rules.push_back(std::move(r));
    for (auto& r : leq_rules()) prog.rules.push_back(std::move(r));

    // database rows, one rule per relation
    for (uint32_t j = 1; j <= m; ++j) {
        Rule r;
        r.head = Atom{kT, {tnum(0)}};
        r.head.args[0] = tvar("Z");
        r.head.args.push_back(tnum(j));
        r.head.args.push_back(tnum(0));
        Atom body{u.relation_order[j - 1], {}};
        for (uint32_t p = 1; p <= u.a; ++p) {
            body.args.push_back(tvar("X" + std::to_string(p)));
            r.head.args.push_back(tvar("X" + std::to_string(p)));
        }
        r.head.args.push_back(tnum(0));
        for (uint32_t c = 1; c <= u.k; ++c) r.head.args.push_back(tnum(0));
        r.body = {body, Atom{kNum, {tvar("Z")}}};
        prog.rules.push_back(std::move(r));
    }
    // candidate chase rows
    {
        Rule r;
        r.head = Atom{kT, {tvar("Z"), tvar("Y"), tnum(1)}};
        r.body.push_back(Atom{kNum, {tvar("Z")}});
        r.body.push_back(Atom{kNum, {tvar("Y")}});
        for (uint32_t p = 1; p <= u.a; ++p) {
            r.head.args.push_back(tvar("X" + std::to_string(p)));
            r.body.push_back(Atom{kDnum, {tvar("X" + std::to_string(p))}});
        }
        r.head.args.push_back(tvar("V"));
        r.body.push_back(Atom{kNum, {tvar("V")}});
        for (uint32_t c = 1; c <= u.k; ++c) {
            r.head.args.push_back(tvar("U" + std::to_string(c)));
            r.body.push_back(Atom{kNum, {tvar("U" + std::to_string(c))}});
        }
        r.body.push_back(Atom{kLeq, {tvar("Y"), tnum(m)}});
        r.body.push_back(Atom{kLeq, {tvar("V"), tnum(l)}});
        for (uint32_t c = 1; c <= u.k; ++c)
            r.body.push_back(Atom{kLt, {tvar("U" + std::to_string(c)), tvar("Z")}});
        prog.rules.push_back(std::move(r));
    }
    for (auto& r : if_then_rules(gadget_use(sk))) prog.rules.push_back(std::move(r));

    std::vector<std::vector<Atom>> bodies;
    for (const auto& rq : sk.r_query) {
        std::vector<Atom> body;
        for (const auto& atom : rq)
            if (atom.pred == kNum) body.push_back(atom);
        for (const auto& atom : sk.r_tuples) body.push_back(atom);
        for (const auto& atom : sk.r_chase) body.push_back(atom);
        for (const auto& atom : rq)
            if (atom.pred != kNum) body.push_back(atom);
        bodies.push_back(std::move(body));
    }
    assemble_goal(prog, sk, std::move(bodies));
    finish(res, sk);
    return res;
}

namespace {

// Emits Boolean-gate conjunctions. Fresh B-variables avoid the output names.
class CircuitEmitter {
public:
    CircuitEmitter(std::vector<Atom>& out, std::set<std::string> avoid)
        : out_(out), avoid_(std::move(avoid)) {}

    std::string fresh() {
        for (;;) {
            std::string v = "B" + std::to_string(++counter_);
            if (!avoid_.count(v)) return v;
        }
    }
    std::string if_eq(const Term& a, const Term& b) {
        std::string v = fresh();
        out_.push_back(Atom{kIfEq, {a, b, tvar(v)}});
        return v;
    }
    std::string not_b(const std::string& b) {
        std::string v = fresh();
        out_.push_back(Atom{kNotB, {tvar(b), tvar(v)}});
        return v;
    }
    std::string or_fold(const std::vector<std::string>& bits) {
        std::string acc = bits.front();
        for (size_t i = 1; i < bits.size(); ++i) {
            std::string v = fresh();
            out_.push_back(Atom{kOrB, {tvar(acc), tvar(bits[i]), tvar(v)}});
            acc = v;
        }
        return acc;
    }
    void require(const std::string& b) { out_.push_back(Atom{kTrueB, {tvar(b)}}); }

private:
    std::vector<Atom>& out_;
    std::set<std::string> avoid_;
    size_t counter_ = 0;
};

size_t condition_pairs(const std::string& pred) {
    if (pred == kIfThen) return 2;
    if (pred == kIfThen2) return 3;
    if (pred == kIfThen3) return 4;
    return 0;
}

// Per-group goal conjuncts of the reduced encoding.
void reduced_tuple_group(const Atom& t_atom, const UniformizedProblem& u,
                         std::vector<Atom>& out) {
    // T args: [0]=index const, [1]=rel, [2]=flag, [3..3+a-1]=values, [3+a]=rule, rest parents
    const uint32_t i = t_atom.args[0].num();
    const uint32_t a = static_cast<uint32_t>(u.a);
    const uint32_t k = static_cast<uint32_t>(u.k);
    const std::string rp = "RP" + std::to_string(i);
    out.push_back(Atom{kRelOk, {t_atom.args[2], t_atom.args[1], tvar(rp)}});
    out.push_back(Atom{kRuleOk, {t_atom.args[2], t_atom.args[3 + a]}});
    for (uint32_t j = 0; j < k; ++j)
        out.push_back(Atom{kParentOk, {t_atom.args[2], t_atom.args[3 + a + 1 + j], tnum(i)}});
    Atom tp{kTp, {tvar(rp)}};
    for (uint32_t p = 0; p < a; ++p) tp.args.push_back(t_atom.args[3 + p]);
    out.push_back(std::move(tp));
}

std::vector<Rule> reduced_support_rules(const UniformizedProblem& u) {
    const uint32_t m = static_cast<uint32_t>(u.relation_count());
    const uint32_t l = static_cast<uint32_t>(u.sigma_u.size());
    std::vector<Rule> rules;
    // tp: database tuples tagged by relation number, plus the free 0 row
    for (uint32_t j = 1; j <= m; ++j) {
        Rule r;
        r.head = Atom{kTp, {tnum(j)}};
        Atom body{u.relation_order[j - 1], {}};
        for (uint32_t p = 1; p <= u.a; ++p) {
            body.args.push_back(tvar("X" + std::to_string(p)));
            r.head.args.push_back(tvar("X" + std::to_string(p)));
        }
        r.body = {body};
        rules.push_back(std::move(r));
    }
    {
        Rule r;
        r.head = Atom{kTp, {tvar("Z")}};
        r.body.push_back(Atom{kZero, {tvar("Z")}});
        for (uint32_t p = 1; p <= u.a; ++p) {
            r.head.args.push_back(tvar("X" + std::to_string(p)));
            r.body.push_back(Atom{kDnum, {tvar("X" + std::to_string(p))}});
        }
        rules.push_back(std::move(r));
    }
    // rel_ok(F,R,R') : F=0 -> R=R';  F=1 -> R is a usable relation number
    rules.push_back({Atom{kRelOk, {tvar("F"), tvar("X"), tvar("X")}},
                     {Atom{kZero, {tvar("F")}}, Atom{kDnum, {tvar("X")}}}});
    rules.push_back({Atom{kRelOk, {tvar("F"), tvar("X"), tvar("Y")}},
                     {Atom{kOne, {tvar("F")}}, Atom{kNum, {tvar("X")}},
                      Atom{kLeq, {tvar("X"), tnum(m)}}, Atom{kDnum, {tvar("Y")}}}});
    // rule_ok(F,S) : F=0 -> S=0;  F=1 -> S names a tgd
    rules.push_back({Atom{kRuleOk, {tvar("F"), tvar("S")}},
                     {Atom{kZero, {tvar("F")}}, Atom{kZero, {tvar("S")}}}});
    rules.push_back({Atom{kRuleOk, {tvar("F"), tvar("S")}},
                     {Atom{kOne, {tvar("F")}}, Atom{kNum, {tvar("S")}},
                      Atom{kLeq, {tvar("S"), tnum(l)}}}});
    // parent_ok(F,C,Z) : F=0 -> C=0;  F=1 -> C is an earlier step
    rules.push_back({Atom{kParentOk, {tvar("F"), tvar("C"), tvar("Z")}},
                     {Atom{kZero, {tvar("F")}}, Atom{kZero, {tvar("C")}},
                      Atom{kNum, {tvar("Z")}}}});
    rules.push_back({Atom{kParentOk, {tvar("F"), tvar("C"), tvar("Z")}},
                     {Atom{kOne, {tvar("F")}}, Atom{kNum, {tvar("C")}},
                      Atom{kLt, {tvar("C"), tvar("Z")}}}});
    return rules;
}

std::vector<Rule> boolean_gate_rules(bool with_cval_guard) {
    const char* guard = with_cval_guard ? kCval : kDnum;
    std::vector<Rule> rules;
    rules.push_back({Atom{kIfEq, {tvar("X"), tvar("X"), tvar("B")}},
                     {Atom{guard, {tvar("X")}}, Atom{kOne, {tvar("B")}}}});
    rules.push_back({Atom{kIfEq, {tvar("X"), tvar("Y"), tvar("B")}},
                     {Atom{guard, {tvar("X")}}, Atom{guard, {tvar("Y")}},
                      Atom{kNeq, {tvar("X"), tvar("Y")}}, Atom{kZero, {tvar("B")}}}});
    rules.push_back({Atom{kNotB, {tvar("X"), tvar("Y")}},
                     {Atom{kZero, {tvar("X")}}, Atom{kOne, {tvar("Y")}}}});
    rules.push_back({Atom{kNotB, {tvar("X"), tvar("Y")}},
                     {Atom{kOne, {tvar("X")}}, Atom{kZero, {tvar("Y")}}}});
    const char* table[4][3] = {
        {kZero, kZero, kZero}, {kZero, kOne, kOne}, {kOne, kZero, kOne}, {kOne, kOne, kOne}};
    for (auto& row : table)
        rules.push_back({Atom{kOrB, {tvar("X"), tvar("Y"), tvar("Z")}},
                         {Atom{row[0], {tvar("X")}}, Atom{row[1], {tvar("Y")}},
                          Atom{row[2], {tvar("Z")}}}});
    rules.push_back({Atom{kTrueB, {tvar("X")}}, {Atom{kOne, {tvar("X")}}}});
    return rules;
}

}  // namespace

RewriteResult reduce_arity(const ProgramSkeleton& sk) {
    const auto& u = *sk.problem;
    RewriteResult res;
    DatalogProgram& prog = res.program;
    prog.goal = kGoal;

    for (auto& r : padding_and_domain_rules(u)) prog.rules.push_back(std::move(r));
    for (auto& r : dnum_rules()) prog.rules.push_back(std::move(r));
    for (auto& r : leq_rules()) prog.rules.push_back(std::move(r));
    for (auto& r : reduced_support_rules(u)) prog.rules.push_back(std::move(r));
    for (auto& r : boolean_gate_rules(false)) prog.rules.push_back(std::move(r));

    std::set<std::string> avoid;
    for (size_t i = 0; i < u.query_u.disjuncts.front().output_vars.size(); ++i)
        avoid.insert("OUT" + std::to_string(i + 1));

    std::vector<std::vector<Atom>> bodies;
    for (const auto& rq : sk.r_query) {
        std::vector<Atom> body;
        CircuitEmitter ce(body, avoid);
        for (const auto& atom : rq)
            if (atom.pred == kNum) body.push_back(atom);
        for (const auto& t_atom : sk.r_tuples) reduced_tuple_group(t_atom, u, body);
        auto lower = [&](const Atom& cond) {
            size_t pairs = condition_pairs(cond.pred);
            if (pairs == 0) {
                body.push_back(cond);
                return;
            }
            std::vector<std::string> escapes;
            for (size_t p = 0; p + 1 < pairs; ++p)
                escapes.push_back(ce.not_b(ce.if_eq(cond.args[2 * p], cond.args[2 * p + 1])));
            escapes.push_back(
                ce.if_eq(cond.args[2 * (pairs - 1)], cond.args[2 * (pairs - 1) + 1]));
            ce.require(ce.or_fold(escapes));
        };
        for (const auto& cond : sk.r_chase) lower(cond);
        for (const auto& cond : rq)
            if (cond.pred != kNum) lower(cond);
        bodies.push_back(std::move(body));
    }
    assemble_goal(prog, sk, std::move(bodies));
    finish(res, sk);
    return res;
}

std::vector<uint32_t> to_bits(uint32_t value, uint32_t width) {
    std::vector<uint32_t> bits(width, 0);
    for (uint32_t b = 0; b < width; ++b)
        bits[width - 1 - b] = (value >> b) & 1u;
    return bits;
}

std::vector<Rule> lt_bits_rules(uint32_t width) {
    // strict order: some most-significant shared prefix, then 0 vs 1
    std::vector<Rule> rules;
    for (uint32_t p = 0; p < width; ++p) {
        Rule r;
        Atom head{kLtV, {}};
        std::vector<Atom> body;
        for (uint32_t q = 0; q < width; ++q) {
            if (q < p) {
                head.args.push_back(tvar("X" + std::to_string(q + 1)));
                body.push_back(Atom{kBit, {tvar("X" + std::to_string(q + 1))}});
            } else if (q == p) {
                head.args.push_back(tvar("Z0"));
                body.push_back(Atom{kZero, {tvar("Z0")}});
            } else {
                head.args.push_back(tvar("U" + std::to_string(q + 1)));
                body.push_back(Atom{kBit, {tvar("U" + std::to_string(q + 1))}});
            }
        }
        for (uint32_t q = 0; q < width; ++q) {
            if (q < p) {
                head.args.push_back(tvar("X" + std::to_string(q + 1)));
            } else if (q == p) {
                head.args.push_back(tvar("O1"));
                body.push_back(Atom{kOne, {tvar("O1")}});
            } else {
                head.args.push_back(tvar("V" + std::to_string(q + 1)));
                body.push_back(Atom{kBit, {tvar("V" + std::to_string(q + 1))}});
            }
        }
        r.head = std::move(head);
        r.body = std::move(body);
        rules.push_back(std::move(r));
    }
    return rules;
}

BitVectorLayout make_layout(const ProgramSkeleton& sk) {
    BitVectorLayout layout;
    uint32_t n = sk.params.n_steps;
    layout.width = 1;
    while ((1u << layout.width) < n + 1) ++layout.width;
    for (const auto& [var, kind] : sk.var_kind) {
        std::vector<std::string> group;
        if (kind == VarKind::Value) {
            group.push_back(var + "_d");
            for (uint32_t b = 1; b <= layout.width; ++b)
                group.push_back(var + "_b" + std::to_string(b));
        } else if (kind == VarKind::Flag || kind == VarKind::Out) {
            group.push_back(var);
        } else {
            for (uint32_t b = 1; b <= layout.width; ++b)
                group.push_back(var + "_b" + std::to_string(b));
        }
        layout.groups.emplace(var, std::move(group));
    }
    return layout;
}

namespace {

std::vector<Rule> bitvec_support_rules(const UniformizedProblem& u, uint32_t n, uint32_t w) {
    const uint32_t m = static_cast<uint32_t>(u.relation_count());
    const uint32_t l = static_cast<uint32_t>(u.sigma_u.size());
    std::vector<Rule> rules;
    rules.push_back({Atom{kBit, {tvar("X")}}, {Atom{kZero, {tvar("X")}}}});
    rules.push_back({Atom{kBit, {tvar("X")}}, {Atom{kOne, {tvar("X")}}}});
    rules.push_back({Atom{kAdom0, {tvar("X")}}, {Atom{kAdom, {tvar("X")}}}});
    rules.push_back({Atom{kAdom0, {tvar("X")}}, {Atom{kZero, {tvar("X")}}}});
    rules.push_back({Atom{kCval, {tvar("X")}}, {Atom{kAdom, {tvar("X")}}}});
    rules.push_back({Atom{kCval, {tvar("X")}}, {Atom{kZero, {tvar("X")}}}});
    rules.push_back({Atom{kCval, {tvar("X")}}, {Atom{kOne, {tvar("X")}}}});
    for (auto& r : lt_bits_rules(w)) rules.push_back(std::move(r));
    {
        // leq_v: strictly below, or equal
        Rule r;
        r.head = Atom{kLeqV, {}};
        Atom lt{kLtV, {}};
        for (uint32_t q = 1; q <= 2 * w; ++q) {
            r.head.args.push_back(tvar("X" + std::to_string(q)));
            lt.args.push_back(tvar("X" + std::to_string(q)));
        }
        r.body = {lt};
        rules.push_back(std::move(r));
        Rule r2;
        r2.head = Atom{kLeqV, {}};
        for (uint32_t q = 1; q <= w; ++q) r2.head.args.push_back(tvar("X" + std::to_string(q)));
        for (uint32_t q = 1; q <= w; ++q) {
            r2.head.args.push_back(tvar("X" + std::to_string(q)));
            r2.body.push_back(Atom{kBit, {tvar("X" + std::to_string(q))}});
        }
        rules.push_back(std::move(r2));
    }
    {
        // num_v: 0 < X <= N
        Rule r;
        r.head = Atom{kNumV, {}};
        Atom lo{kLtV, {}};
        Atom hi{kLeqV, {}};
        for (uint32_t q = 1; q <= w; ++q) lo.args.push_back(tnum(0));
        for (uint32_t q = 1; q <= w; ++q) {
            r.head.args.push_back(tvar("X" + std::to_string(q)));
            lo.args.push_back(tvar("X" + std::to_string(q)));
            hi.args.push_back(tvar("X" + std::to_string(q)));
        }
        for (uint32_t b : to_bits(n, w)) hi.args.push_back(tnum(b));
        r.body = {lo, hi};
        rules.push_back(std::move(r));
    }
    // tp over payload columns: database rows keyed by relation-number bits
    for (uint32_t j = 1; j <= m; ++j) {
        Rule r;
        r.head = Atom{kTp, {}};
        for (uint32_t b : to_bits(j, w)) r.head.args.push_back(tnum(b));
        Atom body{u.relation_order[j - 1], {}};
        for (uint32_t p = 1; p <= u.a; ++p) {
            body.args.push_back(tvar("X" + std::to_string(p)));
            r.head.args.push_back(tvar("X" + std::to_string(p)));
        }
        r.body = {body};
        rules.push_back(std::move(r));
    }
    {
        Rule r;
        r.head = Atom{kTp, {}};
        for (uint32_t q = 0; q < w; ++q) r.head.args.push_back(tnum(0));
        for (uint32_t p = 1; p <= u.a; ++p) {
            r.head.args.push_back(tvar("X" + std::to_string(p)));
            r.body.push_back(Atom{kAdom0, {tvar("X" + std::to_string(p))}});
        }
        rules.push_back(std::move(r));
    }
    auto bit_vars = [&](const std::string& base, std::vector<Atom>* ground) {
        std::vector<Term> vars;
        for (uint32_t b = 1; b <= w; ++b) {
            vars.push_back(tvar(base + std::to_string(b)));
            if (ground) ground->push_back(Atom{kBit, {vars.back()}});
        }
        return vars;
    };
    {
        // rel_ok(F, R.., R'..)
        Rule r;
        std::vector<Term> x = bit_vars("X", &r.body);
        r.head = Atom{kRelOk, {tvar("F")}};
        for (auto& v : x) r.head.args.push_back(v);
        for (auto& v : x) r.head.args.push_back(v);
        r.body.insert(r.body.begin(), Atom{kZero, {tvar("F")}});
        rules.push_back(std::move(r));

        Rule r2;
        r2.head = Atom{kRelOk, {tvar("F")}};
        r2.body.push_back(Atom{kOne, {tvar("F")}});
        Atom nv{kNumV, {}};
        Atom le{kLeqV, {}};
        for (uint32_t b = 1; b <= w; ++b) {
            Term v = tvar("X" + std::to_string(b));
            r2.head.args.push_back(v);
            nv.args.push_back(v);
            le.args.push_back(v);
        }
        for (uint32_t b : to_bits(m, w)) le.args.push_back(tnum(b));
        r2.body.push_back(std::move(nv));
        r2.body.push_back(std::move(le));
        std::vector<Term> y = bit_vars("Y", &r2.body);
        for (auto& v : y) r2.head.args.push_back(v);
        rules.push_back(std::move(r2));
    }
    {
        // rule_ok(F, S..)
        Rule r;
        r.head = Atom{kRuleOk, {tvar("F")}};
        r.body.push_back(Atom{kZero, {tvar("F")}});
        for (uint32_t b = 1; b <= w; ++b) {
            Term v = tvar("S" + std::to_string(b));
            r.head.args.push_back(v);
            r.body.push_back(Atom{kZero, {v}});
        }
        rules.push_back(std::move(r));
        Rule r2;
        r2.head = Atom{kRuleOk, {tvar("F")}};
        r2.body.push_back(Atom{kOne, {tvar("F")}});
        Atom nv{kNumV, {}};
        Atom le{kLeqV, {}};
        for (uint32_t b = 1; b <= w; ++b) {
            Term v = tvar("S" + std::to_string(b));
            r2.head.args.push_back(v);
            nv.args.push_back(v);
            le.args.push_back(v);
        }
        for (uint32_t b : to_bits(l, w)) le.args.push_back(tnum(b));
        r2.body.push_back(std::move(nv));
        r2.body.push_back(std::move(le));
        rules.push_back(std::move(r2));
    }
    {
        // parent_ok(F, C.., Z..)
        Rule r;
        r.head = Atom{kParentOk, {tvar("F")}};
        r.body.push_back(Atom{kZero, {tvar("F")}});
        for (uint32_t b = 1; b <= w; ++b) {
            Term v = tvar("C" + std::to_string(b));
            r.head.args.push_back(v);
            r.body.push_back(Atom{kZero, {v}});
        }
        std::vector<Term> z = bit_vars("Z", &r.body);
        for (auto& v : z) r.head.args.push_back(v);
        rules.push_back(std::move(r));

        Rule r2;
        r2.head = Atom{kParentOk, {tvar("F")}};
        r2.body.push_back(Atom{kOne, {tvar("F")}});
        Atom nv{kNumV, {}};
        Atom lt{kLtV, {}};
        for (uint32_t b = 1; b <= w; ++b) {
            Term v = tvar("C" + std::to_string(b));
            r2.head.args.push_back(v);
            nv.args.push_back(v);
            lt.args.push_back(v);
        }
        for (uint32_t b = 1; b <= w; ++b) {
            Term v = tvar("Z" + std::to_string(b));
            lt.args.push_back(v);
        }
        for (uint32_t b = 1; b <= w; ++b) r2.head.args.push_back(tvar("Z" + std::to_string(b)));
        r2.body.push_back(std::move(nv));
        r2.body.push_back(std::move(lt));
        rules.push_back(std::move(r2));
    }
    return rules;
}

}  // namespace

RewriteResult to_bitvector(const ProgramSkeleton& sk, const BitVectorLayout& layout) {
    const auto& u = *sk.problem;
    const uint32_t w = layout.width;
    const uint32_t a = static_cast<uint32_t>(u.a);
    const uint32_t k = static_cast<uint32_t>(u.k);
    RewriteResult res;
    res.layout = layout;
    DatalogProgram& prog = res.program;
    prog.goal = kGoal;

    for (auto& r : padding_and_domain_rules(u)) prog.rules.push_back(std::move(r));
    for (auto& r : bitvec_support_rules(u, sk.params.n_steps, w)) prog.rules.push_back(std::move(r));
    for (auto& r : boolean_gate_rules(true)) prog.rules.push_back(std::move(r));

    std::set<std::string> avoid;
    for (size_t i = 0; i < u.query_u.disjuncts.front().output_vars.size(); ++i)
        avoid.insert("OUT" + std::to_string(i + 1));

    auto kind_of = [&](const Term& t) -> VarKind {
        auto it = sk.var_kind.find(t.symbol());
        return it == sk.var_kind.end() ? VarKind::Step : it->second;
    };
    // Expands one side of a comparison into components. In a Value context
    // every side carries a payload column followed by the null bits.
    auto expand = [&](const Term& t, bool value_ctx) -> std::vector<Term> {
        std::vector<Term> out;
        if (t.is_number()) {
            if (value_ctx) out.push_back(tnum(0));
            for (uint32_t b : to_bits(t.num(), w)) out.push_back(tnum(b));
            return out;
        }
        if (t.is_constant()) {
            out.push_back(t);
            for (uint32_t b = 0; b < w; ++b) out.push_back(tnum(0));
            return out;
        }
        VarKind kind = kind_of(t);
        if (kind == VarKind::Out) {
            out.push_back(t);
            for (uint32_t b = 0; b < w; ++b) out.push_back(tnum(0));
            return out;
        }
        for (const auto& name : layout.groups.at(t.symbol())) out.push_back(tvar(name));
        if (kind != VarKind::Value && value_ctx) out.insert(out.begin(), tnum(0));
        return out;
    };
    auto pair_is_value = [&](const Term& x, const Term& y) {
        auto vk = [&](const Term& t) {
            if (!t.is_variable()) return false;
            VarKind kd = kind_of(t);
            return kd == VarKind::Value || kd == VarKind::Out;
        };
        return vk(x) || vk(y);
    };

    std::vector<std::vector<Atom>> bodies;
    for (const auto& rq : sk.r_query) {
        std::vector<Atom> body;
        CircuitEmitter ce(body, avoid);
        // query position guards
        for (const auto& atom : rq) {
            if (atom.pred != kNum) continue;
            Atom nv{kNumV, {}};
            for (const auto& c : expand(atom.args[0], false)) nv.args.push_back(c);
            body.push_back(std::move(nv));
        }
        // tuple groups
        for (const auto& t_atom : sk.r_tuples) {
            const uint32_t i = t_atom.args[0].num();
            const Term& rel = t_atom.args[1];
            const Term& flag = t_atom.args[2];
            const std::string rp = "RP" + std::to_string(i);
            Atom rel_ok{kRelOk, {flag}};
            for (const auto& c : expand(rel, false)) rel_ok.args.push_back(c);
            std::vector<Term> rp_bits;
            for (uint32_t b = 1; b <= w; ++b) rp_bits.push_back(tvar(rp + "_b" + std::to_string(b)));
            for (const auto& c : rp_bits) rel_ok.args.push_back(c);
            body.push_back(std::move(rel_ok));
            Atom rule_ok{kRuleOk, {flag}};
            for (const auto& c : expand(t_atom.args[3 + a], false)) rule_ok.args.push_back(c);
            body.push_back(std::move(rule_ok));
            for (uint32_t j = 0; j < k; ++j) {
                Atom parent_ok{kParentOk, {flag}};
                for (const auto& c : expand(t_atom.args[3 + a + 1 + j], false))
                    parent_ok.args.push_back(c);
                for (uint32_t b : to_bits(i, w)) parent_ok.args.push_back(tnum(b));
                body.push_back(std::move(parent_ok));
            }
            Atom tp{kTp, {}};
            for (const auto& c : rp_bits) tp.args.push_back(c);
            for (uint32_t p = 1; p <= a; ++p)
                tp.args.push_back(tvar(tuple_var_value(i, p) + "_d"));
            body.push_back(std::move(tp));
            // ground the value bits, and zero them on database rows
            for (uint32_t p = 1; p <= a; ++p) {
                for (uint32_t b = 1; b <= w; ++b) {
                    std::string bitname = tuple_var_value(i, p) + "_b" + std::to_string(b);
                    body.push_back(Atom{kBit, {tvar(bitname)}});
                    std::string e1 = ce.if_eq(flag, tnum(0));
                    std::string e2 = ce.if_eq(tvar(bitname), tnum(0));
                    ce.require(ce.or_fold({ce.not_b(e1), e2}));
                }
            }
        }
        // conditions
        auto lower = [&](const Atom& cond) {
            size_t pairs = condition_pairs(cond.pred);
            if (pairs == 0) {
                body.push_back(cond);  // adom stays as-is
                return;
            }
            std::vector<std::string> escapes;
            for (size_t p = 0; p + 1 < pairs; ++p) {
                const Term& xl = cond.args[2 * p];
                const Term& xr = cond.args[2 * p + 1];
                bool vctx = pair_is_value(xl, xr);
                auto lc = expand(xl, vctx);
                auto rc = expand(xr, vctx);
                for (size_t c = 0; c < lc.size(); ++c)
                    escapes.push_back(ce.not_b(ce.if_eq(lc[c], rc[c])));
            }
            const Term& tl = cond.args[2 * (pairs - 1)];
            const Term& tr = cond.args[2 * (pairs - 1) + 1];
            bool vctx = pair_is_value(tl, tr);
            auto lc = expand(tl, vctx);
            auto rc = expand(tr, vctx);
            std::string then_b;
            if (lc.size() == 1) {
                then_b = ce.if_eq(lc[0], rc[0]);
            } else {
                std::vector<std::string> neg;
                for (size_t c = 0; c < lc.size(); ++c)
                    neg.push_back(ce.not_b(ce.if_eq(lc[c], rc[c])));
                then_b = ce.not_b(ce.or_fold(neg));
            }
            escapes.push_back(then_b);
            ce.require(ce.or_fold(escapes));
        };
        for (const auto& cond : sk.r_chase) lower(cond);
        for (const auto& cond : rq)
            if (cond.pred != kNum) lower(cond);
        bodies.push_back(std::move(body));
    }
    assemble_goal(prog, sk, std::move(bodies));
    finish(res, sk);
    return res;
}

RewriteResult build_program(const UniformizedProblem& u, const RewriteParams& params) {
    ProgramSkeleton sk = build_skeleton(u, params);
    switch (params.variant) {
        case Variant::Wide: return assemble_wide(sk);
        case Variant::Reduced: return reduce_arity(sk);
        case Variant::BitVec: return to_bitvector(sk, make_layout(sk));
    }
    throw ValidationError("unknown variant");
}

std::string RewriteStats::to_kv() const {
    std::ostringstream os;
    os << "variant=" << variant_name(variant) << "\n"
       << "n_steps=" << n << "\n"
       << "a=" << a << "\n"
       << "k=" << k << "\n"
       << "m=" << m << "\n"
       << "l=" << l << "\n"
       << "rule_count=" << rule_count << "\n"
       << "total_atoms=" << total_atoms << "\n"
       << "goal_rule_atoms=" << goal_rule_atoms << "\n"
       << "r_tuples_atoms=" << r_tuples_atoms << "\n"
       << "r_chase_atoms=" << r_chase_atoms << "\n"
       << "r_query_atoms=" << r_query_atoms << "\n"
       << "max_arity=" << max_arity << "\n"
       << "goal_variables=" << goal_variables << "\n";
    return os.str();
}

DecodedAssignment decode_assignment(const RewriteResult& result,
                                    const std::map<std::string, Term>& assignment) {
    DecodedAssignment out;
    const auto& st = result.stats;
    auto lookup = [&](const std::string& v) -> const Term* {
        auto it = assignment.find(v);
        return it == assignment.end() ? nullptr : &it->second;
    };
    auto as_number = [&](const std::string& v) -> uint32_t {
        const Term* t = lookup(v);
        if (!t || !t->is_number()) throw ValidationError("assignment missing numeric " + v);
        return t->num();
    };
    auto bits_to_number = [&](const std::string& base) -> uint32_t {
        uint32_t val = 0;
        for (uint32_t b = 1; b <= result.layout->width; ++b) {
            const Term* t = lookup(base + "_b" + std::to_string(b));
            if (!t || !t->is_number()) throw ValidationError("assignment missing bit of " + base);
            val = (val << 1) | t->num();
        }
        return val;
    };
    const bool bitvec = result.stats.variant == Variant::BitVec;
    for (uint32_t i = 1; i <= st.n; ++i) {
        TupleEncodingRow row;
        row.index = i;
        if (bitvec) {
            row.rel = bits_to_number(tuple_var_rel(i));
            row.flag = as_number(tuple_var_flag(i));
            row.rule = bits_to_number(tuple_var_rule(i));
            for (uint32_t j = 1; j <= st.k; ++j)
                row.parents.push_back(bits_to_number(tuple_var_parent(i, j)));
            for (uint32_t p = 1; p <= st.a; ++p) {
                uint32_t nullbits = bits_to_number(tuple_var_value(i, p));
                if (nullbits > 0) {
                    row.values.push_back(Term::number(nullbits));
                } else {
                    const Term* d = lookup(tuple_var_value(i, p) + "_d");
                    if (!d) throw ValidationError("assignment missing payload of value");
                    row.values.push_back(*d);
                }
            }
        } else {
            row.rel = as_number(tuple_var_rel(i));
            row.flag = as_number(tuple_var_flag(i));
            row.rule = as_number(tuple_var_rule(i));
            for (uint32_t j = 1; j <= st.k; ++j)
                row.parents.push_back(as_number(tuple_var_parent(i, j)));
            for (uint32_t p = 1; p <= st.a; ++p) {
                const Term* t = lookup(tuple_var_value(i, p));
                if (!t) throw ValidationError("assignment missing value " + tuple_var_value(i, p));
                row.values.push_back(*t);
            }
        }
        out.rows.push_back(std::move(row));
    }
    for (uint32_t t = 1;; ++t) {
        std::string qv = query_var(t);
        if (bitvec) {
            if (!lookup(qv + "_b1")) break;
            out.query_positions.push_back(bits_to_number(qv));
        } else {
            const Term* v = lookup(qv);
            if (!v) break;
            out.query_positions.push_back(v->num());
        }
    }
    return out;
}

}  // namespace tgdlog
