#include "tgdlog/normalize.hpp"

#include <algorithm>
#include <set>

namespace tgdlog {

namespace {

size_t atom_count(const std::vector<Tgd>& sigma) {
    size_t n = 0;
    for (const auto& t : sigma) n += t.body.size() + t.head.size();
    return n;
}

std::set<std::string> predicate_names(const std::vector<Tgd>& sigma) {
    std::set<std::string> out;
    for (const auto& t : sigma) {
        for (const auto& a : t.body) out.insert(a.pred);
        for (const auto& a : t.head) out.insert(a.pred);
    }
    return out;
}

std::string fresh_name(const std::string& base, size_t& counter,
                       const std::set<std::string>& used) {
    for (;;) {
        std::string cand = base + std::to_string(++counter);
        if (!used.count(cand)) return cand;
    }
}

}  // namespace

std::pair<std::vector<Tgd>, NormalizationReport> to_normal_form(const std::vector<Tgd>& sigma) {
    NormalizationReport report;
    report.size_before = atom_count(sigma);
    std::set<std::string> used = predicate_names(sigma);
    size_t aux_counter = 0;

    std::vector<Tgd> out;
    for (const auto& tgd : sigma) {
        validate_tgd(tgd);
        // existentials that never occur in the head are droppable
        auto head_vars = atoms_vars(tgd.head);
        std::vector<std::string> exs;
        for (const auto& e : tgd.existentials)
            if (head_vars.count(e)) exs.push_back(e);

        if (exs.size() <= 1 && tgd.head.size() == 1) {
            Tgd copy = tgd;
            copy.existentials = exs;
            out.push_back(std::move(copy));
            continue;
        }
        if (exs.empty()) {
            // full tgd with several head atoms: split
            for (const auto& h : tgd.head) {
                Tgd part;
                part.body = tgd.body;
                part.head = {h};
                out.push_back(std::move(part));
            }
            continue;
        }

        // chain the existentials through auxiliaries carrying the frontier
        std::set<std::string> ex_set(exs.begin(), exs.end());
        std::vector<std::string> frontier;  // head-used universal variables, in head order
        std::set<std::string> seen;
        for (const auto& a : tgd.head)
            for (const auto& t : a.args)
                if (t.is_variable() && !ex_set.count(t.symbol()) && seen.insert(t.symbol()).second)
                    frontier.push_back(t.symbol());
        // chaining order: existentials by first occurrence in the head
        std::vector<std::string> chain;
        std::set<std::string> chained;
        for (const auto& a : tgd.head)
            for (const auto& t : a.args)
                if (t.is_variable() && ex_set.count(t.symbol()) &&
                    chained.insert(t.symbol()).second)
                    chain.push_back(t.symbol());

        std::vector<Atom> prev_body = tgd.body;
        std::vector<std::string> carried = frontier;
        for (const auto& e : chain) {
            std::string aux = fresh_name("aux", aux_counter, used);
            used.insert(aux);
            report.aux_predicates.push_back(aux);
            Atom head{aux, {}};
            for (const auto& v : carried) head.args.push_back(Term::variable(v));
            head.args.push_back(Term::variable(e));
            Tgd step;
            step.body = prev_body;
            step.head = {head};
            step.existentials = {e};
            out.push_back(step);
            carried.push_back(e);
            prev_body = {head};
        }
        for (const auto& h : tgd.head) {
            Tgd part;
            part.body = prev_body;
            part.head = {h};
            out.push_back(std::move(part));
        }
    }
    report.size_after = atom_count(out);
    return {std::move(out), std::move(report)};
}

size_t UniformizedProblem::relation_number(const std::string& padded) const {
    auto it = std::find(relation_order.begin(), relation_order.end(), padded);
    if (it == relation_order.end()) throw ValidationError("unknown relation " + padded);
    return static_cast<size_t>(it - relation_order.begin()) + 1;
}

UniformizedProblem uniformize(const std::vector<Tgd>& sigma, const UnionQuery& q) {
    validate_query(q);
    // schema of the problem: predicates of sigma and q with their arities
    std::map<std::string, size_t> arities;
    auto note = [&](const Atom& a) {
        auto it = arities.find(a.pred);
        if (it == arities.end())
            arities.emplace(a.pred, a.arity());
        else if (it->second != a.arity())
            throw ValidationError("arity conflict for predicate " + a.pred);
    };
    for (const auto& t : sigma) {
        if (!t.is_normal_form()) throw ValidationError("uniformize requires normal-form tgds");
        validate_tgd(t);
        for (const auto& a : t.body) note(a);
        for (const auto& a : t.head) note(a);
    }
    for (const auto& d : q.disjuncts)
        for (const auto& a : d.atoms) note(a);

    UniformizedProblem u;
    for (const auto& [pred, ar] : arities) {
        if (ar == 0)
            throw ValidationError("predicate " + pred + " has arity 0; rewriting needs arity >= 1");
        u.a = std::max(u.a, ar);
        u.original_arity.emplace(pred, ar);
    }
    for (const auto& t : sigma) u.k = std::max(u.k, t.body.size());

    std::set<std::string> used;
    for (const auto& [pred, ar] : arities) {
        (void)ar;
        used.insert(pred);
    }
    for (const auto& [pred, ar] : arities) {
        if (ar == u.a) {
            u.padded_name.emplace(pred, pred);
            continue;
        }
        std::string name = pred + "_p";
        while (used.count(name)) name += "_";
        used.insert(name);
        u.padded_name.emplace(pred, name);
        Rule rule;
        rule.head.pred = name;
        Atom body{pred, {}};
        for (size_t i = 0; i < ar; ++i) {
            body.args.push_back(Term::variable("X" + std::to_string(i + 1)));
            rule.head.args.push_back(Term::variable("X" + std::to_string(i + 1)));
        }
        for (size_t i = ar; i < u.a; ++i) rule.head.args.push_back(Term::variable("X1"));
        rule.body = {body};
        u.padding_rules.push_back(std::move(rule));
    }
    for (const auto& [orig, padded] : u.padded_name) {
        (void)orig;
        u.relation_order.push_back(padded);
    }
    std::sort(u.relation_order.begin(), u.relation_order.end());

    auto pad_atom = [&](const Atom& a) {
        Atom out{u.padded_name.at(a.pred), a.args};
        for (size_t i = a.args.size(); i < u.a; ++i) out.args.push_back(a.args.front());
        return out;
    };
    for (const auto& t : sigma) {
        Tgd padded;
        for (const auto& a : t.body) padded.body.push_back(pad_atom(a));
        while (padded.body.size() < u.k) padded.body.push_back(padded.body.front());
        padded.head = {pad_atom(t.head.front())};
        padded.existentials = t.existentials;
        u.sigma_u.push_back(std::move(padded));
    }

    size_t fresh_counter = 0;
    std::set<std::string> qvars;
    for (const auto& d : q.disjuncts)
        for (const auto& v : atoms_vars(d.atoms)) qvars.insert(v);
    auto fresh_var = [&]() {
        for (;;) {
            std::string v = "PV" + std::to_string(fresh_counter++);
            if (!qvars.count(v)) return v;
        }
    };
    for (const auto& d : q.disjuncts) {
        ConjunctiveQuery padded;
        padded.output_vars = d.output_vars;
        for (const auto& a : d.atoms) {
            Atom pa{u.padded_name.at(a.pred), a.args};
            for (size_t i = a.args.size(); i < u.a; ++i)
                pa.args.push_back(Term::variable(fresh_var()));
            padded.atoms.push_back(std::move(pa));
        }
        u.query_u.disjuncts.push_back(std::move(padded));
    }
    return u;
}

UniformizedProblem uniformize(const std::vector<Tgd>& sigma, const ConjunctiveQuery& q) {
    UnionQuery uq;
    uq.disjuncts.push_back(q);
    return uniformize(sigma, uq);
}

Database pad_database(const UniformizedProblem& u, const Database& db) {
    Database out;
    for (const auto& [pred, padded] : u.padded_name)
        out.declare(padded, u.a);
    for (const auto& f : db.facts) {
        auto it = u.padded_name.find(f.pred);
        if (it == u.padded_name.end()) continue;  // outside the problem schema
        Atom padded{it->second, f.args};
        for (size_t i = f.args.size(); i < u.a; ++i) padded.args.push_back(f.args.front());
        out.add_fact(padded);
    }
    return out;
}

}  // namespace tgdlog
