#include "tgdlog/model.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace tgdlog {

bool is_variable_name(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

bool is_constant_name(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    return true;
}

std::set<std::string> atom_vars(const Atom& atom) {
    std::set<std::string> out;
    for (const auto& t : atom.args)
        if (t.is_variable()) out.insert(t.symbol());
    return out;
}

std::set<std::string> atoms_vars(const std::vector<Atom>& atoms) {
    std::set<std::string> out;
    for (const auto& a : atoms)
        for (const auto& t : a.args)
            if (t.is_variable()) out.insert(t.symbol());
    return out;
}

void validate_tgd(const Tgd& tgd) {
    if (tgd.body.empty()) throw ValidationError("tgd has an empty body");
    if (tgd.head.empty()) throw ValidationError("tgd has an empty head");
    for (const auto& atoms : {tgd.body, tgd.head})
        for (const auto& a : atoms)
            for (const auto& t : a.args)
                if (!t.is_variable())
                    throw ValidationError("constants are not allowed in tgds (predicate " +
                                          a.pred + ")");
    auto body_vars = atoms_vars(tgd.body);
    std::set<std::string> ex(tgd.existentials.begin(), tgd.existentials.end());
    if (ex.size() != tgd.existentials.size())
        throw ValidationError("duplicate existential variable");
    for (const auto& v : ex)
        if (body_vars.count(v))
            throw ValidationError("existential variable " + v + " occurs in the body");
    for (const auto& v : atoms_vars(tgd.head))
        if (!body_vars.count(v) && !ex.count(v))
            throw ValidationError("unsafe head variable " + v);
}

void validate_query(const ConjunctiveQuery& q) {
    if (q.atoms.empty()) throw ValidationError("query has no atoms");
    auto vars = atoms_vars(q.atoms);
    for (const auto& v : q.output_vars)
        if (!vars.count(v)) throw ValidationError("output variable " + v + " not in query body");
}

void validate_query(const UnionQuery& q) {
    if (q.disjuncts.empty()) throw ValidationError("union query has no disjuncts");
    for (const auto& d : q.disjuncts) validate_query(d);
    size_t arity = q.disjuncts.front().output_vars.size();
    for (const auto& d : q.disjuncts)
        if (d.output_vars.size() != arity)
            throw ValidationError("union query disjuncts disagree on output arity");
}

void Database::declare(const std::string& pred, size_t arity) {
    auto it = schema.find(pred);
    if (it == schema.end()) {
        schema.emplace(pred, arity);
    } else if (it->second != arity) {
        throw ValidationError("arity conflict for predicate " + pred + ": " +
                              std::to_string(it->second) + " vs " + std::to_string(arity));
    }
}

void Database::add_fact(const Atom& fact) {
    for (const auto& t : fact.args)
        if (!t.is_constant())
            throw ValidationError("fact for " + fact.pred + " contains a non-constant argument");
    declare(fact.pred, fact.arity());
    facts.insert(fact);
    for (const auto& t : fact.args) domain.insert(t.symbol());
}

void validate_problem(const std::vector<Tgd>& sigma, const ConjunctiveQuery& q,
                      const Database& db) {
    std::map<std::string, size_t> arities = db.schema;
    auto note = [&](const Atom& a) {
        auto it = arities.find(a.pred);
        if (it == arities.end())
            arities.emplace(a.pred, a.arity());
        else if (it->second != a.arity())
            throw ValidationError("arity conflict for predicate " + a.pred);
    };
    for (const auto& t : sigma) {
        validate_tgd(t);
        for (const auto& a : t.body) note(a);
        for (const auto& a : t.head) note(a);
    }
    validate_query(q);
    for (const auto& a : q.atoms) note(a);
}

NumericExtension NumericExtension::build(const Database& db, uint32_t n) {
    if (n < 1) throw ValidationError("numeric extension requires N >= 1");
    NumericExtension ext;
    ext.n_max = n;
    ext.dom = db.domain;
    return ext;
}

std::vector<uint32_t> NumericExtension::num() const {
    std::vector<uint32_t> out;
    for (uint32_t i = 1; i <= n_max; ++i) out.push_back(i);
    return out;
}

std::vector<std::pair<uint32_t, uint32_t>> NumericExtension::succ() const {
    std::vector<std::pair<uint32_t, uint32_t>> out;
    for (uint32_t i = 0; i < n_max; ++i) out.emplace_back(i, i + 1);
    return out;
}

std::vector<std::pair<uint32_t, uint32_t>> NumericExtension::lt() const {
    std::vector<std::pair<uint32_t, uint32_t>> out;
    for (uint32_t i = 0; i <= n_max; ++i)
        for (uint32_t j = i + 1; j <= n_max; ++j) out.emplace_back(i, j);
    return out;
}

bool NumericExtension::dnum_contains(const Term& ground) const {
    if (ground.is_number()) return ground.num() <= n_max;
    if (ground.is_constant()) return dom.count(ground.symbol()) > 0;
    return false;
}

size_t DatalogProgram::goal_arity() const {
    for (const auto& r : rules)
        if (r.head.pred == goal) return r.head.arity();
    return 0;
}

std::set<std::string> DatalogProgram::idb_predicates() const {
    std::set<std::string> out;
    for (const auto& r : rules) out.insert(r.head.pred);
    return out;
}

std::map<std::string, size_t> DatalogProgram::predicate_arities() const {
    std::map<std::string, size_t> out;
    auto note = [&](const Atom& a) {
        auto it = out.find(a.pred);
        if (it == out.end())
            out.emplace(a.pred, a.arity());
        else if (it->second != a.arity())
            throw ValidationError("arity conflict for predicate " + a.pred);
    };
    for (const auto& r : rules) {
        note(r.head);
        for (const auto& a : r.body) note(a);
    }
    return out;
}

size_t max_arity(const DatalogProgram& program) {
    size_t best = 0;
    for (const auto& r : program.rules) {
        best = std::max(best, r.head.arity());
        for (const auto& a : r.body) best = std::max(best, a.arity());
    }
    return best;
}

namespace {

// Predicate dependency edges: head predicate -> body predicates.
std::map<std::string, std::set<std::string>> dependency_graph(const DatalogProgram& p) {
    std::map<std::string, std::set<std::string>> g;
    for (const auto& r : p.rules) {
        auto& deps = g[r.head.pred];
        for (const auto& a : r.body) deps.insert(a.pred);
    }
    return g;
}

}  // namespace

bool check_nonrecursive(const DatalogProgram& program) {
    auto g = dependency_graph(program);
    std::map<std::string, int> state;  // 0 = new, 1 = on stack, 2 = done
    std::function<bool(const std::string&)> visit = [&](const std::string& p) -> bool {
        int& s = state[p];
        if (s == 1) return false;
        if (s == 2) return true;
        s = 1;
        auto it = g.find(p);
        if (it != g.end())
            for (const auto& d : it->second)
                if (!visit(d)) return false;
        s = 2;
        return true;
    };
    for (const auto& [pred, deps] : g) {
        (void)deps;
        if (!visit(pred)) return false;
    }
    return true;
}

std::vector<std::string> stratify(const DatalogProgram& program) {
    auto g = dependency_graph(program);
    auto idb = program.idb_predicates();
    std::vector<std::string> order;
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& p) {
        if (!idb.count(p)) return;  // EDB predicates need no stratum
        int& s = state[p];
        if (s == 1) throw ValidationError("recursive predicate " + p);
        if (s == 2) return;
        s = 1;
        for (const auto& d : g[p]) visit(d);
        s = 2;
        order.push_back(p);
    };
    for (const auto& p : idb) visit(p);
    return order;
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Wide: return "wide";
        case Variant::Reduced: return "reduced";
        case Variant::BitVec: return "bitvec";
    }
    return "?";
}

std::optional<Variant> variant_from_name(const std::string& name) {
    if (name == "wide") return Variant::Wide;
    if (name == "reduced") return Variant::Reduced;
    if (name == "bitvec") return Variant::BitVec;
    return std::nullopt;
}

namespace {

class Renamer {
public:
    Term rename(const Term& t) {
        if (!t.is_variable()) return t;
        auto it = map_.find(t.symbol());
        if (it == map_.end())
            it = map_.emplace(t.symbol(), "V" + std::to_string(map_.size())).first;
        return Term::variable(it->second);
    }
    std::vector<Atom> rename(const std::vector<Atom>& atoms) {
        std::vector<Atom> out;
        out.reserve(atoms.size());
        for (const auto& a : atoms) {
            Atom r{a.pred, {}};
            r.args.reserve(a.args.size());
            for (const auto& t : a.args) r.args.push_back(rename(t));
            out.push_back(std::move(r));
        }
        return out;
    }
    std::optional<std::string> renamed(const std::string& v) const {
        auto it = map_.find(v);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::map<std::string, std::string> map_;
};

}  // namespace

Tgd alpha_canonical(const Tgd& tgd) {
    Renamer ren;
    Tgd out;
    out.body = ren.rename(tgd.body);
    out.head = ren.rename(tgd.head);
    for (const auto& v : tgd.existentials)
        if (auto r = ren.renamed(v)) out.existentials.push_back(*r);
    std::sort(out.existentials.begin(), out.existentials.end());
    return out;
}

ConjunctiveQuery alpha_canonical(const ConjunctiveQuery& q) {
    Renamer ren;
    ConjunctiveQuery out;
    out.atoms = ren.rename(q.atoms);
    for (const auto& v : q.output_vars) {
        auto r = ren.renamed(v);
        out.output_vars.push_back(r ? *r : v);
    }
    return out;
}

bool alpha_equal(const Tgd& a, const Tgd& b) {
    auto ca = alpha_canonical(a);
    auto cb = alpha_canonical(b);
    return ca.body == cb.body && ca.head == cb.head && ca.existentials == cb.existentials;
}

bool alpha_equal(const ConjunctiveQuery& a, const ConjunctiveQuery& b) {
    auto ca = alpha_canonical(a);
    auto cb = alpha_canonical(b);
    return ca.atoms == cb.atoms && ca.output_vars == cb.output_vars;
}

}  // namespace tgdlog
