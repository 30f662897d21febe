#include "tgdlog/chase.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <unordered_map>

namespace tgdlog {

std::string GroundAtom::str() const {
    std::string out = pred + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += args[i].str();
    }
    return out + ")";
}

namespace {

// Interned values: constants get ids >= 0, the null with id k is -(int)k.
using IVal = int32_t;

inline bool ival_is_null(IVal v) { return v < 0; }
inline uint32_t ival_null_id(IVal v) { return static_cast<uint32_t>(-v); }

struct SymTab {
    std::vector<std::string> syms;
    std::map<std::string, IVal> ids;

    IVal intern(const std::string& s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        IVal id = static_cast<IVal>(syms.size());
        syms.push_back(s);
        ids.emplace(s, id);
        return id;
    }
    ChaseValue to_value(IVal v) const {
        if (ival_is_null(v)) return ChaseValue::null(ival_null_id(v));
        return ChaseValue::constant(syms[v]);
    }
    IVal intern_value(const ChaseValue& v) {
        if (v.is_null) return -static_cast<IVal>(v.null_id);
        return intern(v.sym);
    }
};

struct IAtom {
    int32_t pred;
    std::vector<IVal> args;
    bool operator==(const IAtom& o) const { return pred == o.pred && args == o.args; }
};

struct IAtomHash {
    size_t operator()(const IAtom& a) const {
        size_t h = std::hash<int32_t>()(a.pred);
        for (IVal v : a.args) h = h * 1000003u + std::hash<IVal>()(v);
        return h;
    }
};

// A compiled atom pattern: each argument is a constant value or a variable slot.
struct Pattern {
    int32_t pred;
    std::vector<IVal> const_args;   // valid where slot < 0
    std::vector<int> slots;         // -1 = constant, else variable slot id
};

struct CompiledConjunction {
    std::vector<Pattern> atoms;
    std::vector<std::string> var_names;  // slot id -> name
};

CompiledConjunction compile(const std::vector<Atom>& atoms, SymTab& tab) {
    CompiledConjunction cc;
    std::map<std::string, int> slot_of;
    for (const auto& a : atoms) {
        Pattern p;
        p.pred = tab.intern(a.pred);
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                auto it = slot_of.find(t.symbol());
                if (it == slot_of.end()) {
                    it = slot_of.emplace(t.symbol(), static_cast<int>(cc.var_names.size())).first;
                    cc.var_names.push_back(t.symbol());
                }
                p.slots.push_back(it->second);
                p.const_args.push_back(0);
            } else if (t.is_constant()) {
                p.slots.push_back(-1);
                p.const_args.push_back(tab.intern(t.symbol()));
            } else {
                throw ValidationError("numeric term in a chase pattern");
            }
        }
        cc.atoms.push_back(std::move(p));
    }
    return cc;
}

struct StepRec {
    IAtom atom;
    uint32_t level = 0;
    bool from_db = true;
    size_t rule_index = 0;
    size_t head_index = 0;
    std::vector<uint32_t> parents;        // 0-based indices into the state
    std::vector<IVal> hom;                // slot id -> value, per the rule's compiled body
    std::vector<IVal> ex_vals;            // value of each existential of the rule
    std::vector<uint32_t> closure;        // sorted 0-based indices incl. self
};

struct Engine {
    SymTab tab;
    std::vector<StepRec> atoms;
    std::unordered_map<IAtom, uint32_t, IAtomHash> dedup;
    std::map<int32_t, std::vector<uint32_t>> by_pred;
    bool truncated = false;

    uint32_t add(StepRec rec) {
        uint32_t idx = static_cast<uint32_t>(atoms.size());
        dedup.emplace(rec.atom, idx);
        by_pred[rec.atom.pred].push_back(idx);
        atoms.push_back(std::move(rec));
        return idx;
    }

    bool contains(const IAtom& a) const { return dedup.count(a) > 0; }

    // Enumerates homomorphisms of the compiled conjunction into the state,
    // most-constrained pattern first, with forward checking on bound slots.
    // The callback returns false to stop the enumeration.
    bool find_homs(const CompiledConjunction& cc,
                   const std::function<bool(const std::vector<IVal>&,
                                            const std::vector<uint32_t>&)>& cb,
                   size_t* budget = nullptr) const {
        std::vector<IVal> binding(cc.var_names.size(), INT32_MAX);
        std::vector<uint32_t> image(cc.atoms.size(), 0);
        std::vector<bool> done(cc.atoms.size(), false);

        std::function<bool()> rec = [&]() -> bool {
            // pick the unmatched pattern with the fewest candidates
            int best = -1;
            size_t best_count = SIZE_MAX;
            for (size_t i = 0; i < cc.atoms.size(); ++i) {
                if (done[i]) continue;
                size_t count = 0;
                auto it = by_pred.find(cc.atoms[i].pred);
                if (it != by_pred.end()) {
                    for (uint32_t idx : it->second)
                        if (matches(cc.atoms[i], binding, atoms[idx].atom)) ++count;
                }
                if (count < best_count) {
                    best_count = count;
                    best = static_cast<int>(i);
                }
                if (count == 0) break;
            }
            if (best < 0) return cb(binding, image);
            if (best_count == 0) return true;
            const Pattern& p = cc.atoms[best];
            done[best] = true;
            auto it = by_pred.find(p.pred);
            if (it != by_pred.end()) {
                for (uint32_t idx : it->second) {
                    if (budget) {
                        if (*budget == 0) return false;
                        --*budget;
                    }
                    if (!matches(p, binding, atoms[idx].atom)) continue;
                    std::vector<int> bound_here;
                    for (size_t j = 0; j < p.slots.size(); ++j) {
                        int s = p.slots[j];
                        if (s >= 0 && binding[s] == INT32_MAX) {
                            binding[s] = atoms[idx].atom.args[j];
                            bound_here.push_back(s);
                        }
                    }
                    image[best] = idx;
                    bool go_on = rec();
                    for (int s : bound_here) binding[s] = INT32_MAX;
                    if (!go_on) {
                        done[best] = false;
                        return false;
                    }
                }
            }
            done[best] = false;
            return true;
        };
        return rec();
    }

    static bool matches(const Pattern& p, const std::vector<IVal>& binding, const IAtom& a) {
        if (p.pred != a.pred || p.slots.size() != a.args.size()) return false;
        for (size_t j = 0; j < p.slots.size(); ++j) {
            int s = p.slots[j];
            if (s < 0) {
                if (a.args[j] != p.const_args[j]) return false;
            } else {
                // repeated slots within the pattern must agree
                IVal b = binding[s];
                if (b != INT32_MAX && b != a.args[j]) return false;
                for (size_t j2 = j + 1; j2 < p.slots.size(); ++j2)
                    if (p.slots[j2] == s && a.args[j2] != a.args[j]) return false;
            }
        }
        return true;
    }
};

std::vector<uint32_t> merge_closures(const Engine& eng, const std::vector<uint32_t>& parents,
                                     uint32_t self) {
    std::vector<uint32_t> out;
    for (uint32_t p : parents) {
        const auto& c = eng.atoms[p].closure;
        std::vector<uint32_t> merged;
        std::set_union(out.begin(), out.end(), c.begin(), c.end(), std::back_inserter(merged));
        out = std::move(merged);
    }
    out.insert(std::lower_bound(out.begin(), out.end(), self), self);
    return out;
}

void seed_database(Engine& eng, const Database& db) {
    for (const auto& f : db.facts) {
        StepRec rec;
        rec.atom.pred = eng.tab.intern(f.pred);
        for (const auto& t : f.args) rec.atom.args.push_back(eng.tab.intern(t.symbol()));
        rec.level = 0;
        rec.from_db = true;
        rec.closure = {static_cast<uint32_t>(eng.atoms.size())};
        eng.add(std::move(rec));
    }
}

// head argument slots: >= 0 body variable, or -(2+e) for existential e
struct CompiledHead {
    int32_t pred = 0;
    std::vector<int> slots;
};

struct CompiledTgd {
    CompiledConjunction body;
    std::vector<CompiledHead> heads;
    size_t existential_count = 0;
    bool normal_form = false;
    std::vector<std::string> ex_names;
};

CompiledTgd compile_tgd(const Tgd& tgd, SymTab& tab) {
    validate_tgd(tgd);
    CompiledTgd ct;
    ct.body = compile(tgd.body, tab);
    ct.existential_count = tgd.existentials.size();
    ct.normal_form = tgd.is_normal_form();
    ct.ex_names = tgd.existentials;
    std::map<std::string, int> slot_of;
    for (size_t i = 0; i < ct.body.var_names.size(); ++i)
        slot_of[ct.body.var_names[i]] = static_cast<int>(i);
    std::map<std::string, int> ex_of;
    for (size_t e = 0; e < tgd.existentials.size(); ++e)
        ex_of[tgd.existentials[e]] = static_cast<int>(e);
    for (const Atom& head : tgd.head) {
        CompiledHead ch;
        ch.pred = tab.intern(head.pred);
        for (const auto& t : head.args) {
            if (!t.is_variable()) throw ValidationError("constant in tgd head");
            auto ex = ex_of.find(t.symbol());
            if (ex != ex_of.end()) {
                ch.slots.push_back(-2 - ex->second);
            } else {
                auto it = slot_of.find(t.symbol());
                if (it == slot_of.end())
                    throw ValidationError("unsafe head variable " + t.symbol());
                ch.slots.push_back(it->second);
            }
        }
        ct.heads.push_back(std::move(ch));
    }
    return ct;
}

// One breadth-first saturation pass: apply every (rule, hom) whose body image
// has maximum level exactly `level`, producing atoms of level `level + 1`.
// A fresh null is numbered by the 1-based index of the first atom introducing
// it; for normal-form rules that is exactly the producing step's index.
bool saturate_level(Engine& eng, const std::vector<CompiledTgd>& rules, uint32_t level,
                    const ChaseOptions& opts) {
    bool added = false;
    size_t snapshot = eng.atoms.size();  // applications only consider existing atoms
    for (size_t r = 0; r < rules.size(); ++r) {
        const CompiledTgd& ct = rules[r];
        eng.find_homs(ct.body, [&](const std::vector<IVal>& binding,
                                   const std::vector<uint32_t>& image) {
            uint32_t maxlev = 0;
            for (uint32_t idx : image) {
                if (idx >= snapshot) return true;
                maxlev = std::max(maxlev, eng.atoms[idx].level);
            }
            if (maxlev != level) return true;
            std::vector<IVal> ex_vals(ct.existential_count, 0);
            std::vector<bool> ex_set(ct.existential_count, false);
            for (const CompiledHead& ch : ct.heads) {
                if (eng.atoms.size() >= opts.atom_cap) {
                    eng.truncated = true;
                    return false;
                }
                uint32_t self = static_cast<uint32_t>(eng.atoms.size());
                IAtom head{ch.pred, {}};
                for (int s : ch.slots) {
                    if (s >= 0) {
                        head.args.push_back(binding[s]);
                    } else {
                        size_t e = static_cast<size_t>(-2 - s);
                        if (!ex_set[e]) {
                            ex_vals[e] = -static_cast<IVal>(self + 1);
                            ex_set[e] = true;
                        }
                        head.args.push_back(ex_vals[e]);
                    }
                }
                bool has_fresh = false;
                for (IVal v : head.args)
                    if (ival_is_null(v) && ival_null_id(v) == self + 1) has_fresh = true;
                if (!has_fresh && eng.contains(head)) continue;
                StepRec rec;
                rec.atom = std::move(head);
                rec.level = level + 1;
                rec.from_db = false;
                rec.rule_index = r;
                rec.head_index = static_cast<size_t>(&ch - ct.heads.data());
                rec.parents.assign(image.begin(), image.end());
                rec.hom = binding;
                rec.ex_vals = ex_vals;
                rec.closure = merge_closures(eng, rec.parents, self);
                eng.add(std::move(rec));
                added = true;
            }
            return true;
        });
        if (eng.truncated) break;
    }
    return added;
}

ChaseStep to_public_step(const Engine& eng, const StepRec& rec,
                         const std::vector<CompiledTgd>& rules,
                         const std::map<uint32_t, uint32_t>* renumber) {
    auto value_of = [&](IVal v) -> ChaseValue {
        if (ival_is_null(v) && renumber) {
            auto it = renumber->find(ival_null_id(v));
            if (it != renumber->end()) return ChaseValue::null(it->second);
        }
        return eng.tab.to_value(v);
    };
    ChaseStep step;
    step.atom.pred = eng.tab.syms[rec.atom.pred];
    for (IVal v : rec.atom.args) step.atom.args.push_back(value_of(v));
    step.level = rec.level;
    step.prov.from_db = rec.from_db;
    if (!rec.from_db) {
        step.prov.rule_index = rec.rule_index;
        step.prov.head_index = rec.head_index;
        for (uint32_t p : rec.parents) {
            uint32_t one_based = p + 1;
            if (renumber) {
                auto it = renumber->find(one_based);
                step.prov.parents.push_back(it != renumber->end() ? it->second : one_based);
            } else {
                step.prov.parents.push_back(one_based);
            }
        }
        const auto& names = rules[rec.rule_index].body.var_names;
        for (size_t s = 0; s < names.size(); ++s)
            step.prov.hom.emplace(names[s], value_of(rec.hom[s]));
        const auto& ex_names = rules[rec.rule_index].ex_names;
        for (size_t e = 0; e < ex_names.size(); ++e)
            if (e < rec.ex_vals.size() && rec.ex_vals[e] != 0)
                step.prov.hom.emplace(ex_names[e], value_of(rec.ex_vals[e]));
    }
    return step;
}

}  // namespace

std::vector<std::pair<size_t, Homomorphism>> applicable_steps(
    const std::vector<GroundAtom>& state, const std::vector<Tgd>& sigma) {
    Engine eng;
    for (const auto& a : state) {
        StepRec rec;
        rec.atom.pred = eng.tab.intern(a.pred);
        for (const auto& v : a.args) rec.atom.args.push_back(eng.tab.intern_value(v));
        rec.closure = {static_cast<uint32_t>(eng.atoms.size())};
        if (!eng.contains(rec.atom)) eng.add(std::move(rec));
    }
    std::vector<std::pair<size_t, Homomorphism>> out;
    for (size_t r = 0; r < sigma.size(); ++r) {
        CompiledConjunction body = compile(sigma[r].body, eng.tab);
        std::vector<std::pair<std::vector<IVal>, Homomorphism>> here;
        eng.find_homs(body, [&](const std::vector<IVal>& binding,
                                const std::vector<uint32_t>& image) {
            Homomorphism hom;
            for (size_t s = 0; s < body.var_names.size(); ++s)
                hom.emplace(body.var_names[s], eng.tab.to_value(binding[s]));
            std::vector<IVal> key;
            for (uint32_t idx : image)
                for (IVal v : eng.atoms[idx].atom.args) key.push_back(v);
            here.emplace_back(std::move(key), std::move(hom));
            return true;
        });
        std::sort(here.begin(), here.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [key, hom] : here) {
            (void)key;
            out.emplace_back(r, std::move(hom));
        }
    }
    return out;
}

ChaseLevels chase_to_level(const Database& db, const std::vector<Tgd>& sigma,
                           uint32_t max_level, const ChaseOptions& opts) {
    Engine eng;
    std::vector<CompiledTgd> rules;
    for (const auto& t : sigma) rules.push_back(compile_tgd(t, eng.tab));
    seed_database(eng, db);
    for (uint32_t level = 0; level < max_level; ++level) {
        if (!saturate_level(eng, rules, level, opts)) break;
        if (eng.truncated) break;
    }
    ChaseLevels out;
    out.truncated = eng.truncated;
    for (const auto& rec : eng.atoms) out.atoms.push_back(to_public_step(eng, rec, rules, nullptr));
    return out;
}

namespace {

struct OracleRun {
    Engine eng;
    std::vector<CompiledTgd> rules;
};

EntailResult search_query(OracleRun& run, const ConjunctiveQuery& q, uint32_t max_steps,
                          const ChaseOptions& opts, const std::vector<Tgd>& sigma) {
    EntailResult res;
    res.truncated = run.eng.truncated;
    CompiledConjunction cq = compile(q.atoms, run.eng.tab);
    size_t budget = opts.hom_cap;
    std::vector<IVal> found_binding;
    std::vector<uint32_t> found_closure;
    run.eng.find_homs(
        cq,
        [&](const std::vector<IVal>& binding, const std::vector<uint32_t>& image) {
            std::vector<uint32_t> closure;
            for (uint32_t idx : image) {
                const auto& c = run.eng.atoms[idx].closure;
                std::vector<uint32_t> merged;
                std::set_union(closure.begin(), closure.end(), c.begin(), c.end(),
                               std::back_inserter(merged));
                closure = std::move(merged);
            }
            if (closure.size() <= max_steps) {
                found_binding = binding;
                found_closure = std::move(closure);
                return false;  // accept the first witness within the bound
            }
            return true;
        },
        &budget);
    if (budget == 0) res.truncated = true;
    if (!found_closure.empty()) {
        res.status = EntailStatus::Yes;
        // renumber: global step index (1-based) -> position in the witness
        std::map<uint32_t, uint32_t> renumber;
        for (size_t i = 0; i < found_closure.size(); ++i)
            renumber.emplace(found_closure[i] + 1, static_cast<uint32_t>(i + 1));
        for (uint32_t idx : found_closure)
            res.witness.steps.push_back(
                to_public_step(run.eng, run.eng.atoms[idx], run.rules, &renumber));
        for (size_t s = 0; s < cq.var_names.size(); ++s) {
            IVal v = found_binding[s];
            if (ival_is_null(v)) {
                auto it = renumber.find(ival_null_id(v));
                res.query_hom.emplace(cq.var_names[s],
                                      ChaseValue::null(it != renumber.end() ? it->second : 0));
            } else {
                res.query_hom.emplace(cq.var_names[s], run.eng.tab.to_value(v));
            }
        }
    }
    (void)sigma;
    return res;
}

}  // namespace

EntailResult entails(const Database& db, const std::vector<Tgd>& sigma, const UnionQuery& q,
                     uint32_t max_steps, const ChaseOptions& opts) {
    if (max_steps < 1) throw ValidationError("entails requires max_steps >= 1");
    OracleRun run;
    for (const auto& t : sigma) run.rules.push_back(compile_tgd(t, run.eng.tab));
    seed_database(run.eng, db);
    for (uint32_t level = 0; level < max_steps; ++level) {
        if (!saturate_level(run.eng, run.rules, level, opts)) break;
        if (run.eng.truncated) break;
    }
    EntailResult best;
    best.truncated = run.eng.truncated;
    for (const auto& cq : q.disjuncts) {
        EntailResult r = search_query(run, cq, max_steps, opts, sigma);
        if (r.status == EntailStatus::Yes) return r;
        best.truncated = best.truncated || r.truncated;
    }
    return best;
}

EntailResult entails(const Database& db, const std::vector<Tgd>& sigma,
                     const ConjunctiveQuery& q, uint32_t max_steps, const ChaseOptions& opts) {
    UnionQuery uq;
    uq.disjuncts.push_back(q);
    return entails(db, sigma, uq, max_steps, opts);
}

std::set<std::vector<std::string>> certain_answers(const Database& db,
                                                   const std::vector<Tgd>& sigma,
                                                   const ConjunctiveQuery& q,
                                                   uint32_t max_steps,
                                                   const ChaseOptions& opts) {
    if (q.output_vars.empty()) throw ValidationError("certain_answers requires an output query");
    OracleRun run;
    for (const auto& t : sigma) run.rules.push_back(compile_tgd(t, run.eng.tab));
    seed_database(run.eng, db);
    for (uint32_t level = 0; level < max_steps; ++level) {
        if (!saturate_level(run.eng, run.rules, level, opts)) break;
        if (run.eng.truncated) break;
    }
    CompiledConjunction cq = compile(q.atoms, run.eng.tab);
    std::vector<int> out_slots;
    for (const auto& v : q.output_vars) {
        auto it = std::find(cq.var_names.begin(), cq.var_names.end(), v);
        out_slots.push_back(static_cast<int>(it - cq.var_names.begin()));
    }
    std::set<std::vector<std::string>> answers;
    size_t budget = opts.hom_cap;
    run.eng.find_homs(
        cq,
        [&](const std::vector<IVal>& binding, const std::vector<uint32_t>& image) {
            for (int s : out_slots)
                if (ival_is_null(binding[s])) return true;  // nulls never answer
            std::vector<uint32_t> closure;
            for (uint32_t idx : image) {
                const auto& c = run.eng.atoms[idx].closure;
                std::vector<uint32_t> merged;
                std::set_union(closure.begin(), closure.end(), c.begin(), c.end(),
                               std::back_inserter(merged));
                closure = std::move(merged);
            }
            if (closure.size() > max_steps) return true;
            std::vector<std::string> tuple;
            for (int s : out_slots) tuple.push_back(run.eng.tab.syms[binding[s]]);
            answers.insert(std::move(tuple));
            return true;
        },
        &budget);
    return answers;
}

std::string serialize_trace(const ChaseSequence& seq) {
    std::string out;
    for (size_t i = 0; i < seq.steps.size(); ++i) {
        const auto& s = seq.steps[i];
        out += std::to_string(i + 1) + "\t" + s.atom.str() + "\t";
        if (s.prov.from_db) {
            out += "db";
        } else {
            out += "rule " + std::to_string(s.prov.rule_index + 1) + "\tfrom";
            for (size_t p : s.prov.parents) out += " " + std::to_string(p);
        }
        out += "\n";
    }
    return out;
}

bool replay_sequence(const ChaseSequence& seq, const Database& db,
                     const std::vector<Tgd>& sigma, std::string* error) {
    auto fail = [&](const std::string& why) {
        if (error) *error = why;
        return false;
    };
    for (size_t i = 0; i < seq.steps.size(); ++i) {
        const ChaseStep& s = seq.steps[i];
        if (s.prov.from_db) {
            Atom fact{s.atom.pred, {}};
            for (const auto& v : s.atom.args) {
                if (v.is_null) return fail("step " + std::to_string(i + 1) + ": null in db atom");
                fact.args.push_back(Term::constant(v.sym));
            }
            if (!db.facts.count(fact))
                return fail("step " + std::to_string(i + 1) + ": atom not in database");
            continue;
        }
        if (s.prov.rule_index >= sigma.size())
            return fail("step " + std::to_string(i + 1) + ": bad rule index");
        const Tgd& tgd = sigma[s.prov.rule_index];
        if (s.prov.parents.size() != tgd.body.size())
            return fail("step " + std::to_string(i + 1) + ": parent count mismatch");
        for (size_t j = 0; j < tgd.body.size(); ++j) {
            size_t p = s.prov.parents[j];
            if (p < 1 || p > i)
                return fail("step " + std::to_string(i + 1) + ": parent out of range");
            const GroundAtom& img = seq.steps[p - 1].atom;
            const Atom& pat = tgd.body[j];
            if (img.pred != pat.pred || img.args.size() != pat.args.size())
                return fail("step " + std::to_string(i + 1) + ": body atom mismatch");
            for (size_t a = 0; a < pat.args.size(); ++a) {
                auto it = s.prov.hom.find(pat.args[a].symbol());
                if (it == s.prov.hom.end() || !(it->second == img.args[a]))
                    return fail("step " + std::to_string(i + 1) + ": homomorphism mismatch");
            }
        }
        if (s.prov.head_index >= tgd.head.size())
            return fail("step " + std::to_string(i + 1) + ": bad head index");
        const Atom& head = tgd.head[s.prov.head_index];
        if (s.atom.pred != head.pred || s.atom.args.size() != head.args.size())
            return fail("step " + std::to_string(i + 1) + ": head mismatch");
        std::set<std::string> exs(tgd.existentials.begin(), tgd.existentials.end());
        for (size_t a = 0; a < head.args.size(); ++a) {
            const std::string& v = head.args[a].symbol();
            auto it = s.prov.hom.find(v);
            if (it == s.prov.hom.end() || !(it->second == s.atom.args[a]))
                return fail("step " + std::to_string(i + 1) + ": head value mismatch");
            if (exs.count(v)) {
                if (!s.atom.args[a].is_null)
                    return fail("step " + std::to_string(i + 1) +
                                ": existential bound to a non-null");
                // normal-form steps name the null after their own position
                if (tgd.is_normal_form() &&
                    !(s.atom.args[a] == ChaseValue::null(static_cast<uint32_t>(i + 1))))
                    return fail("step " + std::to_string(i + 1) +
                                ": existential must be the step's own null");
            }
        }
    }
    return true;
}

bool sequence_satisfies(const ChaseSequence& seq, const ConjunctiveQuery& q) {
    Engine eng;
    for (const auto& s : seq.steps) {
        StepRec rec;
        rec.atom.pred = eng.tab.intern(s.atom.pred);
        for (const auto& v : s.atom.args) rec.atom.args.push_back(eng.tab.intern_value(v));
        rec.closure = {static_cast<uint32_t>(eng.atoms.size())};
        if (!eng.contains(rec.atom)) eng.add(std::move(rec));
    }
    CompiledConjunction cq = compile(q.atoms, eng.tab);
    bool found = false;
    eng.find_homs(cq, [&](const std::vector<IVal>&, const std::vector<uint32_t>&) {
        found = true;
        return false;
    });
    return found;
}

}  // namespace tgdlog
