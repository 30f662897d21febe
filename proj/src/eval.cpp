#include "tgdlog/eval.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace tgdlog {

NumericExtension build_extension(const Database& db, uint32_t n) {
    return NumericExtension::build(db, n);
}

namespace {

// Packed ground value: number n -> 2n, constant id -> 2id+1.
using V = int32_t;
constexpr V kUnbound = INT32_MIN;

inline bool v_is_num(V v) { return (v & 1) == 0; }
inline uint32_t v_num(V v) { return static_cast<uint32_t>(v) >> 1; }
inline uint32_t v_sym(V v) { return static_cast<uint32_t>(v) >> 1; }
inline V pack_num(uint32_t n) { return static_cast<V>(n << 1); }
inline V pack_sym(uint32_t id) { return static_cast<V>((id << 1) | 1); }

struct Timeout : std::exception {};

class Clock {
public:
    explicit Clock(uint64_t budget_ms)
        : deadline_(std::chrono::steady_clock::now() + std::chrono::milliseconds(budget_ms)) {}
    void tick() {
        if (++count_ % 2048 == 0 && std::chrono::steady_clock::now() > deadline_)
            throw Timeout{};
    }

private:
    std::chrono::steady_clock::time_point deadline_;
    uint64_t count_ = 0;
};

struct Relation {
    size_t arity = 0;
    std::vector<std::vector<V>> rows;
    // one lazily built value index per column
    mutable std::vector<std::unordered_map<V, std::vector<uint32_t>>> index;
    mutable std::vector<bool> indexed;

    void ensure_index(size_t pos) const {
        if (indexed.empty()) {
            indexed.assign(arity, false);
            index.resize(arity);
        }
        if (indexed[pos]) return;
        for (uint32_t r = 0; r < rows.size(); ++r) index[pos][rows[r][pos]].push_back(r);
        indexed[pos] = true;
    }
};

enum class PredKind { Extensional, Materialized, Virtual, Neq };

struct CAtom {
    int pred = -1;             // index into the predicate table
    std::vector<V> const_args; // where slot < 0
    std::vector<int> slots;    // -1 const, else variable slot
};

struct CRule {
    CAtom head;
    std::vector<CAtom> body;
    size_t var_count = 0;
    std::vector<std::string> var_names;
};

struct PredInfo {
    std::string name;
    size_t arity = 0;
    PredKind kind = PredKind::Extensional;
    Relation rel;               // Extensional/Materialized
    std::vector<CRule> rules;   // Materialized (source) and Virtual
    uint64_t est_rows = 0;
};

class Engine {
public:
    Engine(const DatalogProgram& program, const Database& db, uint32_t n,
           const EvalOptions& opts)
        : opts_(opts), clock_(opts.timeout_ms), n_(n) {
        load(program, db);
    }

    // ---- symbol handling -------------------------------------------------
    V intern(const std::string& s) {
        auto it = sym_ids_.find(s);
        if (it != sym_ids_.end()) return pack_sym(it->second);
        uint32_t id = static_cast<uint32_t>(syms_.size());
        syms_.push_back(s);
        sym_ids_.emplace(s, id);
        return pack_sym(id);
    }
    Term to_term(V v) const {
        if (v_is_num(v)) return Term::number(v_num(v));
        return Term::constant(syms_[v_sym(v)]);
    }
    std::string value_str(V v) const {
        return v_is_num(v) ? std::to_string(v_num(v)) : syms_[v_sym(v)];
    }

    // ---- program loading -------------------------------------------------
    int pred_id(const std::string& name, size_t arity, bool create) {
        auto it = pred_ids_.find(name);
        if (it != pred_ids_.end()) {
            if (preds_[it->second].arity != arity)
                throw ValidationError("arity conflict for predicate " + name);
            return it->second;
        }
        if (!create) return -1;
        int id = static_cast<int>(preds_.size());
        preds_.push_back(PredInfo{name, arity, PredKind::Extensional, {}, {}, 0});
        preds_[id].rel.arity = arity;
        pred_ids_.emplace(name, id);
        return id;
    }

    CAtom compile_atom(const Atom& a, std::map<std::string, int>& slots,
                       std::vector<std::string>& names) {
        CAtom c;
        c.pred = pred_id(a.pred, a.arity(), true);
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                auto it = slots.find(t.symbol());
                if (it == slots.end()) {
                    it = slots.emplace(t.symbol(), static_cast<int>(names.size())).first;
                    names.push_back(t.symbol());
                }
                c.slots.push_back(it->second);
                c.const_args.push_back(0);
            } else {
                c.slots.push_back(-1);
                c.const_args.push_back(t.is_number() ? pack_num(t.num()) : intern(t.symbol()));
            }
        }
        return c;
    }

    void load(const DatalogProgram& program, const Database& db) {
        if (!check_nonrecursive(program)) throw ValidationError("program is recursive");
        goal_name_ = program.goal;

        // numeric side of the extension
        auto add_fixed = [&](const std::string& name, size_t arity,
                             std::vector<std::vector<V>> rows) {
            int id = pred_id(name, arity, true);
            preds_[id].kind = PredKind::Extensional;
            preds_[id].rel.arity = arity;
            preds_[id].rel.rows = std::move(rows);
        };
        {
            std::vector<std::vector<V>> rows;
            for (uint32_t i = 1; i <= n_; ++i) rows.push_back({pack_num(i)});
            add_fixed("num", 1, std::move(rows));
        }
        {
            std::vector<std::vector<V>> rows;
            for (uint32_t i = 0; i <= n_; ++i)
                for (uint32_t j = i + 1; j <= n_; ++j) rows.push_back({pack_num(i), pack_num(j)});
            add_fixed("lt", 2, std::move(rows));
        }
        {
            std::vector<std::vector<V>> rows;
            for (uint32_t i = 0; i < n_; ++i) rows.push_back({pack_num(i), pack_num(i + 1)});
            add_fixed("succ", 2, std::move(rows));
        }
        add_fixed("zero", 1, {{pack_num(0)}});
        add_fixed("one", 1, {{pack_num(1)}});
        {
            int id = pred_id("neq", 2, true);
            preds_[id].kind = PredKind::Neq;
        }

        // database relations named by the program
        std::set<std::string> declared = program.edb;
        for (const auto& [pred, arity] : db.schema) {
            (void)arity;
            declared.insert(pred);
        }
        for (const auto& name : declared) {
            if (pred_ids_.count(name)) continue;  // numeric names stay reserved
            auto it = db.schema.find(name);
            size_t arity = it != db.schema.end() ? it->second : 0;
            if (it == db.schema.end()) {
                // declared EDB with no facts: arity comes from program use
                auto arities = program.predicate_arities();
                auto ait = arities.find(name);
                if (ait == arities.end()) continue;
                arity = ait->second;
            }
            int id = pred_id(name, arity, true);
            preds_[id].kind = PredKind::Extensional;
        }
        for (const auto& f : db.facts) {
            if (is_numeric_name(f.pred))
                throw ValidationError("database fact for reserved predicate " + f.pred);
            int id = pred_id(f.pred, f.arity(), true);
            std::vector<V> row;
            for (const auto& t : f.args) row.push_back(intern(t.symbol()));
            preds_[id].rel.rows.push_back(std::move(row));
        }
        for (auto& p : preds_) {
            std::sort(p.rel.rows.begin(), p.rel.rows.end());
            p.rel.rows.erase(std::unique(p.rel.rows.begin(), p.rel.rows.end()),
                             p.rel.rows.end());
        }

        // IDB rules
        auto idb = program.idb_predicates();
        for (const auto& name : {"num", "lt", "succ", "zero", "one", "neq"})
            if (idb.count(name))
                throw ValidationError(std::string("numeric predicate ") + name +
                                      " may not be redefined");
        for (const auto& r : program.rules) {
            std::map<std::string, int> slots;
            CRule cr;
            cr.head = compile_atom(r.head, slots, cr.var_names);
            for (const auto& a : r.body) cr.body.push_back(compile_atom(a, slots, cr.var_names));
            cr.var_count = cr.var_names.size();
            int id = cr.head.pred;
            preds_[id].kind = PredKind::Materialized;  // provisional
            preds_[id].rules.push_back(std::move(cr));
        }
        for (const auto& r : program.rules)
            for (const auto& a : r.body) {
                int id = pred_ids_.at(a.pred);
                if (preds_[id].kind == PredKind::Extensional && !idb.count(a.pred) &&
                    !declared.count(a.pred) && !is_numeric_name(a.pred))
                    throw ValidationError("predicate " + a.pred +
                                          " has no EDB or IDB definition");
            }

        // universe for fallback enumeration
        for (uint32_t i = 0; i <= n_; ++i) universe_.push_back(pack_num(i));
        std::set<std::string> consts;
        for (const auto& f : db.facts)
            for (const auto& t : f.args) consts.insert(t.symbol());
        for (const auto& r : program.rules) {
            auto scan = [&](const Atom& a) {
                for (const auto& t : a.args)
                    if (t.is_constant()) consts.insert(t.symbol());
            };
            scan(r.head);
            for (const auto& a : r.body) scan(a);
        }
        for (const auto& c : consts) universe_.push_back(intern(c));
        std::sort(universe_.begin(), universe_.end(), value_less);

        materialize_all(program);
    }

    static bool is_numeric_name(const std::string& n) {
        return n == "num" || n == "lt" || n == "succ" || n == "zero" || n == "one" || n == "neq";
    }

    // Deterministic value order: numbers ascending, then constants.
    static bool value_less(V a, V b) {
        bool na = v_is_num(a), nb = v_is_num(b);
        if (na != nb) return na;
        return a < b;
    }

    // ---- materialization -------------------------------------------------
    void materialize_all(const DatalogProgram& program) {
        for (const auto& name : stratify(program)) {
            int id = pred_ids_.at(name);
            PredInfo& p = preds_[id];
            uint64_t est = 0;
            bool forced_virtual = false;
            for (const auto& r : p.rules) {
                uint64_t rows = 1;
                for (const auto& a : r.body) {
                    const PredInfo& q = preds_[a.pred];
                    if (q.kind == PredKind::Neq) continue;
                    if (q.kind == PredKind::Virtual) {
                        forced_virtual = true;
                        break;
                    }
                    rows = std::min<uint64_t>(rows * std::max<size_t>(q.rel.rows.size(), 1),
                                              UINT64_MAX / 2);
                }
                if (r.body.empty()) rows = 1;
                est += rows;
                if (est > opts_.materialize_cap) break;
            }
            if (name == goal_name_) forced_virtual = true;  // the goal is solved, not stored
            if (forced_virtual || est > opts_.materialize_cap) {
                p.kind = PredKind::Virtual;
                p.est_rows = est;
                continue;
            }
            std::set<std::vector<V>> rows;
            for (const auto& r : p.rules) {
                std::vector<V> binding(r.var_count, kUnbound);
                solve_conjunction(r.body, binding, [&]() {
                    std::vector<V> row;
                    for (size_t i = 0; i < r.head.slots.size(); ++i) {
                        V v = r.head.slots[i] < 0 ? r.head.const_args[i]
                                                  : binding[r.head.slots[i]];
                        if (v == kUnbound)
                            throw ValidationError("unsafe head variable in rule for " + name);
                        row.push_back(v);
                    }
                    rows.insert(std::move(row));
                    return rows.size() <= opts_.materialize_cap;
                });
                if (rows.size() > opts_.materialize_cap)
                    throw ValidationError("materialization overflow for " + name);
            }
            p.rel.arity = p.arity;
            p.rel.rows.assign(rows.begin(), rows.end());
        }
    }

    // Backtracking satisfaction of a compiled conjunction; used for rule
    // materialization and for checking virtual predicates. The callback runs
    // per solution and returns false to stop.
    bool solve_conjunction(const std::vector<CAtom>& atoms, std::vector<V>& binding,
                           const std::function<bool()>& on_solution) {
        std::vector<bool> done(atoms.size(), false);
        return solve_rec(atoms, binding, done, on_solution);
    }

    bool atom_fully_bound(const CAtom& a, const std::vector<V>& binding) const {
        for (int s : a.slots)
            if (s >= 0 && binding[s] == kUnbound) return false;
        return true;
    }

    bool check_bound_atom(const CAtom& a, const std::vector<V>& binding) {
        std::vector<V> args(a.slots.size());
        for (size_t i = 0; i < a.slots.size(); ++i)
            args[i] = a.slots[i] < 0 ? a.const_args[i] : binding[a.slots[i]];
        return holds(a.pred, args);
    }

    // membership test with all arguments ground
    bool holds(int pred, const std::vector<V>& args) {
        clock_.tick();
        PredInfo& p = preds_[pred];
        switch (p.kind) {
            case PredKind::Neq:
                return args[0] != args[1];
            case PredKind::Extensional:
            case PredKind::Materialized: {
                if (p.rel.rows.empty()) return false;
                if (args.empty()) return true;
                p.rel.ensure_index(0);
                auto it = p.rel.index[0].find(args[0]);
                if (it == p.rel.index[0].end()) return false;
                for (uint32_t r : it->second)
                    if (p.rel.rows[r] == args) return true;
                return false;
            }
            case PredKind::Virtual: {
                for (const auto& rule : p.rules) {
                    std::vector<V> binding(rule.var_count, kUnbound);
                    if (!unify_head(rule.head, args, binding)) continue;
                    bool sat = false;
                    std::vector<V> b = binding;
                    solve_conjunction(rule.body, b, [&]() {
                        sat = true;
                        return false;
                    });
                    if (sat) return true;
                }
                return false;
            }
        }
        return false;
    }

    static bool unify_head(const CAtom& head, const std::vector<V>& args,
                           std::vector<V>& binding) {
        for (size_t i = 0; i < head.slots.size(); ++i) {
            int s = head.slots[i];
            if (s < 0) {
                if (head.const_args[i] != args[i]) return false;
            } else if (binding[s] == kUnbound) {
                binding[s] = args[i];
            } else if (binding[s] != args[i]) {
                return false;
            }
        }
        return true;
    }

    // Candidate values a partially bound atom supports at one position.
    // Returns false when the atom cannot enumerate (builtin with unbound
    // arguments); out is a deterministic superset otherwise.
    bool atom_candidates(const CAtom& a, const std::vector<V>& binding, int target_slot,
                         std::vector<V>& out) {
        PredInfo& p = preds_[a.pred];
        if (p.kind == PredKind::Neq) return false;
        if (p.kind == PredKind::Virtual) return virtual_candidates(a, binding, target_slot, out);

        size_t target_pos = SIZE_MAX;
        size_t bound_pos = SIZE_MAX;
        for (size_t i = 0; i < a.slots.size(); ++i) {
            int s = a.slots[i];
            if (s == target_slot && target_pos == SIZE_MAX) target_pos = i;
            if ((s < 0 || binding[s] != kUnbound) && bound_pos == SIZE_MAX) bound_pos = i;
        }
        if (target_pos == SIZE_MAX) return false;
        std::set<V> vals;
        auto consider = [&](const std::vector<V>& row) {
            for (size_t i = 0; i < a.slots.size(); ++i) {
                int s = a.slots[i];
                V expect = s < 0 ? a.const_args[i] : binding[s];
                if (s == target_slot) continue;  // row must agree on other positions
                if (s >= 0 && binding[s] == kUnbound) continue;
                if (row[i] != expect) return;
            }
            // repeated target slot occurrences must agree within the row
            V val = row[target_pos];
            for (size_t i = 0; i < a.slots.size(); ++i)
                if (a.slots[i] == target_slot && row[i] != val) return;
            vals.insert(val);
        };
        if (bound_pos != SIZE_MAX) {
            p.rel.ensure_index(bound_pos);
            int s = a.slots[bound_pos];
            V key = s < 0 ? a.const_args[bound_pos] : binding[s];
            auto it = p.rel.index[bound_pos].find(key);
            if (it != p.rel.index[bound_pos].end())
                for (uint32_t r : it->second) consider(p.rel.rows[r]);
        } else {
            for (const auto& row : p.rel.rows) consider(row);
        }
        out.assign(vals.begin(), vals.end());
        std::sort(out.begin(), out.end(), value_less);
        return true;
    }

    bool virtual_candidates(const CAtom& a, const std::vector<V>& binding, int target_slot,
                            std::vector<V>& out) {
        PredInfo& p = preds_[a.pred];
        std::set<V> vals;
        for (const auto& rule : p.rules) {
            // unify the atom's bound arguments with the rule head
            std::vector<V> rb(rule.var_count, kUnbound);
            bool ok = true;
            int target_rule_slot = -1;
            for (size_t i = 0; i < a.slots.size() && ok; ++i) {
                int s = a.slots[i];
                V val = s < 0 ? a.const_args[i] : (s == target_slot ? kUnbound : binding[s]);
                int hs = rule.head.slots[i];
                if (s == target_slot) {
                    if (hs < 0) {
                        vals.insert(rule.head.const_args[i]);  // may overshoot; checked later
                        target_rule_slot = -2;
                    } else {
                        target_rule_slot = hs;
                    }
                    continue;
                }
                if (val == kUnbound) continue;
                if (hs < 0) {
                    ok = rule.head.const_args[i] == val;
                } else if (rb[hs] == kUnbound) {
                    rb[hs] = val;
                } else {
                    ok = rb[hs] == val;
                }
            }
            if (!ok) continue;
            // cheap filter: body atoms already fully bound must hold
            for (const auto& ba : rule.body) {
                if (!atom_fully_bound(ba, rb)) continue;
                if (!check_bound_atom(ba, rb)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            if (target_rule_slot == -2) continue;  // constant already collected
            if (target_rule_slot < 0) continue;
            if (rb[target_rule_slot] != kUnbound) {
                vals.insert(rb[target_rule_slot]);
                continue;
            }
            // smallest enumerable support for the rule variable
            std::vector<V> best;
            bool have = false;
            for (const auto& ba : rule.body) {
                bool mentions = false;
                for (int s : ba.slots) mentions |= (s == target_rule_slot);
                if (!mentions) continue;
                std::vector<V> cand;
                if (!atom_candidates(ba, rb, target_rule_slot, cand)) continue;
                if (!have || cand.size() < best.size()) {
                    best = std::move(cand);
                    have = true;
                }
            }
            if (!have) return false;  // cannot enumerate this rule's contribution
            for (V v : best) vals.insert(v);
        }
        out.assign(vals.begin(), vals.end());
        std::sort(out.begin(), out.end(), value_less);
        return true;
    }

    bool solve_rec(const std::vector<CAtom>& atoms, std::vector<V>& binding,
                   std::vector<bool>& done, const std::function<bool()>& on_solution) {
        clock_.tick();
        // next atom: prefer fully bound checks, then the smallest support
        int pick = -1;
        bool pick_check = false;
        size_t best = SIZE_MAX;
        std::vector<V> cands;
        int pick_slot = -1;
        for (size_t i = 0; i < atoms.size(); ++i) {
            if (done[i]) continue;
            if (atom_fully_bound(atoms[i], binding)) {
                pick = static_cast<int>(i);
                pick_check = true;
                break;
            }
        }
        if (pick < 0) {
            for (size_t i = 0; i < atoms.size(); ++i) {
                if (done[i]) continue;
                int slot = -1;
                for (int s : atoms[i].slots)
                    if (s >= 0 && binding[s] == kUnbound) {
                        slot = s;
                        break;
                    }
                std::vector<V> c;
                if (!atom_candidates(atoms[i], binding, slot, c)) continue;
                if (c.size() < best) {
                    best = c.size();
                    pick = static_cast<int>(i);
                    cands = std::move(c);
                    pick_slot = slot;
                }
                if (best == 0) break;
            }
        }
        if (pick < 0) {
            // no checkable or enumerable atom left
            bool all_done = true;
            for (size_t i = 0; i < atoms.size(); ++i) all_done &= done[i];
            if (all_done) return on_solution();
            // remaining atoms are builtins with unbound vars: enumerate from
            // the universe via the first unbound slot
            for (size_t i = 0; i < atoms.size(); ++i) {
                if (done[i]) continue;
                for (int s : atoms[i].slots)
                    if (s >= 0 && binding[s] == kUnbound) {
                        for (V v : universe_) {
                            binding[s] = v;
                            if (!solve_rec(atoms, binding, done, on_solution)) {
                                binding[s] = kUnbound;
                                return false;
                            }
                        }
                        binding[s] = kUnbound;
                        return true;
                    }
            }
            return true;
        }
        if (pick_check) {
            done[pick] = true;
            bool go_on = true;
            if (check_bound_atom(atoms[pick], binding))
                go_on = solve_rec(atoms, binding, done, on_solution);
            done[pick] = false;
            return go_on;
        }
        for (V v : cands) {
            binding[pick_slot] = v;
            if (!solve_rec(atoms, binding, done, on_solution)) {
                binding[pick_slot] = kUnbound;
                return false;
            }
        }
        binding[pick_slot] = kUnbound;
        return true;
    }

    // ---- goal solving ----------------------------------------------------
    struct GoalOutcome {
        bool sat = false;
        std::map<std::string, Term> assignment;
        std::set<std::vector<std::string>> tuples;
    };

    GoalOutcome solve_goal(bool all_solutions, bool want_assignment,
                           const std::map<std::string, V>* fixed) {
        GoalOutcome out;
        auto it = pred_ids_.find(goal_name_);
        if (it == pred_ids_.end()) return out;
        PredInfo& goal = preds_[it->second];
        for (const auto& rule : goal.rules) {
            GoalOutcome one = solve_goal_rule(rule, all_solutions, want_assignment, fixed);
            out.sat |= one.sat;
            for (auto& t : one.tuples) out.tuples.insert(t);
            if (one.sat && out.assignment.empty()) out.assignment = std::move(one.assignment);
            if (out.sat && !all_solutions) break;
        }
        return out;
    }

    GoalOutcome solve_goal_rule(const CRule& rule, bool all_solutions, bool want_assignment,
                                const std::map<std::string, V>* fixed);

    const std::vector<PredInfo>& preds() const { return preds_; }
    const std::string& goal_name() const { return goal_name_; }
    PredInfo* find_pred(const std::string& name) {
        auto it = pred_ids_.find(name);
        return it == pred_ids_.end() ? nullptr : &preds_[it->second];
    }

private:
    EvalOptions opts_;
    Clock clock_;
    uint32_t n_;
    std::vector<std::string> syms_;
    std::map<std::string, uint32_t> sym_ids_;
    std::vector<PredInfo> preds_;
    std::map<std::string, int> pred_ids_;
    std::vector<V> universe_;
    std::string goal_name_;

    friend class GoalSolver;
};

// Conflict-directed backjumping solver for one (typically very wide) rule.
class GoalSolver {
public:
    GoalSolver(Engine& eng, const CRule& rule) : eng_(eng), rule_(rule) {
        var_atoms_.resize(rule.var_count);
        for (size_t i = 0; i < rule.body.size(); ++i) {
            std::set<int> seen;
            for (int s : rule.body[i].slots)
                if (s >= 0 && seen.insert(s).second)
                    var_atoms_[s].push_back(static_cast<int>(i));
        }
        binding_.assign(rule.var_count, kUnbound);
        depset_.resize(rule.var_count);
        // static order: first occurrence in the body
        std::vector<bool> listed(rule.var_count, false);
        for (const auto& a : rule.body)
            for (int s : a.slots)
                if (s >= 0 && !listed[s]) {
                    listed[s] = true;
                    order_.push_back(s);
                }
        for (size_t s = 0; s < rule.var_count; ++s)
            if (!listed[s]) order_.push_back(static_cast<int>(s));
    }

    // returns true when a solution was found (and stops), or enumerates all
    // solutions through the callback when all_solutions is set
    bool run(bool all_solutions, const std::function<void(const std::vector<V>&)>& on_solution,
             const std::map<int, V>& fixed) {
        // ground atoms never see a variable binding, so check them now
        for (const auto& a : rule_.body) {
            bool ground = true;
            for (int s : a.slots) ground &= (s < 0);
            if (ground && !eng_.check_bound_atom(a, binding_)) return false;
        }
        for (const auto& [slot, val] : fixed) {
            if (!bind(slot, val, {})) return false;
        }
        if (!propagate()) return false;
        bool found = false;
        for (;;) {
            int var = next_var();
            if (var < 0) {
                found = true;
                on_solution(binding_);
                if (!all_solutions) return true;
                // exhaustive enumeration: step like a chronological conflict
                conflict_.clear();
                for (size_t d = 0; d < decisions_.size(); ++d)
                    conflict_.push_back(static_cast<uint16_t>(d));
                if (decisions_.empty()) return found;
                if (!backjump()) return found;
                continue;
            }
            Decision dec;
            dec.var = var;
            dec.cands = candidates_for(var, &dec.conflict);
            dec.next = 0;
            dec.trail_mark = trail_.size();
            decisions_.push_back(std::move(dec));
            if (!advance_decision()) return found;
        }
    }

    std::map<std::string, Term> assignment() const {
        std::map<std::string, Term> out;
        for (size_t s = 0; s < rule_.var_count; ++s)
            if (binding_[s] != kUnbound)
                out.emplace(rule_.var_names[s], eng_.to_term(binding_[s]));
        return out;
    }

private:
    struct Decision {
        int var;
        std::vector<V> cands;
        size_t next;
        size_t trail_mark;
        std::vector<uint16_t> conflict;  // accumulated responsible decisions
    };

    // ---- binding/trail ----
    bool bind(int slot, V val, std::vector<uint16_t> deps) {
        if (binding_[slot] != kUnbound) {
            if (binding_[slot] == val) return true;
            conflict_ = merge(depset_[slot], deps);
            return false;
        }
        binding_[slot] = val;
        depset_[slot] = std::move(deps);
        trail_.push_back(slot);
        queue_.push_back(slot);
        return true;
    }

    static std::vector<uint16_t> merge(const std::vector<uint16_t>& a,
                                       const std::vector<uint16_t>& b) {
        std::vector<uint16_t> out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    std::vector<uint16_t> atom_deps(const CAtom& a) const {
        std::vector<uint16_t> deps;
        for (int s : a.slots)
            if (s >= 0 && binding_[s] != kUnbound) deps = merge(deps, depset_[s]);
        return deps;
    }

    // ---- propagation ----
    bool propagate() {
        while (!queue_.empty()) {
            int var = queue_.front();
            queue_.pop_front();
            for (int ai : var_atoms_[var]) {
                const CAtom& a = rule_.body[ai];
                int unbound_slot = -1;
                int unbound_count = 0;
                for (size_t pos = 0; pos < a.slots.size(); ++pos) {
                    int s = a.slots[pos];
                    if (s < 0 || binding_[s] != kUnbound) continue;
                    bool first = true;
                    for (size_t q = 0; q < pos; ++q)
                        if (a.slots[q] == s) first = false;
                    if (first) {
                        ++unbound_count;
                        unbound_slot = s;
                    }
                }
                if (unbound_count == 0) {
                    if (!eng_.check_bound_atom(a, binding_)) {
                        conflict_ = atom_deps(a);
                        return false;
                    }
                } else if (unbound_count == 1) {
                    std::vector<V> cands;
                    if (!eng_.atom_candidates(a, binding_, unbound_slot, cands)) continue;
                    if (cands.empty()) {
                        conflict_ = atom_deps(a);
                        return false;
                    }
                    if (cands.size() == 1) {
                        if (!bind(unbound_slot, cands.front(), atom_deps(a))) return false;
                    }
                }
            }
        }
        return true;
    }

    int next_var() const {
        for (int s : order_)
            if (binding_[s] == kUnbound) return s;
        return -1;
    }

    // The candidate list of a decision depends on the bindings that shaped
    // it; exhausting the list must charge those bindings, or backjumps would
    // skip solutions.
    std::vector<V> candidates_for(int var, std::vector<uint16_t>* support_deps) {
        std::vector<V> best;
        std::vector<uint16_t> deps;
        bool have = false;
        for (int ai : var_atoms_[var]) {
            std::vector<V> c;
            if (!eng_.atom_candidates(rule_.body[ai], binding_, var, c)) continue;
            if (!have || c.size() < best.size()) {
                best = std::move(c);
                deps = atom_deps(rule_.body[ai]);
                have = true;
            }
            if (have && best.empty()) break;
        }
        if (!have) return eng_.universe_;
        if (support_deps) *support_deps = merge(*support_deps, deps);
        return best;
    }

    // pops the trail back to a mark
    void rewind(size_t mark) {
        while (trail_.size() > mark) {
            int slot = trail_.back();
            trail_.pop_back();
            binding_[slot] = kUnbound;
            depset_[slot].clear();
        }
        queue_.clear();
    }

    // installs the next candidate of the deepest live decision; on exhaustion
    // propagates the conflict further down. Returns false when the search
    // space is exhausted.
    bool advance_decision() {
        for (;;) {
            if (decisions_.empty()) return false;
            Decision& dec = decisions_.back();
            rewind(dec.trail_mark);
            if (dec.next >= dec.cands.size()) {
                conflict_ = dec.conflict;
                decisions_.pop_back();
                if (decisions_.empty()) return false;
                absorb_conflict();
                continue;
            }
            V val = dec.cands[dec.next++];
            uint16_t level = static_cast<uint16_t>(decisions_.size() - 1);
            if (!bind(dec.var, val, {level})) {
                absorb_conflict();
                continue;
            }
            if (propagate()) return true;
            absorb_conflict();
        }
    }

    // after a conflict: jump to the deepest responsible decision and charge
    // the remainder of the conflict to it
    bool backjump() {
        if (!absorb_conflict()) return false;
        return advance_decision();
    }

    // folds conflict_ into the responsible decision, dropping deeper ones
    bool absorb_conflict() {
        if (decisions_.empty()) return false;
        if (conflict_.empty()) {
            // nothing above is responsible: exhaust everything
            decisions_.clear();
            return false;
        }
        uint16_t level = conflict_.back();  // deepest responsible decision
        while (decisions_.size() > static_cast<size_t>(level) + 1) {
            rewind(decisions_.back().trail_mark);
            decisions_.pop_back();
        }
        Decision& dec = decisions_.back();
        std::vector<uint16_t> rest(conflict_.begin(), conflict_.end() - 1);
        dec.conflict = merge(dec.conflict, rest);
        rewind(dec.trail_mark);
        return true;
    }

    Engine& eng_;
    const CRule& rule_;
    std::vector<std::vector<int>> var_atoms_;
    std::vector<V> binding_;
    std::vector<std::vector<uint16_t>> depset_;
    std::vector<int> order_;
    std::vector<int> trail_;
    std::deque<int> queue_;
    std::vector<Decision> decisions_;
    std::vector<uint16_t> conflict_;
};

Engine::GoalOutcome Engine::solve_goal_rule(const CRule& rule, bool all_solutions,
                                            bool want_assignment,
                                            const std::map<std::string, V>* fixed) {
    GoalOutcome out;
    GoalSolver solver(*this, rule);
    std::map<int, V> fixed_slots;
    if (fixed) {
        std::map<std::string, int> slot_of;
        for (size_t s = 0; s < rule.var_names.size(); ++s) slot_of[rule.var_names[s]] = (int)s;
        for (const auto& [name, val] : *fixed) {
            auto it = slot_of.find(name);
            if (it == slot_of.end()) continue;
            fixed_slots.emplace(it->second, val);
        }
    }
    bool sat = solver.run(
        all_solutions,
        [&](const std::vector<V>& binding) {
            out.sat = true;
            if (want_assignment && out.assignment.empty()) out.assignment = solver.assignment();
            if (all_solutions) {
                std::vector<std::string> tuple;
                for (size_t i = 0; i < rule.head.slots.size(); ++i) {
                    V v = rule.head.slots[i] < 0 ? rule.head.const_args[i]
                                                 : binding[rule.head.slots[i]];
                    tuple.push_back(value_str(v));
                }
                out.tuples.insert(std::move(tuple));
            }
        },
        fixed_slots);
    out.sat |= sat && !all_solutions;
    return out;
}

}  // namespace

EvalResult evaluate(const DatalogProgram& program, const Database& db, uint32_t n,
                    const EvalOptions& opts) {
    auto start = std::chrono::steady_clock::now();
    EvalResult res;
    try {
        Engine eng(program, db, n, opts);
        bool output = program.goal_arity() > 0;
        auto outcome = eng.solve_goal(output, opts.want_assignment, nullptr);
        if (output) {
            res.status = EvalStatus::Tuples;
            res.tuples = std::move(outcome.tuples);
        } else {
            res.status = outcome.sat ? EvalStatus::True : EvalStatus::False;
        }
        res.assignment = std::move(outcome.assignment);
    } catch (const Timeout&) {
        res.status = EvalStatus::Resource;
    }
    res.millis = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                           std::chrono::steady_clock::now() - start)
                                           .count());
    return res;
}

bool check_assignment(const DatalogProgram& program, const Database& db, uint32_t n,
                      const std::map<std::string, Term>& assignment, std::string* error) {
    EvalOptions opts;
    try {
        Engine eng(program, db, n, opts);
        PredInfo* goal = eng.find_pred(program.goal);
        if (!goal) {
            if (error) *error = "no goal rules";
            return false;
        }
        std::map<std::string, V> fixed;
        for (const auto& [name, term] : assignment) {
            if (term.is_variable()) continue;
            fixed.emplace(name, term.is_number() ? pack_num(term.num()) : eng.intern(term.symbol()));
        }
        for (const auto& rule : goal->rules) {
            auto outcome = eng.solve_goal_rule(rule, false, false, &fixed);
            if (outcome.sat) return true;
        }
        if (error) *error = "assignment does not satisfy any goal rule";
        return false;
    } catch (const Timeout&) {
        if (error) *error = "timeout";
        return false;
    }
}

}  // namespace tgdlog
