#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bmo/types.hpp"

namespace bmo::sat {

struct EngineStats {
    uint64_t decisions = 0;
    uint64_t propagations = 0;
    uint64_t conflicts = 0;
    uint64_t restarts = 0;
    uint64_t learned_clauses = 0;
    uint64_t solve_calls = 0;
};

struct SolveOutcome {
    enum class Status { Sat, Unsat, Interrupted };
    Status status = Status::Unsat;
    Model model;                // present iff Sat
    std::vector<Lit> conflict;  // subset of the assumptions, present iff Unsat under assumptions

    bool sat() const { return status == Status::Sat; }
    bool unsat() const { return status == Status::Unsat; }
    bool interrupted() const { return status == Status::Interrupted; }
};

/// Conflict-driven clause-learning SAT solver with incremental solving
/// under assumptions: first-UIP learning, two watched literals per
/// clause, activity-ordered branching with decay, phase saving (initial
/// polarity false), Luby restarts and learned-clause reduction.
/// Deterministic: identical call histories produce identical outcomes.
class Solver {
public:
    Solver() { watches_.resize(2); }

    /// Next unused variable index; extends solver capacity.
    Var new_var() {
        Var v = static_cast<Var>(assigns_.size() + 1);
        assigns_.push_back(kUndef);
        level_.push_back(0);
        reason_.push_back(kNoReason);
        activity_.push_back(0.0);
        phase_.push_back(false);
        seen_.push_back(0);
        watches_.resize(2 * static_cast<std::size_t>(v) + 2);
        heap_insert(v);
        return v;
    }

    int num_vars() const { return static_cast<int>(assigns_.size()); }

    bool ok() const { return ok_; }

    /// Registers a clause; units propagate immediately at level 0.
    /// Returns false once the database is trivially unsatisfiable.
    bool add_clause(const Clause& c) { return add_clause(c.lits); }

    bool add_clause(std::initializer_list<Lit> lits) { return add_clause(std::vector<Lit>(lits)); }

    bool add_clause(std::vector<Lit> lits) {
        assert(decision_level() == 0);
        if (!ok_) return false;
        std::optional<Clause> norm = normalize_clause(std::move(lits));
        if (!norm) return true;  // tautology, vacuous
        std::vector<Lit> cl;
        cl.reserve(norm->size());
        for (Lit l : norm->lits) {
            if (l.var() > num_vars()) throw Error("unknown variable in clause");
            int8_t v = value(l);
            if (v == kTrue) return true;  // satisfied at level 0
            if (v == kUndef) cl.push_back(l);
        }
        if (cl.empty()) {
            ok_ = false;
            return false;
        }
        if (cl.size() == 1) {
            enqueue(cl[0], kNoReason);
            ok_ = propagate() == kNoClause;
            return ok_;
        }
        attach(add_to_db(std::move(cl), /*learned=*/false));
        return true;
    }

    void set_conflict_budget(int64_t budget) { conflict_budget_ = budget; }
    void set_deadline(std::optional<std::chrono::steady_clock::time_point> d) { deadline_ = d; }

    /// Raises a variable's initial branching priority.
    void boost_branching(Var v, double amount) {
        activity_.at(static_cast<std::size_t>(v - 1)) += amount;
        heap_update(v);
    }

    const EngineStats& stats() const { return stats_; }

    SolveOutcome solve(const std::vector<Lit>& assumptions = {}) {
        ++stats_.solve_calls;
        SolveOutcome out;
        if (!ok_) {
            out.status = SolveOutcome::Status::Unsat;
            return out;
        }
        assumptions_ = assumptions;
        for (Lit a : assumptions_)
            if (a.var() < 1 || a.var() > num_vars()) throw Error("unknown variable in assumption");
        cancel_until(0);
        conflicts_at_entry_ = stats_.conflicts;
        deadline_probe_ = 0;  // first in-search probe always consults the clock
        int curr_restarts = 0;
        for (;;) {
            uint64_t budget = restart_base_ * luby(2, curr_restarts);
            SearchResult r = search(budget);
            if (r == SearchResult::Sat) {
                out.status = SolveOutcome::Status::Sat;
                std::vector<bool> vals(static_cast<std::size_t>(num_vars()));
                for (Var v = 1; v <= num_vars(); ++v)
                    vals[static_cast<std::size_t>(v - 1)] = assigns_[v - 1] == kTrue;
                out.model = Model(std::move(vals));
#ifndef NDEBUG
                for (const InternalClause& c : db_)
                    if (!c.learned && !c.deleted) {
                        bool sat = false;
                        for (Lit l : c.lits) sat = sat || out.model.satisfies(l);
                        assert(sat && "model must satisfy every problem clause");
                    }
#endif
                break;
            }
            if (r == SearchResult::Unsat) {
                out.status = SolveOutcome::Status::Unsat;
                out.conflict = conflict_;
                break;
            }
            if (r == SearchResult::Interrupted) {
                out.status = SolveOutcome::Status::Interrupted;
                break;
            }
            ++curr_restarts;
            ++stats_.restarts;
        }
        cancel_until(0);
        assumptions_.clear();
        return out;
    }

private:
    using CRef = uint32_t;
    static constexpr CRef kNoClause = std::numeric_limits<CRef>::max();
    static constexpr CRef kNoReason = std::numeric_limits<CRef>::max();
    static constexpr int8_t kTrue = 1;
    static constexpr int8_t kFalse = 0;
    static constexpr int8_t kUndef = -1;

    struct InternalClause {
        std::vector<Lit> lits;
        double activity = 0.0;
        bool learned = false;
        bool deleted = false;
    };

    struct Watcher {
        CRef cref;
        Lit blocker;
    };

    enum class SearchResult { Sat, Unsat, Restart, Interrupted };

    int8_t var_value(Var v) const { return assigns_[static_cast<std::size_t>(v - 1)]; }
    int8_t value(Lit l) const {
        int8_t a = var_value(l.var());
        return a == kUndef ? kUndef : static_cast<int8_t>(a ^ static_cast<int8_t>(l.negated()));
    }
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }
    int var_level(Var v) const { return level_[static_cast<std::size_t>(v - 1)]; }
    CRef var_reason(Var v) const { return reason_[static_cast<std::size_t>(v - 1)]; }

    CRef add_to_db(std::vector<Lit> lits, bool learned) {
        CRef cref = static_cast<CRef>(db_.size());
        db_.push_back(InternalClause{std::move(lits), learned ? cla_inc_ : 0.0, learned, false});
        if (learned) ++stats_.learned_clauses;
        return cref;
    }

    void attach(CRef cref) {
        const InternalClause& c = db_[cref];
        assert(c.lits.size() >= 2);
        watches_[static_cast<std::size_t>((~c.lits[0]).code())].push_back(Watcher{cref, c.lits[1]});
        watches_[static_cast<std::size_t>((~c.lits[1]).code())].push_back(Watcher{cref, c.lits[0]});
    }

    void enqueue(Lit l, CRef from) {
        assert(value(l) == kUndef);
        std::size_t idx = static_cast<std::size_t>(l.var() - 1);
        assigns_[idx] = l.negated() ? kFalse : kTrue;
        level_[idx] = decision_level();
        reason_[idx] = from;
        trail_.push_back(l);
    }

    CRef propagate() {
        CRef conflict = kNoClause;
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            ++stats_.propagations;
            std::vector<Watcher>& ws = watches_[static_cast<std::size_t>(p.code())];
            std::size_t i = 0, j = 0;
            while (i < ws.size()) {
                Watcher w = ws[i];
                if (value(w.blocker) == kTrue) {
                    ws[j++] = ws[i++];
                    continue;
                }
                InternalClause& c = db_[w.cref];
                if (c.deleted) {
                    ++i;  // lazily dropped
                    continue;
                }
                Lit false_lit = ~p;
                if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
                assert(c.lits[1] == false_lit);
                ++i;
                Lit first = c.lits[0];
                if (first != w.blocker && value(first) == kTrue) {
                    ws[j++] = Watcher{w.cref, first};
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.lits.size(); ++k) {
                    if (value(c.lits[k]) != kFalse) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches_[static_cast<std::size_t>((~c.lits[1]).code())].push_back(
                            Watcher{w.cref, first});
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                // unit or conflicting
                ws[j++] = Watcher{w.cref, first};
                if (value(first) == kFalse) {
                    conflict = w.cref;
                    qhead_ = trail_.size();
                    while (i < ws.size()) ws[j++] = ws[i++];
                } else {
                    enqueue(first, w.cref);
                }
            }
            ws.resize(j);
            if (conflict != kNoClause) break;
        }
        return conflict;
    }

    void cancel_until(int target_level) {
        if (decision_level() <= target_level) return;
        std::size_t bound = trail_lim_[static_cast<std::size_t>(target_level)];
        for (std::size_t k = trail_.size(); k > bound; --k) {
            Var v = trail_[k - 1].var();
            std::size_t idx = static_cast<std::size_t>(v - 1);
            phase_[idx] = assigns_[idx] == kTrue;  // phase saving
            assigns_[idx] = kUndef;
            reason_[idx] = kNoReason;
            heap_insert(v);
        }
        trail_.resize(bound);
        trail_lim_.resize(static_cast<std::size_t>(target_level));
        qhead_ = trail_.size();
    }

    void bump_var(Var v) {
        std::size_t idx = static_cast<std::size_t>(v - 1);
        activity_[idx] += var_inc_;
        if (activity_[idx] > 1e100) {
            for (double& a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
        heap_update(v);
    }

    void bump_clause(InternalClause& c) {
        c.activity += cla_inc_;
        if (c.activity > 1e20) {
            for (InternalClause& d : db_)
                if (d.learned) d.activity *= 1e-20;
            cla_inc_ *= 1e-20;
        }
    }

    /// First-UIP conflict analysis with basic reason-based minimization.
    void analyze(CRef confl, std::vector<Lit>& learnt, int& bt_level) {
        learnt.clear();
        learnt.push_back(Lit());  // slot for the asserting literal
        int path_count = 0;
        Lit p;
        bool p_valid = false;
        std::size_t index = trail_.size();
        do {
            InternalClause& c = db_[confl];
            if (c.learned) bump_clause(c);
            for (std::size_t k = p_valid ? 1 : 0; k < c.lits.size(); ++k) {
                Lit q = c.lits[k];
                std::size_t qi = static_cast<std::size_t>(q.var() - 1);
                if (!seen_[qi] && var_level(q.var()) > 0) {
                    seen_[qi] = 1;
                    bump_var(q.var());
                    if (var_level(q.var()) >= decision_level())
                        ++path_count;
                    else
                        learnt.push_back(q);
                }
            }
            while (!seen_[static_cast<std::size_t>(trail_[--index].var() - 1)]) {}
            p = trail_[index];
            p_valid = true;
            confl = var_reason(p.var());
            seen_[static_cast<std::size_t>(p.var() - 1)] = 0;
            --path_count;
        } while (path_count > 0);
        learnt[0] = ~p;

        // drop literals whose reason is entirely subsumed by the rest
        to_clear_.assign(learnt.begin(), learnt.end());
        std::size_t j = 1;
        for (std::size_t k = 1; k < learnt.size(); ++k) {
            Var v = learnt[k].var();
            CRef r = var_reason(v);
            bool redundant = r != kNoReason;
            if (redundant) {
                for (Lit q : db_[r].lits) {
                    if (q.var() == v) continue;
                    if (!seen_[static_cast<std::size_t>(q.var() - 1)] && var_level(q.var()) > 0) {
                        redundant = false;
                        break;
                    }
                }
            }
            if (!redundant) learnt[j++] = learnt[k];
        }
        learnt.resize(j);
        for (Lit l : to_clear_) seen_[static_cast<std::size_t>(l.var() - 1)] = 0;

        bt_level = 0;
        if (learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t k = 2; k < learnt.size(); ++k)
                if (var_level(learnt[k].var()) > var_level(learnt[max_i].var())) max_i = k;
            std::swap(learnt[1], learnt[max_i]);
            bt_level = var_level(learnt[1].var());
        }
    }

    /// Walks the implication graph from a falsified assumption back to the
    /// assumptions responsible. Fills conflict_ with a subset of the
    /// assumption literals as passed (decisions below the free-search levels
    /// are exactly the asserted assumptions).
    void analyze_final(Lit assumption) {
        conflict_.clear();
        conflict_.push_back(assumption);
        if (decision_level() == 0) return;
        std::size_t fi = static_cast<std::size_t>(assumption.var() - 1);
        seen_[fi] = 1;
        for (std::size_t k = trail_.size(); k > trail_lim_[0]; --k) {
            Var v = trail_[k - 1].var();
            std::size_t vi = static_cast<std::size_t>(v - 1);
            if (!seen_[vi]) continue;
            CRef r = var_reason(v);
            if (r == kNoReason) {
                conflict_.push_back(trail_[k - 1]);
            } else {
                for (Lit q : db_[r].lits)
                    if (var_level(q.var()) > 0) seen_[static_cast<std::size_t>(q.var() - 1)] = 1;
            }
            seen_[vi] = 0;
        }
        seen_[fi] = 0;
    }

    void reduce_db() {
        std::vector<CRef> learnts;
        for (CRef i = 0; i < db_.size(); ++i)
            if (db_[i].learned && !db_[i].deleted && db_[i].lits.size() > 2) learnts.push_back(i);
        std::sort(learnts.begin(), learnts.end(), [&](CRef a, CRef b) {
            if (db_[a].activity != db_[b].activity) return db_[a].activity < db_[b].activity;
            return a < b;
        });
        std::size_t target = learnts.size() / 2;
        std::size_t removed = 0;
        for (CRef cref : learnts) {
            if (removed >= target) break;
            if (is_reason(cref)) continue;
            db_[cref].deleted = true;
            db_[cref].lits.clear();
            db_[cref].lits.shrink_to_fit();
            ++removed;
        }
        live_learnts_ -= removed;
    }

    bool is_reason(CRef cref) const {
        const InternalClause& c = db_[cref];
        if (c.lits.empty()) return false;
        Var v = c.lits[0].var();
        return var_value(v) != kUndef && var_reason(v) == cref;
    }

    bool out_of_budget() {
        if (conflict_budget_ >= 0 &&
            stats_.conflicts - conflicts_at_entry_ > static_cast<uint64_t>(conflict_budget_))
            return true;
        if (deadline_ && (deadline_probe_++ & 255) == 0 &&
            std::chrono::steady_clock::now() >= *deadline_)
            return true;
        return false;
    }

    SearchResult search(uint64_t conflict_limit) {
        uint64_t local_conflicts = 0;
        std::vector<Lit> learnt;
        for (;;) {
            CRef confl = propagate();
            if (confl != kNoClause) {
                ++stats_.conflicts;
                ++local_conflicts;
                if (decision_level() == 0) {
                    ok_ = false;
                    conflict_.clear();
                    return SearchResult::Unsat;
                }
                int bt_level = 0;
                analyze(confl, learnt, bt_level);
                cancel_until(bt_level);
                CRef cref = kNoReason;
                if (learnt.size() >= 2) {
                    cref = add_to_db(learnt, true);
                    ++live_learnts_;
                    attach(cref);
                }
                enqueue(learnt[0], cref);
                var_inc_ /= var_decay_;
                cla_inc_ /= cla_decay_;
                if (out_of_budget()) return SearchResult::Interrupted;
                continue;
            }
            if (local_conflicts >= conflict_limit) {
                cancel_until(0);
                return SearchResult::Restart;
            }
            if (live_learnts_ > max_learnts_) {
                reduce_db();
                max_learnts_ = max_learnts_ + max_learnts_ / 10;
            }
            if (out_of_budget()) return SearchResult::Interrupted;
            // assumption prefix, then free decisions
            if (decision_level() < static_cast<int>(assumptions_.size())) {
                Lit a = assumptions_[static_cast<std::size_t>(decision_level())];
                int8_t v = value(a);
                if (v == kTrue) {
                    trail_lim_.push_back(trail_.size());  // empty pseudo-level
                    continue;
                }
                if (v == kFalse) {
                    analyze_final(a);
                    return SearchResult::Unsat;
                }
                trail_lim_.push_back(trail_.size());
                enqueue(a, kNoReason);
                continue;
            }
            Var next = 0;
            while (!heap_.empty()) {
                Var cand = heap_pop();
                if (var_value(cand) == kUndef) {
                    next = cand;
                    break;
                }
            }
            if (next == 0) return SearchResult::Sat;  // all variables assigned
            ++stats_.decisions;
            trail_lim_.push_back(trail_.size());
            enqueue(Lit(next, !phase_[static_cast<std::size_t>(next - 1)]), kNoReason);
        }
    }

    static uint64_t luby(uint64_t y, int x) {
        int size = 1, seq = 0;
        while (size < x + 1) {
            ++seq;
            size = 2 * size + 1;
        }
        while (size - 1 != x) {
            size = (size - 1) >> 1;
            --seq;
            x = x % size;
        }
        uint64_t r = 1;
        for (int i = 0; i < seq; ++i) r *= y;
        return r;
    }

    // indexed binary max-heap on activity, ties to the smaller variable
    bool heap_less(Var a, Var b) const {
        double aa = activity_[static_cast<std::size_t>(a - 1)];
        double ab = activity_[static_cast<std::size_t>(b - 1)];
        if (aa != ab) return aa > ab;
        return a < b;
    }

    void heap_insert(Var v) {
        std::size_t vi = static_cast<std::size_t>(v - 1);
        if (heap_pos_.size() < assigns_.size()) heap_pos_.resize(assigns_.size(), -1);
        if (heap_pos_[vi] >= 0) return;
        heap_.push_back(v);
        heap_pos_[vi] = static_cast<int>(heap_.size() - 1);
        heap_up(heap_.size() - 1);
    }

    void heap_update(Var v) {
        std::size_t vi = static_cast<std::size_t>(v - 1);
        if (heap_pos_.size() < assigns_.size()) heap_pos_.resize(assigns_.size(), -1);
        int pos = heap_pos_[vi];
        if (pos < 0) return;
        heap_up(static_cast<std::size_t>(pos));
    }

    Var heap_pop() {
        Var top = heap_[0];
        heap_pos_[static_cast<std::size_t>(top - 1)] = -1;
        heap_[0] = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_pos_[static_cast<std::size_t>(heap_[0] - 1)] = 0;
            heap_down(0);
        }
        return top;
    }

    void heap_up(std::size_t i) {
        Var v = heap_[i];
        while (i > 0) {
            std::size_t parent = (i - 1) / 2;
            if (!heap_less(v, heap_[parent])) break;
            heap_[i] = heap_[parent];
            heap_pos_[static_cast<std::size_t>(heap_[i] - 1)] = static_cast<int>(i);
            i = parent;
        }
        heap_[i] = v;
        heap_pos_[static_cast<std::size_t>(v - 1)] = static_cast<int>(i);
    }

    void heap_down(std::size_t i) {
        Var v = heap_[i];
        for (;;) {
            std::size_t child = 2 * i + 1;
            if (child >= heap_.size()) break;
            if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child])) ++child;
            if (!heap_less(heap_[child], v)) break;
            heap_[i] = heap_[child];
            heap_pos_[static_cast<std::size_t>(heap_[i] - 1)] = static_cast<int>(i);
            i = child;
        }
        heap_[i] = v;
        heap_pos_[static_cast<std::size_t>(v - 1)] = static_cast<int>(i);
    }

    std::vector<InternalClause> db_;
    std::vector<std::vector<Watcher>> watches_;  // indexed by literal code
    std::vector<int8_t> assigns_;                // indexed by var-1
    std::vector<int> level_;
    std::vector<CRef> reason_;
    std::vector<double> activity_;
    std::vector<bool> phase_;
    std::vector<int8_t> seen_;
    std::vector<Lit> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t qhead_ = 0;
    std::vector<Var> heap_;
    std::vector<int> heap_pos_;
    std::vector<Lit> assumptions_;
    std::vector<Lit> conflict_;
    std::vector<Lit> to_clear_;
    bool ok_ = true;

    double var_inc_ = 1.0;
    double var_decay_ = 0.95;
    double cla_inc_ = 1.0;
    double cla_decay_ = 0.999;
    uint64_t restart_base_ = 100;
    std::size_t live_learnts_ = 0;
    std::size_t max_learnts_ = 4000;
    int64_t conflict_budget_ = -1;
    uint64_t conflicts_at_entry_ = 0;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    uint64_t deadline_probe_ = 0;

    EngineStats stats_;
};

}  // namespace bmo::sat
