#pragma once

#include <cassert>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmo/encodings.hpp"
#include "bmo/formula.hpp"
#include "bmo/maxsat.hpp"
#include "bmo/solver.hpp"
#include "bmo/types.hpp"

namespace bmo {

enum class Algorithm { Rsc, Ipb, Mono, Brute };

inline const char* name_of(Algorithm a) {
    switch (a) {
        case Algorithm::Rsc: return "rsc";
        case Algorithm::Ipb: return "ipb";
        case Algorithm::Mono: return "mono";
        case Algorithm::Brute: return "brute";
    }
    return "?";
}

struct TooLargeError : Error {
    explicit TooLargeError(const std::string& what) : Error(what) {}
};

/// Multipliers for one weight-rescaled subproblem: p_i = 1 for the level
/// being optimized, p_{i+1} = (|C_i|+1)·p_i, and every later level scales
/// by one more than the optimum below it, p_j = (u_{j-1}+1)·p_{j-1}. The
/// final position is the hard weight, which doubles as the initial upper
/// bound: any solution reaching it would miscount some settled level.
struct RescaleWeights {
    int level_index = 0;             // i, 1-based
    std::vector<BigInt> multipliers; // p_i .. p_m

    const BigInt& multiplier_for(int level) const {
        return multipliers.at(static_cast<std::size_t>(level - level_index));
    }
    const BigInt& hard_weight() const { return multipliers.back(); }
    const BigInt& initial_ub() const { return multipliers.back(); }
};

/// upper_optima holds u_{i+1}..u_{m-1} in ascending level order, so it is
/// empty for the top subproblem i = m-1 and the scheme degenerates to a
/// hard weight of |C_i|+1 over unit softs.
inline RescaleWeights rescale_weights(int i, const std::vector<std::size_t>& level_sizes,
                                      const std::vector<std::size_t>& upper_optima) {
    int m = static_cast<int>(level_sizes.size()) + 1;
    if (i < 1 || i > m - 1) throw Error("subproblem level out of range");
    if (upper_optima.size() != static_cast<std::size_t>(m - 1 - i))
        throw Error("need one known optimum per level above the subproblem");
    RescaleWeights rw;
    rw.level_index = i;
    rw.multipliers.push_back(1);
    rw.multipliers.push_back(BigInt(level_sizes[static_cast<std::size_t>(i - 1)] + 1));
    for (int j = i + 2; j <= m; ++j) {
        const std::size_t u = upper_optima[static_cast<std::size_t>(j - 2 - i)];
        rw.multipliers.push_back(BigInt(u + 1) * rw.multipliers.back());
    }
    return rw;
}

struct SubproblemStats {
    int level = 0;
    BigInt cost;                        // engine-reported optimum for this stage
    BigInt bound;                       // initial upper bound (0 when none applies)
    std::vector<std::size_t> recounts;  // falsified clauses per level in the stage model
    uint64_t sat_calls = 0;
    uint64_t conflicts = 0;
};

struct BmoStats {
    std::vector<SubproblemStats> subproblems;
    uint64_t sat_calls = 0;
    uint64_t conflicts = 0;
    double wall_ms = 0.0;
};

struct BmoOptions {
    int64_t conflict_budget = -1;  // whole-run budget, <0 unlimited
    std::optional<std::chrono::steady_clock::time_point> deadline;
    std::function<void(const Model&)> on_model;  // every incumbent model, any stage
    std::function<void(int, std::size_t)> on_level_done;  // level index, optimum count
};

struct BmoResult {
    enum class Status { Optimum, HardUnsat, Interrupted };
    Status status = Status::HardUnsat;
    Algorithm algorithm = Algorithm::Rsc;
    LevelOptima optima;  // falsified counts per level (ascending), objective, model
    BmoStats stats;

    bool optimum() const { return status == Status::Optimum; }
    bool hard_unsat() const { return status == Status::HardUnsat; }
    bool interrupted() const { return status == Status::Interrupted; }
};

struct VerifyReport {
    bool hard_ok = true;
    std::optional<std::size_t> first_violated_hard;
    std::vector<std::size_t> falsified;  // per level, ascending
};

/// Literal recount of a total model against every clause of the formula.
inline VerifyReport verify_model(const LeveledFormula& f, const Model& m) {
    if (m.num_vars() < f.num_vars) throw Error("model does not cover all variables");
    VerifyReport rep;
    for (std::size_t i = 0; i < f.hard.size(); ++i)
        if (!m.satisfies(f.hard[i])) {
            rep.hard_ok = false;
            rep.first_violated_hard = i;
            break;
        }
    rep.falsified.reserve(f.levels.size());
    for (const SoftLevel& lvl : f.levels) {
        std::size_t n = 0;
        for (const Clause& c : lvl.clauses)
            if (!m.satisfies(c)) ++n;
        rep.falsified.push_back(n);
    }
    return rep;
}

namespace detail {

inline std::vector<std::size_t> per_level_falsified(const LeveledFormula& f, const Model& m) {
    std::vector<std::size_t> counts;
    counts.reserve(f.levels.size());
    for (const SoftLevel& lvl : f.levels) {
        std::size_t n = 0;
        for (const Clause& c : lvl.clauses)
            if (!m.satisfies(c)) ++n;
        counts.push_back(n);
    }
    return counts;
}

inline void fill_optima(const LeveledFormula& f, const std::vector<std::size_t>& u,
                        Model model, BmoResult& res) {
    res.optima.falsified = u;
    res.optima.objective = objective_value(f, u);
    res.optima.model = std::move(model);
}

// shared solve for formulas with no soft levels: hard satisfiability only
inline bool trivial_levels(const LeveledFormula& f, Algorithm algo, const BmoOptions& opt,
                           BmoResult& res) {
    if (!f.levels.empty()) return false;
    res.algorithm = algo;
    MaxSatInstance inst{f.num_vars, f.hard, {}};
    MaxSatOptions mo;
    mo.conflict_budget = opt.conflict_budget;
    mo.deadline = opt.deadline;
    auto t0 = std::chrono::steady_clock::now();
    MaxSatResult r = solve_maxsat(inst, mo);
    res.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.stats.sat_calls = r.sat_calls;
    res.stats.conflicts = r.engine.conflicts;
    if (r.interrupted()) {
        res.status = BmoResult::Status::Interrupted;
    } else if (r.hard_unsat()) {
        res.status = BmoResult::Status::HardUnsat;
    } else {
        res.status = BmoResult::Status::Optimum;
        if (opt.on_model) opt.on_model(r.model);
        fill_optima(f, {}, r.model, res);
    }
    return true;
}

class StopClock {
public:
    StopClock() : t0_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// Weight-rescaling BMO: one MaxSAT subproblem per soft level, top level
/// first. Subproblem i reweights levels i..m-1 with rescale_weights(i)
/// and passes the hard weight as the initial upper bound, which pins
/// every settled level to its known optimum; the minimum number of
/// falsified level-i clauses is then read off the subproblem's model.
inline BmoResult solve_rsc(const LeveledFormula& f, BmoOptions opt = BmoOptions()) {
    BmoResult res;
    res.algorithm = Algorithm::Rsc;
    if (detail::trivial_levels(f, Algorithm::Rsc, opt, res)) return res;
    detail::StopClock clock;
    const int m1 = static_cast<int>(f.levels.size());  // m-1
    std::vector<std::size_t> settled;                  // u_{i+1}.. ascending, grows downward
    std::vector<std::size_t> u(static_cast<std::size_t>(m1), 0);
    Model last_model;
    bool have_model = false;
    auto finish = [&](BmoResult::Status st) {
        res.status = st;
        res.stats.wall_ms = clock.ms();
        return res;
    };
    for (int i = m1; i >= 1; --i) {
        RescaleWeights rw = rescale_weights(i, f.level_sizes(), settled);
        MaxSatInstance inst;
        inst.num_vars = f.num_vars;
        inst.hard = f.hard;
        for (int j = m1; j >= i; --j) {  // strongest level first: its relax vars decide first
            const BigInt& p = rw.multiplier_for(j);
            for (const Clause& c : f.levels[static_cast<std::size_t>(j - 1)].clauses)
                inst.soft.emplace_back(c, p);
        }
        MaxSatOptions mo;
        mo.initial_ub = rw.initial_ub();
        mo.deadline = opt.deadline;
        if (opt.conflict_budget >= 0) {
            int64_t left = opt.conflict_budget - static_cast<int64_t>(res.stats.conflicts);
            mo.conflict_budget = left < 0 ? 0 : left;
        }
        if (opt.on_model)
            mo.on_improve = [&](const BigInt&, const Model& m) { opt.on_model(m); };
        MaxSatResult r = solve_maxsat(inst, mo);
        res.stats.sat_calls += r.sat_calls;
        res.stats.conflicts += r.engine.conflicts;
        if (r.interrupted()) {
            if (have_model) detail::fill_optima(f, detail::per_level_falsified(f, last_model),
                                                last_model, res);
            return finish(BmoResult::Status::Interrupted);
        }
        if (r.hard_unsat()) {
            if (i == m1) return finish(BmoResult::Status::HardUnsat);
            // the settled optima always admit a model strictly below the bound
            throw Error("rescaled subproblem infeasible below its bound");
        }
        last_model = r.model;
        have_model = true;
        std::vector<std::size_t> counts = detail::per_level_falsified(f, r.model);
        u[static_cast<std::size_t>(i - 1)] = counts[static_cast<std::size_t>(i - 1)];
#ifndef NDEBUG
        for (int j = i + 1; j <= m1; ++j)
            assert(counts[static_cast<std::size_t>(j - 1)] == u[static_cast<std::size_t>(j - 1)] &&
                   "upper bound must pin settled levels exactly");
#endif
        settled.insert(settled.begin(), u[static_cast<std::size_t>(i - 1)]);
        if (opt.on_level_done) opt.on_level_done(i, u[static_cast<std::size_t>(i - 1)]);
        SubproblemStats sub;
        sub.level = i;
        sub.cost = r.falsified_weight;
        sub.bound = rw.initial_ub();
        sub.recounts = counts;
        sub.sat_calls = r.sat_calls;
        sub.conflicts = r.engine.conflicts;
        res.stats.subproblems.push_back(std::move(sub));
    }
    detail::fill_optima(f, u, last_model, res);
    return finish(BmoResult::Status::Optimum);
}

/// Iterative pseudo-Boolean BMO: one shared incremental solver. Each
/// level is relaxed in turn, its relaxed count minimized by descending
/// bounds on a unit ladder, then pinned with an exact equality before
/// the next level joins; minimality makes the recounted falsified
/// clauses match the pinned count exactly.
inline BmoResult solve_ipb(const LeveledFormula& f, BmoOptions opt = BmoOptions()) {
    BmoResult res;
    res.algorithm = Algorithm::Ipb;
    if (detail::trivial_levels(f, Algorithm::Ipb, opt, res)) return res;
    detail::StopClock clock;
    const int m1 = static_cast<int>(f.levels.size());
    sat::Solver s;
    for (int v = 0; v < f.num_vars; ++v) s.new_var();
    s.set_deadline(opt.deadline);
    bool hard_ok = true;
    for (const Clause& c : f.hard) hard_ok = s.add_clause(c) && hard_ok;
    auto next_solve = [&](const std::vector<Lit>& assumptions) {
        if (opt.conflict_budget >= 0) {
            int64_t left = opt.conflict_budget - static_cast<int64_t>(s.stats().conflicts);
            s.set_conflict_budget(left < 0 ? 0 : left);
        }
        ++res.stats.sat_calls;
        return s.solve(assumptions);
    };
    std::vector<std::size_t> r_counts(static_cast<std::size_t>(m1), 0);
    Model last_model;
    bool have_model = false;
    auto finish = [&](BmoResult::Status st) {
        res.status = st;
        res.stats.conflicts = s.stats().conflicts;
        res.stats.wall_ms = clock.ms();
        return res;
    };
    auto interrupted_exit = [&] {
        if (have_model)
            detail::fill_optima(f, detail::per_level_falsified(f, last_model), last_model, res);
        return finish(BmoResult::Status::Interrupted);
    };
    for (int i = m1; i >= 1; --i) {
        const std::vector<Clause>& level = f.levels[static_cast<std::size_t>(i - 1)].clauses;
        uint64_t calls_before = res.stats.sat_calls;
        uint64_t conflicts_before = s.stats().conflicts;
        enc::RelaxedLevel rl = enc::relax_level(level, [&] { return s.new_var(); }, i);
        for (const Clause& c : rl.relaxed) hard_ok = s.add_clause(c) && hard_ok;
        std::vector<std::pair<Lit, BigInt>> terms;
        terms.reserve(rl.relax_vars.size());
        for (Var y : rl.relax_vars) {
            s.boost_branching(y, 1.0);
            terms.emplace_back(pos(y), 1);
        }
        enc::ObjectiveLadder ladder(s, terms, enc::LadderOptions::with_converse());
        if (!hard_ok) return finish(BmoResult::Status::HardUnsat);

        auto count_level = [&](const Model& m) {
            std::size_t n = 0;
            for (const Clause& c : level)
                if (!m.satisfies(c)) ++n;
            return n;
        };
        sat::SolveOutcome out = next_solve({});
        if (out.interrupted()) return interrupted_exit();
        if (out.unsat()) {
            if (i == m1) return finish(BmoResult::Status::HardUnsat);
            throw Error("pinned levels must stay jointly satisfiable");
        }
        last_model = out.model.project(f.num_vars);
        have_model = true;
        if (opt.on_model) opt.on_model(last_model);
        std::size_t best = count_level(last_model);
        while (best > 0) {
            sat::SolveOutcome nxt = next_solve(ladder.assume_bound(BigInt(best) - 1));
            if (nxt.interrupted()) return interrupted_exit();
            if (nxt.unsat()) break;
            last_model = nxt.model.project(f.num_vars);
            if (opt.on_model) opt.on_model(last_model);
            std::size_t got = count_level(last_model);
            assert(got < best);
            best = got;
        }
        r_counts[static_cast<std::size_t>(i - 1)] = best;
        if (opt.on_level_done) opt.on_level_done(i, best);
        if (i > 1) ladder.add_equality(BigInt(best));
        SubproblemStats sub;
        sub.level = i;
        sub.cost = BigInt(best);
        sub.recounts = detail::per_level_falsified(f, last_model);
        sub.sat_calls = res.stats.sat_calls - calls_before;
        sub.conflicts = s.stats().conflicts - conflicts_before;
        res.stats.subproblems.push_back(std::move(sub));
    }
#ifndef NDEBUG
    {
        std::vector<std::size_t> final_counts = detail::per_level_falsified(f, last_model);
        for (int j = 1; j <= m1; ++j)
            assert(final_counts[static_cast<std::size_t>(j - 1)] ==
                       r_counts[static_cast<std::size_t>(j - 1)] &&
                   "equalities plus minimality pin every level exactly");
    }
#endif
    detail::fill_optima(f, r_counts, last_model, res);
    return finish(BmoResult::Status::Optimum);
}

/// Monolithic baseline: one weighted MaxSAT call over the flattened
/// formula with its original BMO weights; per-level optima are recounted
/// from the single optimal model.
inline BmoResult solve_mono(const LeveledFormula& f, BmoOptions opt = BmoOptions()) {
    BmoResult res;
    res.algorithm = Algorithm::Mono;
    if (detail::trivial_levels(f, Algorithm::Mono, opt, res)) return res;
    detail::StopClock clock;
    MaxSatInstance inst;
    inst.num_vars = f.num_vars;
    inst.hard = f.hard;
    for (const WeightedClause& wc : flatten(f))
        if (!wc.hard) inst.soft.emplace_back(wc.clause, wc.weight);
    MaxSatOptions mo;
    mo.conflict_budget = opt.conflict_budget;
    mo.deadline = opt.deadline;
    if (opt.on_model)
        mo.on_improve = [&](const BigInt&, const Model& m) { opt.on_model(m); };
    MaxSatResult r = solve_maxsat(inst, mo);
    res.stats.sat_calls = r.sat_calls;
    res.stats.conflicts = r.engine.conflicts;
    res.stats.wall_ms = clock.ms();
    if (r.hard_unsat()) {
        res.status = BmoResult::Status::HardUnsat;
        return res;
    }
    if (r.interrupted()) {
        res.status = BmoResult::Status::Interrupted;
        if (r.has_model)
            detail::fill_optima(f, detail::per_level_falsified(f, r.model), r.model, res);
        return res;
    }
    std::vector<std::size_t> u = detail::per_level_falsified(f, r.model);
    res.status = BmoResult::Status::Optimum;
    if (opt.on_level_done)
        for (int i = static_cast<int>(u.size()); i >= 1; --i)
            opt.on_level_done(i, u[static_cast<std::size_t>(i - 1)]);
    detail::fill_optima(f, u, r.model, res);
    assert(res.optima.objective == f.total_soft_weight() - r.falsified_weight &&
           "objective equals total soft weight minus falsified weight");
    return res;
}

/// Exhaustive oracle: enumerates every assignment, keeps those satisfying
/// the hard clauses, and minimizes the tuple (u_{m-1}, ..., u_1)
/// lexicographically. Ground truth for everything else here.
inline BmoResult solve_brute(const LeveledFormula& f, int var_cap = 22) {
    if (var_cap > 30) throw Error("enumeration cap beyond 2^30 is not supported");
    if (f.num_vars > var_cap)
        throw TooLargeError("instance has " + std::to_string(f.num_vars) +
                            " variables, enumeration cap is " + std::to_string(var_cap));
    detail::StopClock clock;
    BmoResult res;
    res.algorithm = Algorithm::Brute;
    struct MaskClause {
        uint32_t pos = 0, neg = 0;
    };
    auto to_mask = [](const Clause& c) {
        MaskClause mc;
        for (Lit l : c.lits) {
            uint32_t bit = 1u << (l.var() - 1);
            if (l.negated())
                mc.neg |= bit;
            else
                mc.pos |= bit;
        }
        return mc;
    };
    std::vector<MaskClause> hard;
    hard.reserve(f.hard.size());
    for (const Clause& c : f.hard) hard.push_back(to_mask(c));
    std::vector<std::vector<MaskClause>> levels;
    for (const SoftLevel& lvl : f.levels) {
        std::vector<MaskClause> ms;
        ms.reserve(lvl.clauses.size());
        for (const Clause& c : lvl.clauses) ms.push_back(to_mask(c));
        levels.push_back(std::move(ms));
    }
    const uint32_t limit =
        f.num_vars >= 32 ? 0 : (1u << f.num_vars);  // cap check keeps this well-defined
    bool any = false;
    std::vector<std::size_t> best;  // tuple (u_{m-1}, ..., u_1)
    uint32_t best_mask = 0;
    std::vector<std::size_t> tuple(levels.size());
    for (uint32_t a = 0; a < limit; ++a) {
        bool ok = true;
        for (const MaskClause& mc : hard)
            if (((mc.pos & a) | (mc.neg & ~a)) == 0) {
                ok = false;
                break;
            }
        if (!ok) continue;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            std::size_t n = 0;
            for (const MaskClause& mc : levels[levels.size() - 1 - i])
                if (((mc.pos & a) | (mc.neg & ~a)) == 0) ++n;
            tuple[i] = n;
        }
        if (!any || tuple < best) {
            any = true;
            best = tuple;
            best_mask = a;
        }
    }
    res.stats.wall_ms = clock.ms();
    if (!any) {
        res.status = BmoResult::Status::HardUnsat;
        return res;
    }
    std::vector<std::size_t> u(best.rbegin(), best.rend());
    std::vector<bool> vals(static_cast<std::size_t>(f.num_vars));
    for (int v = 1; v <= f.num_vars; ++v) vals[static_cast<std::size_t>(v - 1)] = (best_mask >> (v - 1)) & 1;
    res.status = BmoResult::Status::Optimum;
    detail::fill_optima(f, u, Model(std::move(vals)), res);
    return res;
}

}  // namespace bmo
