#pragma once

#include <cassert>
#include <chrono>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "bmo/encodings.hpp"
#include "bmo/solver.hpp"
#include "bmo/types.hpp"

namespace bmo {

struct MaxSatInstance {
    int num_vars = 0;
    std::vector<Clause> hard;
    std::vector<std::pair<Clause, BigInt>> soft;  // weights >= 1

    BigInt total_soft_weight() const {
        BigInt t = 0;
        for (const auto& [c, w] : soft) t += w;
        return t;
    }
};

struct MaxSatOptions {
    std::optional<BigInt> initial_ub;  // solutions with cost >= this are treated as nonexistent
    int64_t conflict_budget = -1;      // whole-call budget, <0 unlimited
    std::optional<std::chrono::steady_clock::time_point> deadline;
    // called with each incumbent's falsified weight and model, weights descending
    std::function<void(const BigInt&, const Model&)> on_improve;
    double relax_boost = 1.0;  // branching priority for relaxation vars (decided first, false)
};

struct MaxSatResult {
    enum class Status { Optimum, HardUnsat, Interrupted };
    Status status = Status::HardUnsat;
    BigInt falsified_weight = 0;  // optimum; best-so-far when Interrupted with a model
    BigInt satisfied_weight = 0;  // total soft weight - falsified_weight
    bool has_model = false;
    Model model;  // projected onto the instance variables
    uint64_t sat_calls = 0;
    sat::EngineStats engine;

    bool optimum() const { return status == Status::Optimum; }
    bool hard_unsat() const { return status == Status::HardUnsat; }
    bool interrupted() const { return status == Status::Interrupted; }
};

/// Weighted partial MaxSAT by model-improving search: relax every soft
/// clause, find a model, then repeatedly bound the relaxed weight below
/// the incumbent's recounted cost until UNSAT. The objective ladder is
/// built once the first bound is known, capped there so its threshold
/// set stays proportional to the gap actually searched, and bounds are
/// passed as assumptions so the solver stays incremental throughout.
/// An initial upper bound restricts the reported result, not the first
/// model: the search always finishes strictly below the bound or proves
/// no such solution exists, which is observably identical to searching
/// below the bound from the start.
inline MaxSatResult solve_maxsat(const MaxSatInstance& inst, MaxSatOptions opt = MaxSatOptions()) {
    MaxSatResult res;
    sat::Solver s;
    for (int v = 0; v < inst.num_vars; ++v) s.new_var();
    s.set_deadline(opt.deadline);
    bool hard_ok = true;
    for (const Clause& c : inst.hard) hard_ok = s.add_clause(c) && hard_ok;

    std::vector<std::pair<Lit, BigInt>> terms;  // relaxation literal and weight per soft
    terms.reserve(inst.soft.size());
    for (const auto& [c, w] : inst.soft) {
        if (w < 1) throw Error("soft weights must be positive");
        Var y = s.new_var();
        std::vector<Lit> lits = c.lits;
        lits.push_back(pos(y));
        hard_ok = s.add_clause(std::move(lits)) && hard_ok;
        s.boost_branching(y, opt.relax_boost);
        terms.emplace_back(pos(y), w);
    }

    auto recount = [&](const Model& m) {
        BigInt cost = 0;
        for (const auto& [c, w] : inst.soft)
            if (!m.satisfies(c)) cost += w;
        return cost;
    };
    uint64_t conflicts_at_start = s.stats().conflicts;
    auto next_solve = [&](const std::vector<Lit>& assumptions) {
        if (opt.conflict_budget >= 0) {
            uint64_t used = s.stats().conflicts - conflicts_at_start;
            int64_t left = opt.conflict_budget - static_cast<int64_t>(used);
            if (left < 0) left = 0;
            s.set_conflict_budget(left);
        }
        ++res.sat_calls;
        return s.solve(assumptions);
    };
    auto finish = [&](MaxSatResult::Status st) {
        res.status = st;
        res.satisfied_weight = inst.total_soft_weight() - res.falsified_weight;
        res.engine = s.stats();
        return res;
    };
    auto take_model = [&](const Model& m) {
        res.model = m.project(inst.num_vars);
        res.has_model = true;
        res.falsified_weight = recount(res.model);
        assert([&] {
            for (const Clause& c : inst.hard)
                if (!res.model.satisfies(c)) return false;
            return true;
        }());
        if (opt.on_improve) opt.on_improve(res.falsified_weight, res.model);
    };

    if (!hard_ok) return finish(MaxSatResult::Status::HardUnsat);
    if (opt.initial_ub && *opt.initial_ub <= 0) return finish(MaxSatResult::Status::HardUnsat);

    sat::SolveOutcome first = next_solve({});
    if (first.interrupted()) return finish(MaxSatResult::Status::Interrupted);
    if (first.unsat()) return finish(MaxSatResult::Status::HardUnsat);
    take_model(first.model);

    std::optional<enc::ObjectiveLadder> ladder;
    for (;;) {
        if (res.falsified_weight == 0) break;
        BigInt target = res.falsified_weight - 1;  // improve the incumbent
        if (opt.initial_ub && target > *opt.initial_ub - 1) target = *opt.initial_ub - 1;
        if (!ladder) ladder.emplace(s, terms, enc::LadderOptions::capped(target + 1));
        sat::SolveOutcome r = next_solve(ladder->assume_bound(target));
        if (r.interrupted()) return finish(MaxSatResult::Status::Interrupted);
        if (r.unsat()) break;
        take_model(r.model);
        assert(res.falsified_weight <= target);
    }
    if (opt.initial_ub && res.falsified_weight >= *opt.initial_ub) {
        // nothing below the bound: treated as nonexistent
        res.has_model = false;
        res.model = Model();
        res.falsified_weight = 0;
        return finish(MaxSatResult::Status::HardUnsat);
    }
    return finish(MaxSatResult::Status::Optimum);
}

}  // namespace bmo
