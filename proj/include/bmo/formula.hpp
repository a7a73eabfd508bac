#pragma once

#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bmo/types.hpp"

namespace bmo {

/// A clause paired with a positive weight, or marked hard.
struct WeightedClause {
    Clause clause;
    BigInt weight;  // meaningful only when hard == false
    bool hard = false;

    static WeightedClause soft(Clause c, BigInt w) { return {std::move(c), std::move(w), false}; }
    static WeightedClause make_hard(Clause c) { return {std::move(c), 0, true}; }
};

class NotBmoError : public Error {
public:
    NotBmoError(int level, const std::string& what) : Error(what), level(level) {}
    int level;  // 1-based index of the first violated level
};

class TautologicalSoftError : public Error {
public:
    TautologicalSoftError() : Error("tautological soft clause distorts the level size") {}
};

/// One soft level: clauses sharing a weight. Duplicate clauses are kept,
/// level sizes count occurrences.
struct SoftLevel {
    std::vector<Clause> clauses;
    BigInt weight;
};

/// Hard clauses plus an ordered partition of soft clauses into levels
/// with strictly increasing weights. A valid instance satisfies, for
/// every level i >= 2,
///
///     w_i > sum_{j<i} w_j * |C_j|
///
/// so each level strictly dominates all levels below it, and the implied
/// hard threshold exceeds the total soft weight.
struct LeveledFormula {
    Var num_vars = 0;
    std::vector<Clause> hard;
    std::vector<SoftLevel> levels;  // ascending weight: levels[0] is the weakest tier

    int num_levels() const { return static_cast<int>(levels.size()); }

    BigInt total_soft_weight() const {
        BigInt total = 0;
        for (const auto& lv : levels) total += lv.weight * BigInt(lv.clauses.size());
        return total;
    }

    /// Smallest hard weight compatible with the dominance condition.
    BigInt hard_threshold() const { return total_soft_weight() + 1; }

    std::vector<std::size_t> level_sizes() const {
        std::vector<std::size_t> sizes;
        sizes.reserve(levels.size());
        for (const auto& lv : levels) sizes.push_back(lv.clauses.size());
        return sizes;
    }
};

/// Per-level minimum falsified counts together with the derived
/// objective and a witnessing model. falsified[i] is the count for
/// levels[i] (weakest tier first).
struct LevelOptima {
    std::vector<std::size_t> falsified;
    BigInt objective;  // sum_i w_i * (|C_i| - falsified_i)
    Model model;
};

inline BigInt objective_value(const LeveledFormula& f, const std::vector<std::size_t>& falsified) {
    BigInt obj = 0;
    for (std::size_t i = 0; i < f.levels.size(); ++i)
        obj += f.levels[i].weight * BigInt(f.levels[i].clauses.size() - falsified[i]);
    return obj;
}

inline BigInt falsified_weight(const LeveledFormula& f, const std::vector<std::size_t>& falsified) {
    BigInt w = 0;
    for (std::size_t i = 0; i < f.levels.size(); ++i)
        w += f.levels[i].weight * BigInt(falsified[i]);
    return w;
}

/// The smallest weight vector satisfying the dominance condition for the
/// given level sizes: w_1 = 1, w_i = 1 + sum_{j<i} w_j*|C_j|, and the
/// hard threshold 1 + sum_j w_j*|C_j|.
inline std::pair<std::vector<BigInt>, BigInt> minimal_weights(
    const std::vector<std::size_t>& level_sizes) {
    std::vector<BigInt> weights;
    weights.reserve(level_sizes.size());
    BigInt acc = 0;  // running sum w_j * |C_j|
    for (std::size_t size : level_sizes) {
        BigInt w = acc + 1;
        weights.push_back(w);
        acc += w * BigInt(size);
    }
    return {std::move(weights), acc + 1};
}

/// Groups soft clauses by weight into ascending levels and verifies the
/// dominance condition for every consecutive level; hard clauses become
/// the top tier. Tautologies are dropped from the hard set and rejected
/// among softs. An explicit hard weight (e.g. a WCNF top value), when
/// given, is checked against the total soft weight as the final level.
inline LeveledFormula stratify(const std::vector<WeightedClause>& clauses, Var num_vars = 0,
                               const BigInt* explicit_hard_weight = nullptr) {
    LeveledFormula f;
    std::map<BigInt, std::vector<Clause>> by_weight;
    Var max_var = 0;
    for (const auto& wc : clauses) {
        std::optional<Clause> c = normalize_clause(wc.clause.lits);
        if (!c) {
            if (wc.hard) continue;  // tautological hard clause: vacuous, drop
            throw TautologicalSoftError();
        }
        max_var = std::max(max_var, c->max_var());
        if (wc.hard) {
            f.hard.push_back(std::move(*c));
        } else {
            if (wc.weight < 1) throw Error("soft clause weight must be positive");
            by_weight[wc.weight].push_back(std::move(*c));
        }
    }
    f.num_vars = std::max(num_vars, max_var);

    BigInt dominated = 0;  // sum_{j<i} w_j * |C_j|
    int level_index = 0;
    for (auto& [weight, level_clauses] : by_weight) {
        ++level_index;
        if (level_index >= 2 && weight <= dominated)
            throw NotBmoError(level_index, "weight " + weight.str() + " of level " +
                                               std::to_string(level_index) +
                                               " does not dominate the " + dominated.str() +
                                               " below it");
        dominated += weight * BigInt(level_clauses.size());
        f.levels.push_back(SoftLevel{std::move(level_clauses), weight});
    }
    if (explicit_hard_weight && !f.hard.empty() && *explicit_hard_weight <= dominated)
        throw NotBmoError(level_index + 1, "hard weight " + explicit_hard_weight->str() +
                                               " does not dominate the total soft weight " +
                                               dominated.str());
    return f;
}

/// Inverse of stratify: soft clauses carry their level weight, hard
/// clauses the hard threshold. Hard clauses come first, then levels from
/// strongest to weakest.
inline std::vector<WeightedClause> flatten(const LeveledFormula& f) {
    std::vector<WeightedClause> out;
    for (const Clause& c : f.hard) out.push_back(WeightedClause::make_hard(c));
    for (auto it = f.levels.rbegin(); it != f.levels.rend(); ++it)
        for (const Clause& c : it->clauses) out.push_back(WeightedClause::soft(c, it->weight));
    return out;
}

}  // namespace bmo
