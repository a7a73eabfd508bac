#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "bmo/solver.hpp"
#include "bmo/types.hpp"

namespace bmo::enc {

/// One soft level after relaxation: clause j became c_j ∪ {y_j}.
struct RelaxedLevel {
    int level_index = 0;
    std::vector<Clause> relaxed;
    std::vector<Var> relax_vars;  // parallel to relaxed
};

/// Appends a fresh relaxation variable to every clause. The variable
/// source is any callable returning an unused Var; nothing is added to a
/// solver here, callers install the relaxed clauses themselves.
template <typename VarSource>
RelaxedLevel relax_level(const std::vector<Clause>& clauses, VarSource&& fresh,
                         int level_index = 0) {
    RelaxedLevel out;
    out.level_index = level_index;
    out.relaxed.reserve(clauses.size());
    out.relax_vars.reserve(clauses.size());
    for (const Clause& c : clauses) {
        Var y = fresh();
        std::vector<Lit> lits = c.lits;
        lits.push_back(pos(y));
        out.relaxed.emplace_back(std::move(lits));
        out.relax_vars.push_back(y);
    }
    return out;
}

/// Totalizer over weighted input literals: output literal o_k per
/// reachable threshold k, true whenever the weighted sum of true inputs
/// reaches k. Unit weights give the classic totalizer, mixed weights the
/// generalized one. Every node also carries o_{k'} → o_k chain clauses
/// for k < k', so a single negated output bounds the sum from above.
///
/// A cap clamps every threshold at the given value, keeping node label
/// sets small when only bounds below the cap will ever be queried.
/// The converse direction (outputs force inputs, needed for equalities)
/// is available on uncapped ladders.
struct LadderOptions {
    std::optional<BigInt> cap;
    bool converse = false;

    static LadderOptions capped(BigInt at) {
        LadderOptions o;
        o.cap = std::move(at);
        return o;
    }
    static LadderOptions with_converse() {
        LadderOptions o;
        o.converse = true;
        return o;
    }
};

class ObjectiveLadder {
public:
    using Options = LadderOptions;

    ObjectiveLadder(sat::Solver& solver, const std::vector<std::pair<Lit, BigInt>>& terms,
                    Options opt = Options())
        : solver_(&solver), opt_(std::move(opt)) {
        if (opt_.cap && opt_.converse)
            throw Error("capped ladder cannot carry the converse direction");
        if (opt_.cap && *opt_.cap < 1) throw Error("ladder cap must be positive");
        // one balanced subtree per distinct weight, then a fold of the
        // class roots from lightest to heaviest: nodes mixing weight
        // classes (whose label sets grow as cross products) appear only
        // along the final fold instead of throughout the tree
        std::map<BigInt, std::vector<NodeMap>> classes;
        for (const auto& [lit, w] : terms) {
            if (w < 1) throw Error("ladder weights must be positive");
            NodeMap leaf;
            leaf.emplace(clamp(w), lit);
            classes[w].push_back(std::move(leaf));
        }
        std::optional<NodeMap> acc;
        for (auto& [w, forest] : classes) {
            while (forest.size() > 1) {
                std::vector<NodeMap> next;
                next.reserve(forest.size() / 2 + 1);
                for (std::size_t i = 0; i + 1 < forest.size(); i += 2)
                    next.push_back(merge(forest[i], forest[i + 1]));
                if (forest.size() % 2 == 1) next.push_back(std::move(forest.back()));
                forest = std::move(next);
            }
            acc = acc ? merge(*acc, forest[0]) : std::move(forest[0]);
        }
        if (acc)
            for (const auto& [w, lit] : *acc) outputs_.emplace_back(w, lit);
    }

    /// (threshold, output literal) pairs, thresholds strictly ascending.
    const std::vector<std::pair<BigInt, Lit>>& outputs() const { return outputs_; }

    /// Largest reachable threshold (the cap, once clamping kicks in).
    BigInt reachable_max() const { return outputs_.empty() ? BigInt(0) : outputs_.back().first; }

    /// Assumptions forcing the weighted sum ≤ k: the negated output for
    /// the smallest threshold above k (chaining covers the rest), empty
    /// when the bound is vacuous.
    std::vector<Lit> assume_bound(const BigInt& k) const {
        for (const auto& [w, lit] : outputs_)
            if (w > k) return {~lit};
        return {};
    }

    /// Permanently pins the weighted sum to exactly k. Requires the
    /// converse direction; k must be 0 or a reachable threshold.
    void add_equality(const BigInt& k) {
        if (!opt_.converse) throw Error("equality needs a ladder with the converse direction");
        if (k > 0) {
            const Lit* at = nullptr;
            for (const auto& [w, lit] : outputs_)
                if (w == k) at = &lit;
            if (!at) throw Error("equality target is not a reachable sum");
            solver_->add_clause({*at});
            ++clauses_added_;
        }
        std::vector<Lit> above = assume_bound(k);
        for (Lit l : above) {
            solver_->add_clause({l});
            ++clauses_added_;
        }
    }

    std::size_t clauses_added() const { return clauses_added_; }

private:
    using NodeMap = std::map<BigInt, Lit>;

    BigInt clamp(const BigInt& w) const { return opt_.cap && w > *opt_.cap ? *opt_.cap : w; }

    void emit(std::vector<Lit> lits) {
        solver_->add_clause(std::move(lits));
        ++clauses_added_;
    }

    NodeMap merge(const NodeMap& a, const NodeMap& b) {
        NodeMap parent;
        auto with_zero = [](const NodeMap& m) {
            std::vector<std::pair<BigInt, std::optional<Lit>>> v;
            v.emplace_back(0, std::nullopt);
            for (const auto& [w, lit] : m) v.emplace_back(w, lit);
            return v;
        };
        std::vector<std::pair<BigInt, std::optional<Lit>>> as = with_zero(a), bs = with_zero(b);
        for (const auto& [wa, la] : as)
            for (const auto& [wb, lb] : bs) {
                BigInt s = clamp(wa + wb);
                if (s == 0) continue;
                if (!parent.count(s)) parent.emplace(s, pos(solver_->new_var()));
            }
        // detection: child sums reached force the parent threshold
        for (const auto& [wa, la] : as)
            for (const auto& [wb, lb] : bs) {
                if (wa == 0 && wb == 0) continue;
                std::vector<Lit> cl;
                if (la) cl.push_back(~*la);
                if (lb) cl.push_back(~*lb);
                cl.push_back(parent.at(clamp(wa + wb)));
                emit(std::move(cl));
            }
        // converse: a parent threshold above wa+wb forces one side higher
        if (opt_.converse) {
            for (const auto& [wa, la] : as)
                for (const auto& [wb, lb] : bs) {
                    auto pit = parent.upper_bound(wa + wb);
                    if (pit == parent.end()) continue;
                    std::vector<Lit> cl;
                    auto ait = a.upper_bound(wa);
                    if (ait != a.end()) cl.push_back(ait->second);
                    auto bit = b.upper_bound(wb);
                    if (bit != b.end()) cl.push_back(bit->second);
                    cl.push_back(~pit->second);
                    emit(std::move(cl));
                }
        }
        // chaining: a higher threshold implies every lower one
        const Lit* prev = nullptr;
        for (const auto& [w, lit] : parent) {
            if (prev) emit({~lit, *prev});
            prev = &lit;
        }
        return parent;
    }

    sat::Solver* solver_;
    Options opt_;
    std::vector<std::pair<BigInt, Lit>> outputs_;
    std::size_t clauses_added_ = 0;
};

inline ObjectiveLadder build_ladder(sat::Solver& solver,
                                    const std::vector<std::pair<Lit, BigInt>>& terms,
                                    LadderOptions opt = LadderOptions()) {
    return ObjectiveLadder(solver, terms, std::move(opt));
}

inline std::vector<Lit> assume_bound(const ObjectiveLadder& ladder, const BigInt& k) {
    return ladder.assume_bound(k);
}

/// Pins exactly k of the given literals true through one shared
/// cardinality network asserted in both directions.
inline std::size_t add_equality(sat::Solver& solver, const std::vector<Lit>& ys, std::size_t k) {
    if (k > ys.size()) throw Error("equality target exceeds the literal count");
    std::vector<std::pair<Lit, BigInt>> terms;
    terms.reserve(ys.size());
    for (Lit y : ys) terms.emplace_back(y, 1);
    ObjectiveLadder ladder(solver, terms, LadderOptions::with_converse());
    ladder.add_equality(BigInt(k));
    return ladder.clauses_added();
}

}  // namespace bmo::enc
