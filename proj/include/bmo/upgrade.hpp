#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bmo/formula.hpp"
#include "bmo/types.hpp"

namespace bmo::pkg {

/// One package: dependency disjunctions (each alternative satisfies the
/// dependency), conflicting packages, and an installed marker.
struct Package {
    std::string name;
    std::vector<std::vector<std::string>> depends;
    std::vector<std::string> conflicts;
    bool installed = false;

    friend bool operator==(const Package&, const Package&) = default;
};

/// A repository snapshot: declared packages in file order plus the list
/// of packages requested for installation. The installed set A is the
/// set of packages with the installed flag; the request set I may
/// overlap A.
struct PackageUniverse {
    std::vector<Package> packages;
    std::vector<std::string> request;

    const Package* find(const std::string& name) const {
        for (const Package& p : packages)
            if (p.name == name) return &p;
        return nullptr;
    }

    /// Rejects duplicate declarations, references to undeclared
    /// packages anywhere (dependencies, conflicts, request), and
    /// self-conflicts.
    void validate() const {
        std::set<std::string> declared;
        for (const Package& p : packages) {
            if (p.name.empty()) throw Error("package with empty name");
            if (!declared.insert(p.name).second)
                throw Error("duplicate package '" + p.name + "'");
        }
        auto check = [&](const std::string& name, const Package& at) {
            if (!declared.count(name))
                throw Error("package '" + at.name + "' references undeclared package '" + name +
                            "'");
        };
        for (const Package& p : packages) {
            for (const auto& disjunction : p.depends)
                for (const std::string& alt : disjunction) check(alt, p);
            for (const std::string& c : p.conflicts) {
                check(c, p);
                if (c == p.name) throw Error("package '" + p.name + "' conflicts with itself");
            }
        }
        for (const std::string& r : request)
            if (!declared.count(r)) throw Error("request references undeclared package '" + r + "'");
    }

    friend bool operator==(const PackageUniverse&, const PackageUniverse&) = default;
};

/// Bijection between package names and solver variables, ordered
/// lexicographically by name so the mapping is independent of stanza
/// order.
class VarMap {
public:
    VarMap() = default;

    explicit VarMap(const PackageUniverse& u) {
        for (const Package& p : u.packages) names_.push_back(p.name);
        std::sort(names_.begin(), names_.end());
        for (std::size_t i = 0; i < names_.size(); ++i)
            index_[names_[i]] = static_cast<Var>(i + 1);
    }

    Var var_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("unknown package '" + name + "'");
        return it->second;
    }

    const std::string& name_of(Var v) const {
        return names_.at(static_cast<std::size_t>(v - 1));
    }

    Var size() const { return static_cast<Var>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::map<std::string, Var> index_;
};

struct Installability {
    std::vector<Clause> hard;
    VarMap vars;
};

/// CNF of "every installed package has its dependencies met and
/// conflicts respected": per dependency disjunction a clause
/// not(x_p) or (x_q1 or ... or x_qk), per conflict pair one clause
/// not(x_p) or not(x_q). Packages are visited in variable (name) order,
/// dependencies before conflicts, and each unordered conflict pair is
/// emitted once, at the first package that mentions it. Every clause
/// contains not(x_p), and conflict clauses are all-negative, so the
/// all-false assignment always satisfies the result.
inline Installability encode_installability(const PackageUniverse& u) {
    u.validate();
    Installability out;
    out.vars = VarMap(u);

    std::map<std::string, const Package*> by_name;
    for (const Package& p : u.packages) by_name[p.name] = &p;

    std::set<std::pair<Var, Var>> seen_conflicts;
    for (Var v = 1; v <= out.vars.size(); ++v) {
        const Package& p = *by_name.at(out.vars.name_of(v));
        for (const auto& disjunction : p.depends) {
            std::vector<Lit> lits{neg(v)};
            for (const std::string& alt : disjunction) lits.push_back(pos(out.vars.var_of(alt)));
            if (auto c = normalize_clause(std::move(lits))) out.hard.push_back(std::move(*c));
            // a package among its own alternatives makes the clause tautological
        }
        for (const std::string& cname : p.conflicts) {
            Var w = out.vars.var_of(cname);
            auto key = std::minmax(v, w);
            if (!seen_conflicts.insert(key).second) continue;
            out.hard.push_back(Clause{neg(key.first), neg(key.second)});
        }
    }
    return out;
}

struct UpgradeEncoding {
    LeveledFormula formula;
    VarMap vars;
};

namespace detail {

inline UpgradeEncoding encode_tiers(const PackageUniverse& u,
                                    const std::vector<BigInt>* explicit_weights) {
    Installability inst = encode_installability(u);
    UpgradeEncoding out;
    out.vars = std::move(inst.vars);
    out.formula.num_vars = out.vars.size();
    out.formula.hard = std::move(inst.hard);

    std::set<std::string> requested(u.request.begin(), u.request.end());

    // tier 1 (weakest): remaining packages stay out; tier 2: installed
    // packages stay in; tier 3: requested packages get in. A package
    // both requested and installed counts once, in the request tier.
    std::vector<Clause> tiers[3];
    for (Var v = 1; v <= out.vars.size(); ++v) {
        const std::string& name = out.vars.name_of(v);
        if (requested.count(name))
            tiers[2].push_back(Clause{pos(v)});
        else if (u.find(name)->installed)
            tiers[1].push_back(Clause{pos(v)});
        else
            tiers[0].push_back(Clause{neg(v)});
    }

    std::vector<std::size_t> sizes;
    for (const auto& tier : tiers)
        if (!tier.empty()) sizes.push_back(tier.size());

    std::vector<BigInt> weights;
    if (explicit_weights) {
        weights = *explicit_weights;
        if (weights.size() != sizes.size())
            throw Error("expected " + std::to_string(sizes.size()) + " level weights, got " +
                        std::to_string(weights.size()));
        BigInt dominated = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] < 1) throw Error("level weights must be positive");
            if (i >= 1 && weights[i] <= dominated)
                throw NotBmoError(static_cast<int>(i + 1),
                                  "weight " + weights[i].str() + " of level " +
                                      std::to_string(i + 1) + " does not dominate the " +
                                      dominated.str() + " below it");
            dominated += weights[i] * BigInt(sizes[i]);
        }
    } else {
        weights = minimal_weights(sizes).first;
    }

    std::size_t level = 0;
    for (auto& tier : tiers) {
        if (tier.empty()) continue;
        out.formula.levels.push_back(SoftLevel{std::move(tier), weights[level]});
        ++level;
    }
    return out;
}

}  // namespace detail

/// The upgradeability hierarchy over the installability CNF, weighted
/// per minimal_weights. Empty tiers are skipped and the remaining
/// levels renumbered from 1.
inline UpgradeEncoding encode_upgradeability(const PackageUniverse& u) {
    return detail::encode_tiers(u, nullptr);
}

/// Same hierarchy with caller-supplied weights, one per nonempty tier
/// in ascending order; weights violating the dominance condition are
/// rejected.
inline UpgradeEncoding encode_upgradeability(const PackageUniverse& u,
                                             const std::vector<BigInt>& level_weights) {
    return detail::encode_tiers(u, &level_weights);
}

}  // namespace bmo::pkg
