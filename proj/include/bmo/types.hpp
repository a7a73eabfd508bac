#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bmo {

/// Weights are arbitrary-precision: aggregate clause weights on large
/// instances do not fit fixed-width integers.
using BigInt = boost::multiprecision::cpp_int;

/// Variables are dense positive indices 1..n within a formula.
using Var = int32_t;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EmptyClauseError : public Error {
public:
    EmptyClauseError() : Error("empty clause") {}
};

/// A literal is a variable with a sign. Encoded as 2*var for positive,
/// 2*var+1 for negative, so that sorting by code orders literals by
/// ascending variable index with the positive phase first.
class Lit {
public:
    Lit() : code_(0) {}
    Lit(Var v, bool negated) : code_(2 * v + (negated ? 1 : 0)) {}

    Var var() const { return static_cast<Var>(code_ >> 1); }
    bool negated() const { return (code_ & 1) != 0; }
    int32_t code() const { return code_; }

    Lit operator~() const { return from_code(code_ ^ 1); }

    friend bool operator==(Lit a, Lit b) { return a.code_ == b.code_; }
    friend bool operator!=(Lit a, Lit b) { return a.code_ != b.code_; }
    friend bool operator<(Lit a, Lit b) { return a.code_ < b.code_; }

    /// DIMACS convention: +v / -v.
    int32_t to_dimacs() const { return negated() ? -var() : var(); }
    static Lit from_dimacs(int32_t d) { return Lit(d < 0 ? -d : d, d < 0); }
    static Lit from_code(int32_t c) {
        Lit l;
        l.code_ = c;
        return l;
    }

private:
    int32_t code_;
};

inline Lit pos(Var v) { return Lit(v, false); }
inline Lit neg(Var v) { return Lit(v, true); }

/// A disjunction of literals. Normalized clauses carry no duplicate
/// literals and no complementary pair, in canonical order (ascending
/// variable, positive phase first).
struct Clause {
    std::vector<Lit> lits;

    Clause() = default;
    explicit Clause(std::vector<Lit> ls) : lits(std::move(ls)) {}
    Clause(std::initializer_list<Lit> ls) : lits(ls) {}

    std::size_t size() const { return lits.size(); }
    bool empty() const { return lits.empty(); }
    auto begin() const { return lits.begin(); }
    auto end() const { return lits.end(); }

    Var max_var() const {
        Var m = 0;
        for (Lit l : lits) m = std::max(m, l.var());
        return m;
    }

    friend bool operator==(const Clause& a, const Clause& b) { return a.lits == b.lits; }
    friend bool operator<(const Clause& a, const Clause& b) {
        return std::lexicographical_compare(a.lits.begin(), a.lits.end(), b.lits.begin(),
                                            b.lits.end());
    }
};

/// Removes duplicate literals and sorts into canonical order. Returns
/// nullopt for tautologies (a complementary pair). Throws
/// EmptyClauseError on empty input.
inline std::optional<Clause> normalize_clause(std::vector<Lit> lits) {
    if (lits.empty()) throw EmptyClauseError();
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
        if (lits[i].var() == lits[i - 1].var()) return std::nullopt;
    return Clause(std::move(lits));
}

/// A total truth assignment over variables 1..num_vars. Auxiliary and
/// relaxation variables are projected out before a model is reported.
class Model {
public:
    Model() = default;
    explicit Model(std::vector<bool> values) : values_(std::move(values)) {}

    static Model all_false(Var num_vars) {
        return Model(std::vector<bool>(static_cast<std::size_t>(num_vars), false));
    }

    Var num_vars() const { return static_cast<Var>(values_.size()); }

    bool value(Var v) const { return values_.at(static_cast<std::size_t>(v - 1)); }
    void set(Var v, bool b) { values_.at(static_cast<std::size_t>(v - 1)) = b; }

    bool satisfies(Lit l) const { return value(l.var()) != l.negated(); }
    bool satisfies(const Clause& c) const {
        for (Lit l : c.lits)
            if (satisfies(l)) return true;
        return false;
    }

    /// Restriction to the first num_vars variables.
    Model project(Var num_vars) const {
        return Model(std::vector<bool>(values_.begin(), values_.begin() + num_vars));
    }

    friend bool operator==(const Model& a, const Model& b) { return a.values_ == b.values_; }

private:
    std::vector<bool> values_;
};

}  // namespace bmo
