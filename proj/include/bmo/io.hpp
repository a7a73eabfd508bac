#pragma once

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bmo/formula.hpp"
#include "bmo/types.hpp"
#include "bmo/upgrade.hpp"

namespace bmo::io {

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool looks_like_int(std::string_view t) {
    std::size_t i = (t.front() == '-' || t.front() == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
}

inline int64_t parse_i64(std::string_view t, int line, const char* what) {
    if (t.empty() || !looks_like_int(t)) throw ParseError(line, std::string("malformed ") + what);
    errno = 0;
    char* end = nullptr;
    std::string buf(t);
    long long v = std::strtoll(buf.c_str(), &end, 10);
    if (errno != 0 || end != buf.c_str() + buf.size())
        throw ParseError(line, std::string(what) + " out of range");
    return v;
}

inline BigInt parse_weight(std::string_view t, int line) {
    if (t.empty() || !looks_like_int(t)) throw ParseError(line, "malformed weight");
    return BigInt(std::string(t));
}

}  // namespace detail

// -------------------------------------------------------------------------
// WCNF

struct WcnfDocument {
    Var num_vars = 0;
    BigInt top = 1;
    std::vector<WeightedClause> clauses;
    std::vector<std::string> comments;

    LeveledFormula to_leveled() const { return stratify(clauses, num_vars, &top); }
};

/// Old-style DIMACS WCNF: `p wcnf V C TOP` then one clause per line,
/// `w l1 ... lk 0`. Weights >= TOP are hard; an `h` weight token is
/// accepted as hard for newer files. Comments (`c`) are collected.
inline WcnfDocument read_wcnf(std::string_view text) {
    WcnfDocument doc;
    bool have_header = false;
    int64_t declared_clauses = 0;
    int last_line = 0;

    auto lines = detail::split_lines(text);
    for (std::size_t idx = 0; idx < lines.size(); ++idx) {
        int line_no = static_cast<int>(idx + 1);
        last_line = line_no;
        std::string_view line = detail::trim(lines[idx]);
        if (line.empty()) continue;
        if (line[0] == 'c' && (line.size() == 1 || std::isspace(static_cast<unsigned char>(line[1])))) {
            doc.comments.emplace_back(detail::trim(line.substr(1)));
            continue;
        }
        auto toks = detail::tokens(line);
        if (toks[0] == "p") {
            if (have_header) throw ParseError(line_no, "duplicate header");
            if (toks.size() != 5 || toks[1] != "wcnf")
                throw ParseError(line_no, "malformed header, expected 'p wcnf V C TOP'");
            int64_t v = detail::parse_i64(toks[2], line_no, "variable count");
            declared_clauses = detail::parse_i64(toks[3], line_no, "clause count");
            if (v < 0 || declared_clauses < 0) throw ParseError(line_no, "malformed header");
            doc.top = detail::parse_weight(toks[4], line_no);
            if (doc.top < 1) throw ParseError(line_no, "top weight must be positive");
            doc.num_vars = static_cast<Var>(v);
            have_header = true;
            continue;
        }
        if (!have_header) throw ParseError(line_no, "clause before header");

        bool hard = false;
        BigInt weight;
        if (toks[0] == "h") {
            hard = true;
        } else {
            weight = detail::parse_weight(toks[0], line_no);
            if (weight < 1) throw ParseError(line_no, "non-positive clause weight");
            if (weight >= doc.top) hard = true;
        }

        std::vector<Lit> lits;
        bool terminated = false;
        for (std::size_t t = 1; t < toks.size(); ++t) {
            int64_t l = detail::parse_i64(toks[t], line_no, "literal");
            if (l == 0) {
                if (t + 1 != toks.size()) throw ParseError(line_no, "literal 0 mid-clause");
                terminated = true;
                break;
            }
            int64_t v = l < 0 ? -l : l;
            if (v > doc.num_vars)
                throw ParseError(line_no, "variable " + std::to_string(v) +
                                              " exceeds declared count " +
                                              std::to_string(doc.num_vars));
            lits.push_back(Lit::from_dimacs(static_cast<int32_t>(l)));
        }
        if (!terminated) throw ParseError(line_no, "clause missing terminating 0");
        if (lits.empty()) throw ParseError(line_no, "empty clause");
        doc.clauses.push_back(hard ? WeightedClause::make_hard(Clause(std::move(lits)))
                                   : WeightedClause::soft(Clause(std::move(lits)), weight));
    }
    if (!have_header) throw ParseError(last_line, "missing header");
    if (static_cast<int64_t>(doc.clauses.size()) != declared_clauses)
        throw ParseError(last_line, "header declares " + std::to_string(declared_clauses) +
                                        " clauses, file has " +
                                        std::to_string(doc.clauses.size()));
    return doc;
}

/// Deterministic WCNF rendering: hard clauses first, then levels from
/// strongest to weakest, literals in the clauses' canonical order, LF
/// line endings. TOP is the formula's hard threshold.
inline std::string write_wcnf(const LeveledFormula& f) {
    std::ostringstream os;
    BigInt top = f.hard_threshold();
    std::size_t count = f.hard.size();
    for (const auto& lv : f.levels) count += lv.clauses.size();
    os << "p wcnf " << f.num_vars << " " << count << " " << top << "\n";
    auto emit = [&](const BigInt& w, const Clause& c) {
        os << w;
        for (Lit l : c) os << " " << l.to_dimacs();
        os << " 0\n";
    };
    for (const Clause& c : f.hard) emit(top, c);
    for (auto it = f.levels.rbegin(); it != f.levels.rend(); ++it)
        for (const Clause& c : it->clauses) emit(it->weight, c);
    return os.str();
}

// -------------------------------------------------------------------------
// OPB

/// Monolithic pseudo-Boolean rendering: every clause becomes a >= 1
/// constraint, each soft clause gets a fresh relaxation variable
/// (numbered after the original variables, strongest level first), and
/// the objective minimizes the weighted sum of relaxation variables.
/// Pure-hard formulas carry no objective line.
inline std::string write_opb(const LeveledFormula& f) {
    std::vector<std::pair<const Clause*, BigInt>> softs;  // strongest first, with weight
    for (auto it = f.levels.rbegin(); it != f.levels.rend(); ++it)
        for (const Clause& c : it->clauses) softs.emplace_back(&c, it->weight);

    std::ostringstream os;
    os << "* #variable= " << f.num_vars + static_cast<Var>(softs.size())
       << " #constraint= " << f.hard.size() + softs.size() << "\n";

    auto term = [&](Lit l) {
        os << "+1 " << (l.negated() ? "~x" : "x") << l.var() << " ";
    };
    if (!softs.empty()) {
        os << "min:";
        for (std::size_t j = 0; j < softs.size(); ++j)
            os << " +" << softs[j].second << " x" << f.num_vars + static_cast<Var>(j + 1);
        os << " ;\n";
    }
    for (const Clause& c : f.hard) {
        for (Lit l : c) term(l);
        os << ">= 1 ;\n";
    }
    for (std::size_t j = 0; j < softs.size(); ++j) {
        for (Lit l : *softs[j].first) term(l);
        term(pos(f.num_vars + static_cast<Var>(j + 1)));
        os << ">= 1 ;\n";
    }
    return os.str();
}

// -------------------------------------------------------------------------
// Package universe

/// Stanza format, blank-line separated:
///
///     package: p1
///     depends: p2 | p5
///     conflicts: p4
///     installed: true
///
///     request:
///     p1
///
/// One `depends:` line per disjunction; `conflicts:` lines accumulate;
/// the final `request:` section lists install targets one per line.
inline pkg::PackageUniverse read_universe(std::string_view text) {
    pkg::PackageUniverse u;
    pkg::Package* current = nullptr;
    bool in_request = false;
    std::vector<std::pair<std::string, int>> referenced;  // name, line

    auto word = [](std::string_view s, int line_no, const char* what) {
        s = detail::trim(s);
        if (s.empty() || detail::tokens(s).size() != 1)
            throw ParseError(line_no, std::string("malformed ") + what);
        return std::string(s);
    };

    auto lines = detail::split_lines(text);
    for (std::size_t idx = 0; idx < lines.size(); ++idx) {
        int line_no = static_cast<int>(idx + 1);
        std::string_view line = detail::trim(lines[idx]);
        if (line.empty()) {
            current = nullptr;
            continue;
        }
        std::size_t colon = line.find(':');
        std::string_view key = colon == std::string_view::npos ? "" : line.substr(0, colon);
        std::string_view rest = colon == std::string_view::npos ? "" : line.substr(colon + 1);

        if (key == "package") {
            if (in_request) throw ParseError(line_no, "package stanza after request section");
            std::string name = word(rest, line_no, "package name");
            for (const pkg::Package& p : u.packages)
                if (p.name == name) throw ParseError(line_no, "duplicate package '" + name + "'");
            u.packages.push_back(pkg::Package{name, {}, {}, false});
            current = &u.packages.back();
            continue;
        }
        if (key == "request") {
            if (in_request) throw ParseError(line_no, "duplicate request section");
            if (!detail::trim(rest).empty()) throw ParseError(line_no, "malformed request line");
            in_request = true;
            current = nullptr;
            continue;
        }
        if (in_request) {
            if (colon != std::string_view::npos) throw ParseError(line_no, "malformed line");
            u.request.push_back(word(line, line_no, "request entry"));
            referenced.emplace_back(u.request.back(), line_no);
            continue;
        }
        if (!current) throw ParseError(line_no, "line outside any package stanza");
        if (key == "depends") {
            std::vector<std::string> alts;
            std::string_view body = rest;
            while (true) {
                std::size_t bar = body.find('|');
                std::string_view alt = bar == std::string_view::npos ? body : body.substr(0, bar);
                alts.push_back(word(alt, line_no, "dependency"));
                referenced.emplace_back(alts.back(), line_no);
                if (bar == std::string_view::npos) break;
                body = body.substr(bar + 1);
            }
            current->depends.push_back(std::move(alts));
        } else if (key == "conflicts") {
            std::string_view body = rest;
            while (true) {
                std::size_t comma = body.find(',');
                std::string_view c = comma == std::string_view::npos ? body : body.substr(0, comma);
                current->conflicts.push_back(word(c, line_no, "conflict"));
                if (current->conflicts.back() == current->name)
                    throw ParseError(line_no,
                                     "package '" + current->name + "' conflicts with itself");
                referenced.emplace_back(current->conflicts.back(), line_no);
                if (comma == std::string_view::npos) break;
                body = body.substr(comma + 1);
            }
        } else if (key == "installed") {
            std::string v = word(rest, line_no, "installed flag");
            if (v == "true")
                current->installed = true;
            else if (v == "false")
                current->installed = false;
            else
                throw ParseError(line_no, "installed flag must be true or false");
        } else {
            throw ParseError(line_no, "malformed line");
        }
    }

    for (const auto& [name, line_no] : referenced)
        if (!u.find(name)) throw ParseError(line_no, "undeclared package '" + name + "'");
    return u;
}

inline std::string write_universe(const pkg::PackageUniverse& u) {
    std::ostringstream os;
    for (const pkg::Package& p : u.packages) {
        os << "package: " << p.name << "\n";
        for (const auto& disjunction : p.depends) {
            os << "depends: ";
            for (std::size_t i = 0; i < disjunction.size(); ++i)
                os << (i ? " | " : "") << disjunction[i];
            os << "\n";
        }
        if (!p.conflicts.empty()) {
            os << "conflicts: ";
            for (std::size_t i = 0; i < p.conflicts.size(); ++i)
                os << (i ? ", " : "") << p.conflicts[i];
            os << "\n";
        }
        if (p.installed) os << "installed: true\n";
        os << "\n";
    }
    os << "request:\n";
    for (const std::string& r : u.request) os << r << "\n";
    return os.str();
}

// -------------------------------------------------------------------------
// Models

/// MaxSAT-evaluation style value line: `v 1 2 -3 -4 5`.
inline std::string write_model(const Model& m) {
    std::ostringstream os;
    os << "v";
    for (Var v = 1; v <= m.num_vars(); ++v) os << " " << (m.value(v) ? v : -v);
    os << "\n";
    return os.str();
}

/// Reads the `v` line(s) of a solver log or model file. When num_vars
/// is positive the literals must cover exactly 1..num_vars; otherwise
/// the count is inferred from the largest variable mentioned.
inline Model read_model(std::string_view text, Var num_vars = 0) {
    std::vector<std::pair<int64_t, int>> lits;  // literal, line
    bool saw_v = false;
    auto lines = detail::split_lines(text);
    for (std::size_t idx = 0; idx < lines.size(); ++idx) {
        int line_no = static_cast<int>(idx + 1);
        std::string_view line = detail::trim(lines[idx]);
        if (line.empty() || line[0] != 'v') continue;
        auto toks = detail::tokens(line.substr(1));
        saw_v = true;
        for (auto t : toks) lits.emplace_back(detail::parse_i64(t, line_no, "literal"), line_no);
    }
    if (!saw_v) throw ParseError(static_cast<int>(lines.size()), "no model line");

    Var n = num_vars;
    if (n == 0)
        for (auto [l, line_no] : lits)
            n = std::max(n, static_cast<Var>(l < 0 ? -l : l));

    std::vector<bool> values(static_cast<std::size_t>(n), false);
    std::vector<bool> assigned(static_cast<std::size_t>(n), false);
    for (auto [l, line_no] : lits) {
        int64_t v = l < 0 ? -l : l;
        if (v < 1 || v > n)
            throw ParseError(line_no, "literal " + std::to_string(l) + " out of range");
        if (assigned[static_cast<std::size_t>(v - 1)])
            throw ParseError(line_no, "variable " + std::to_string(v) + " assigned twice");
        assigned[static_cast<std::size_t>(v - 1)] = true;
        values[static_cast<std::size_t>(v - 1)] = l > 0;
    }
    for (Var v = 1; v <= n; ++v)
        if (!assigned[static_cast<std::size_t>(v - 1)])
            throw Error("variable " + std::to_string(v) + " not assigned by model");
    return Model(std::move(values));
}

}  // namespace bmo::io
