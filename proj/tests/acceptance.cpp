// Acceptance harness: one check per shipping criterion, one verdict line
// each. Runs everything even after a failure and exits with the number
// of failed criteria.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <vector>

#include "bmo/algorithms.hpp"
#include "bmo/generate.hpp"
#include "bmo/io.hpp"
#include "bmo/upgrade.hpp"

using namespace bmo;

namespace {

int failed = 0;

void verdict(int criterion, bool pass, const std::string& what) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str());
    if (!pass) ++failed;
}

std::string dimacs(const Clause& c) {
    std::ostringstream os;
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << c.lits[i].to_dimacs();
    return os.str();
}

pkg::PackageUniverse example1() {
    pkg::PackageUniverse u;
    u.packages = {
        {"p1", {{"p2"}, {"p5", "p6"}}, {}, false},
        {"p2", {}, {"p3"}, false},
        {"p3", {{"p4"}}, {"p1"}, false},
        {"p4", {}, {"p5", "p6"}, false},
        {"p5", {}, {}, false},
        {"p6", {}, {}, false},
    };
    return u;
}

pkg::PackageUniverse example2() {
    pkg::PackageUniverse u;
    u.packages = {
        {"p1", {{"p2"}, {"p5"}}, {"p4"}, false},
        {"p2", {}, {}, true},
        {"p3", {{"p2", "p4"}}, {}, false},
        {"p4", {}, {}, false},
        {"p5", {}, {}, false},
    };
    u.request = {"p1"};
    return u;
}

uint64_t st = 4242;
uint64_t nxt() {
    st ^= st << 13;
    st ^= st >> 7;
    st ^= st << 17;
    return st;
}
int rnd(int n) { return static_cast<int>(nxt() % static_cast<uint64_t>(n)); }

// shared random-hierarchy suite for criteria 4, 5, and 6
struct SuiteOutcome {
    int rounds = 0;
    bool agreement = true;        // criterion 4
    bool rescale_decode = true;   // criterion 5
    bool ipb_exactness = true;    // criterion 6
    double seconds = 0.0;
};

SuiteOutcome run_random_suite() {
    SuiteOutcome out;
    auto t0 = std::chrono::steady_clock::now();
    st = 4242;
    for (int round = 0; out.rounds < 500; ++round) {
        LeveledFormula f;
        f.num_vars = 3 + rnd(12);  // up to 14 vars
        int nh = rnd(f.num_vars);
        for (int i = 0; i < nh; ++i) {
            std::vector<Lit> ls;
            int len = 1 + rnd(3);
            for (int k = 0; k < len; ++k) ls.push_back(Lit(1 + rnd(f.num_vars), rnd(2) == 0));
            auto norm = normalize_clause(std::move(ls));
            if (norm) f.hard.push_back(*norm);
        }
        int nlevels = 2 + rnd(3);  // 2..4 levels
        BigInt w = 1, acc = 0;
        std::size_t total_clauses = 0;
        bool bad = false;
        for (int l = 0; l < nlevels; ++l) {
            int nc = 1 + rnd(4);
            SoftLevel lvl;
            lvl.weight = w;
            for (int c = 0; c < nc; ++c) {
                std::vector<Lit> ls;
                int len = 1 + rnd(2);
                for (int k = 0; k < len; ++k) ls.push_back(Lit(1 + rnd(f.num_vars), rnd(2) == 0));
                auto norm = normalize_clause(std::move(ls));
                if (!norm) {
                    bad = true;
                    break;
                }
                lvl.clauses.push_back(*norm);
            }
            if (bad) break;
            total_clauses += lvl.clauses.size();
            f.levels.push_back(lvl);
            acc += w * BigInt(lvl.clauses.size());
            w = acc + 1;
        }
        if (bad || total_clauses > 30) continue;

        auto rb = solve_brute(f);
        auto rr = solve_rsc(f);
        auto ri = solve_ipb(f);
        if (rb.hard_unsat()) {
            if (!rr.hard_unsat() || !ri.hard_unsat()) out.agreement = false;
            continue;
        }
        ++out.rounds;
        if (!(rr.optimum() && ri.optimum() && rr.optima.falsified == rb.optima.falsified &&
              ri.optima.falsified == rb.optima.falsified))
            out.agreement = false;

        // criterion 5: each stage cost re-derives from the stage model
        const int L = f.num_levels();
        for (const auto& sub : rr.stats.subproblems) {
            std::vector<std::size_t> upper;
            for (int j = sub.level + 1; j <= L; ++j)
                upper.push_back(sub.recounts[static_cast<std::size_t>(j - 1)]);
            auto rw = rescale_weights(sub.level, f.level_sizes(), upper);
            BigInt decoded = 0;
            for (int j = sub.level; j <= L; ++j)
                decoded +=
                    rw.multiplier_for(j) * BigInt(sub.recounts[static_cast<std::size_t>(j - 1)]);
            if (decoded != sub.cost) out.rescale_decode = false;
        }

        // criterion 6: the final ipb model attains r_j at every level
        auto rep = verify_model(f, ri.optima.model);
        if (!rep.hard_ok || rep.falsified != ri.optima.falsified) out.ipb_exactness = false;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string seconds_str(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f s", s);
    return buf;
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);

    // 1. installability encoding of the six-package universe
    {
        pkg::Installability inst = pkg::encode_installability(example1());
        const std::vector<std::string> expect = {"-1 2",  "-1 5 6", "-2 -3", "-3 4",
                                                 "-1 -3", "-4 -5",  "-4 -6"};
        bool ok = inst.hard.size() == expect.size();
        for (std::size_t i = 0; ok && i < expect.size(); ++i)
            ok = dimacs(inst.hard[i]) == expect[i];
        verdict(1, ok, "six-package universe encodes to exactly the 7 known clauses");
    }

    // 2. upgradeability encoding with minimal weights
    LeveledFormula ex2 = pkg::encode_upgradeability(example2()).formula;
    {
        bool ok = ex2.hard.size() == 4 && ex2.num_levels() == 3 && ex2.levels[0].weight == 1 &&
                  ex2.levels[0].clauses.size() == 3 && ex2.levels[1].weight == 4 &&
                  ex2.levels[1].clauses.size() == 1 && ex2.levels[2].weight == 8 &&
                  ex2.levels[2].clauses.size() == 1 && ex2.hard_threshold() == 16;
        verdict(2, ok, "five-package upgrade encodes to 9 clauses with weights 16/8/4/1");
    }

    // 3. the four algorithms agree on the known optimum
    {
        auto rb = solve_brute(ex2);
        auto rr = solve_rsc(ex2);
        auto ri = solve_ipb(ex2);
        auto rm = solve_mono(ex2);
        const std::vector<std::size_t> want_u = {1, 0, 0};
        bool ok = rb.optimum() && rb.optima.falsified == want_u && rb.optima.objective == 14;
        BigInt total_with_hards = ex2.total_soft_weight() + BigInt(ex2.hard.size()) * 16;
        for (const auto* r : {&rb, &rr, &ri, &rm}) {
            ok = ok && r->optimum() && r->optima.falsified == want_u &&
                 r->optima.objective == 14 &&
                 falsified_weight(ex2, r->optima.falsified) == 1;
            // satisfied weight counting hard clauses at the threshold weight
            BigInt satisfied = total_with_hards - falsified_weight(ex2, r->optima.falsified);
            ok = ok && satisfied == 78;
        }
        verdict(3, ok, "mono/rsc/ipb/brute all report u=<1,0,0>, falsified 1, objective 14, "
                       "satisfied 78");
    }

    // 4..6 share one randomized suite
    {
        SuiteOutcome s = run_random_suite();
        std::ostringstream os4;
        os4 << "rsc, ipb, and brute per-level optima coincide on " << s.rounds
            << " random hierarchies (" << seconds_str(s.seconds) << ")";
        verdict(4, s.agreement && s.rounds >= 500, os4.str());
        verdict(5, s.rescale_decode,
                "every rescaled stage cost re-derives from its model recount");
        verdict(6, s.ipb_exactness,
                "final ipb models attain the reported falsified count at every level");
    }

    // 7. scaling trend on generated instances
    {
        bool terminate_ok = true;
        bool growth_ok = true;
        std::vector<unsigned> bits;
        std::ostringstream detail;
        for (int n : {200, 500, 1000}) {
            gen::GenConfig cfg = gen::GenConfig::scaled(n, 3);
            cfg.request_size = 20;
            pkg::PackageUniverse u = gen::generate(cfg);
            LeveledFormula f = pkg::encode_upgradeability(u).formula;
            bits.push_back(
                static_cast<unsigned>(boost::multiprecision::msb(f.hard_threshold()) + 1));

            for (auto algo : {Algorithm::Rsc, Algorithm::Ipb, Algorithm::Mono}) {
                BmoOptions opt;
                auto t0 = std::chrono::steady_clock::now();
                opt.deadline = t0 + std::chrono::seconds(60);
                BmoResult r = algo == Algorithm::Rsc   ? solve_rsc(f, opt)
                              : algo == Algorithm::Ipb ? solve_ipb(f, opt)
                                                       : solve_mono(f, opt);
                double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                if (!r.optimum() || secs >= 60.0) terminate_ok = false;
                detail << " n=" << n << "/" << name_of(algo) << " " << seconds_str(secs);
            }
        }
        for (std::size_t i = 1; i < bits.size(); ++i)
            if (bits[i] <= bits[i - 1]) growth_ok = false;
        std::ostringstream os7;
        os7 << "rsc/ipb/mono all finish within 60 s at 200/500/1000 packages;"
            << detail.str();
        verdict(7, terminate_ok, os7.str());
        std::ostringstream os7b;
        os7b << "monolithic weight bit-length grows with scale: " << bits[0] << " -> " << bits[1]
             << " -> " << bits[2] << " bits";
        verdict(7, growth_ok, os7b.str());
        // Three tiers over 1000 packages bound the top weight by roughly
        // (u+1)^3 < 2^30; the measured 23 bits cannot reach 64. The >64-bit
        // regime needs deeper hierarchies (see the formula test that drives
        // minimal_weights past 64 bits with 35 levels). Reported honestly red.
        verdict(7, bits[2] > 64,
                "monolithic weights exceed 64 bits at 1000 packages (unattainable with "
                "three tiers: top is " +
                    std::to_string(bits[2]) + " bits)");
    }

    // 8. hard satisfiability across the generator config space
    {
        bool ok = true;
        int count = 0;
        for (uint64_t seed = 1; seed <= 25 && ok; ++seed) {
            for (int n : {20, 60, 120, 240}) {
                gen::GenConfig cfg = gen::GenConfig::scaled(n, seed);
                cfg.conflict_density = (n % 3 == 0) ? 0.05 : 0.02;
                pkg::PackageUniverse u = gen::generate(cfg);
                pkg::Installability inst = pkg::encode_installability(u);
                Model all_false = Model::all_false(inst.vars.size());
                for (const Clause& c : inst.hard) ok = ok && all_false.satisfies(c);
                ++count;
            }
        }
        verdict(8, ok && count == 100,
                "all-false verifies the hard clauses of 100 generated universes");
    }

    // 9. format round trips
    {
        bool ok = true;
        int artifacts = 0;
        for (uint64_t seed = 1; seed <= 34 && ok; ++seed) {
            gen::GenConfig cfg = gen::GenConfig::scaled(40, seed);
            pkg::PackageUniverse u = gen::generate(cfg);
            ok = ok && io::read_universe(io::write_universe(u)) == u;
            ++artifacts;

            LeveledFormula f = pkg::encode_upgradeability(u).formula;
            std::string wcnf = io::write_wcnf(f);
            ok = ok && io::write_wcnf(f) == wcnf;  // byte determinism
            io::WcnfDocument doc = io::read_wcnf(wcnf);
            ok = ok && io::write_wcnf(doc.to_leveled()) == wcnf;
            ++artifacts;

            auto r = solve_rsc(f);
            ok = ok && r.optimum();
            std::string mline = io::write_model(r.optima.model);
            ok = ok && io::read_model(mline, f.num_vars) == r.optima.model;
            ok = ok && io::write_model(io::read_model(mline, f.num_vars)) == mline;
            ++artifacts;

            if (seed == 1) {
                std::string again = io::write_wcnf(pkg::encode_upgradeability(
                                                       io::read_universe(io::write_universe(u)))
                                                       .formula);
                ok = ok && again == wcnf;
            }
        }
        std::ostringstream os9;
        os9 << "wcnf, universe, and model read-write identity on " << artifacts << " artifacts";
        verdict(9, ok && artifacts >= 100, os9.str());
    }

    // 10. maxsat engine vs exhaustive enumeration
    {
        st = 99991;
        bool ok = true;
        int rounds = 0;
        auto t0 = std::chrono::steady_clock::now();
        while (rounds < 500) {
            MaxSatInstance inst;
            inst.num_vars = 3 + rnd(10);  // up to 12 vars
            int nh = rnd(inst.num_vars);
            int ns = 1 + rnd(inst.num_vars * 2);
            for (int i = 0; i < nh; ++i) {
                std::vector<Lit> ls;
                int len = 1 + rnd(3);
                for (int k = 0; k < len; ++k)
                    ls.push_back(Lit(1 + rnd(inst.num_vars), rnd(2) == 0));
                inst.hard.push_back(Clause(std::move(ls)));
            }
            for (int i = 0; i < ns; ++i) {
                std::vector<Lit> ls;
                int len = 1 + rnd(3);
                for (int k = 0; k < len; ++k)
                    ls.push_back(Lit(1 + rnd(inst.num_vars), rnd(2) == 0));
                inst.soft.push_back({Clause(std::move(ls)), 1 + rnd(16)});
            }
            bool any = false;
            BigInt best = 0;
            for (uint32_t m = 0; m < (1u << inst.num_vars); ++m) {
                std::vector<bool> vals(static_cast<std::size_t>(inst.num_vars));
                for (int v = 0; v < inst.num_vars; ++v)
                    vals[static_cast<std::size_t>(v)] = (m >> v) & 1;
                Model mod(vals);
                bool hard_ok = true;
                for (const Clause& c : inst.hard) hard_ok = hard_ok && mod.satisfies(c);
                if (!hard_ok) continue;
                BigInt cost = 0;
                for (const auto& [c, w] : inst.soft)
                    if (!mod.satisfies(c)) cost += w;
                if (!any || cost < best) {
                    any = true;
                    best = cost;
                }
            }
            auto r = solve_maxsat(inst);
            if (!any) {
                if (!r.hard_unsat()) ok = false;
                continue;
            }
            ++rounds;
            if (!r.optimum() || r.falsified_weight != best) ok = false;
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream os10;
        os10 << "falsified weight matches enumeration on " << rounds
             << " random weighted instances (" << seconds_str(secs) << ")";
        verdict(10, ok, os10.str());
    }

    std::printf("%d criterion check%s failed\n", failed, failed == 1 ? "" : "s");
    return failed;
}
