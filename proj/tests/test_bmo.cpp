#include <catch2/catch_amalgamated.hpp>

#include "bmo/algorithms.hpp"

using namespace bmo;

namespace {

uint64_t st = 4242;
uint64_t nxt() {
    st ^= st << 13;
    st ^= st >> 7;
    st ^= st << 17;
    return st;
}
int rnd(int n) { return static_cast<int>(nxt() % static_cast<uint64_t>(n)); }

LeveledFormula example2() {
    LeveledFormula f;
    f.num_vars = 5;
    f.hard = {Clause({neg(1), pos(2)}), Clause({neg(1), pos(5)}), Clause({neg(1), neg(4)}),
              Clause({pos(2), neg(3), pos(4)})};
    f.levels.push_back({{Clause({neg(3)}), Clause({neg(4)}), Clause({neg(5)})}, 1});
    f.levels.push_back({{Clause({pos(2)})}, 4});
    f.levels.push_back({{Clause({pos(1)})}, 8});
    return f;
}

}  // namespace

TEST_CASE("rescaling multipliers follow the recurrence") {
    std::vector<std::size_t> sizes = {3, 1, 1};
    auto top = rescale_weights(3, sizes, {});
    REQUIRE(top.multipliers == std::vector<BigInt>{1, 2});
    REQUIRE(top.initial_ub() == 2);
    auto bottom = rescale_weights(1, sizes, {0, 0});
    REQUIRE(bottom.multipliers == std::vector<BigInt>{1, 4, 4, 4});
    REQUIRE(bottom.initial_ub() == 4);
    auto units = rescale_weights(1, {1, 1, 1}, {0, 0});
    REQUIRE(units.multipliers == std::vector<BigInt>{1, 2, 2, 2});
}

TEST_CASE("all four algorithms find the unique optimum") {
    LeveledFormula f = example2();
    auto rb = solve_brute(f);
    REQUIRE(rb.optimum());
    REQUIRE(rb.optima.falsified == std::vector<std::size_t>{1, 0, 0});
    REQUIRE(rb.optima.objective == 14);
    auto rr = solve_rsc(f);
    auto ri = solve_ipb(f);
    auto rm = solve_mono(f);
    for (const auto* r : {&rr, &ri, &rm}) {
        REQUIRE(r->optimum());
        REQUIRE(r->optima.falsified == rb.optima.falsified);
        REQUIRE(r->optima.objective == 14);
        auto rep = verify_model(f, r->optima.model);
        REQUIRE(rep.hard_ok);
        REQUIRE(rep.falsified == r->optima.falsified);
    }
    const bool want[5] = {true, true, false, false, true};
    for (const auto* r : {&rb, &rr, &ri, &rm})
        for (Var v = 1; v <= 5; ++v) REQUIRE(r->optima.model.value(v) == want[v - 1]);

    // rescaling runs one subproblem per level boundary plus the last level
    REQUIRE(rr.stats.subproblems.size() == 3);
    REQUIRE(rr.stats.subproblems[0].level == 3);
    REQUIRE(rr.stats.subproblems[0].bound == 2);
    REQUIRE(rr.algorithm == Algorithm::Rsc);
    REQUIRE(ri.algorithm == Algorithm::Ipb);
}

TEST_CASE("no soft levels: any hard model is optimal") {
    LeveledFormula f;
    f.num_vars = 2;
    f.hard = {Clause({pos(1), pos(2)})};
    for (const auto& r : {solve_rsc(f), solve_ipb(f), solve_mono(f), solve_brute(f)}) {
        REQUIRE(r.optimum());
        REQUIRE(r.optima.falsified.empty());
        REQUIRE(r.optima.objective == 0);
        REQUIRE(r.optima.model.num_vars() == 2);
    }
}

TEST_CASE("hard-unsat propagates through every algorithm") {
    LeveledFormula f;
    f.num_vars = 1;
    f.hard = {Clause({pos(1)}), Clause({neg(1)})};
    f.levels.push_back({{Clause({pos(1)})}, 1});
    REQUIRE(solve_rsc(f).hard_unsat());
    REQUIRE(solve_ipb(f).hard_unsat());
    REQUIRE(solve_mono(f).hard_unsat());
    REQUIRE(solve_brute(f).hard_unsat());
}

TEST_CASE("fully falsified level") {
    LeveledFormula f;
    f.num_vars = 3;
    f.hard = {Clause({pos(1)}), Clause({pos(2)}), Clause({pos(3)})};
    f.levels.push_back({{Clause({neg(1)}), Clause({neg(2)}), Clause({neg(3)})}, 1});
    for (const auto& r : {solve_rsc(f), solve_ipb(f), solve_mono(f), solve_brute(f)}) {
        REQUIRE(r.optimum());
        REQUIRE(r.optima.falsified == std::vector<std::size_t>{3});
        REQUIRE(r.optima.objective == 0);
    }
}

TEST_CASE("brute force refuses oversized instances") {
    LeveledFormula f;
    f.num_vars = 23;
    REQUIRE_THROWS_AS(solve_brute(f), TooLargeError);
    REQUIRE_NOTHROW(solve_brute(f, 23));
    LeveledFormula g;
    g.num_vars = 31;
    REQUIRE_THROWS_AS(solve_brute(g, 31), Error);  // cap itself out of range
}

TEST_CASE("lexicographic agreement across algorithms on random hierarchies") {
    st = 4242;
    int agree_rounds = 0;
    for (int round = 0; round < 400; ++round) {
        LeveledFormula f;
        f.num_vars = 3 + rnd(10);
        int nh = rnd(f.num_vars);
        for (int i = 0; i < nh; ++i) {
            std::vector<Lit> ls;
            int len = 1 + rnd(3);
            for (int k = 0; k < len; ++k) ls.push_back(Lit(1 + rnd(f.num_vars), rnd(2) == 0));
            auto norm = normalize_clause(std::move(ls));
            if (norm) f.hard.push_back(*norm);
        }
        int nlevels = 1 + rnd(4);
        BigInt w = 1, acc = 0;
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
            f.levels.push_back(lvl);
            acc += w * BigInt(lvl.clauses.size());
            w = acc + 1;
        }
        if (bad) continue;
        auto rb = solve_brute(f);
        auto rr = solve_rsc(f);
        auto ri = solve_ipb(f);
        auto rm = solve_mono(f);
        if (rb.hard_unsat()) {
            REQUIRE(rr.hard_unsat());
            REQUIRE(ri.hard_unsat());
            REQUIRE(rm.hard_unsat());
            continue;
        }
        ++agree_rounds;
        REQUIRE(rr.optima.falsified == rb.optima.falsified);
        REQUIRE(ri.optima.falsified == rb.optima.falsified);
        REQUIRE(rm.optima.falsified == rb.optima.falsified);
        REQUIRE(rr.optima.objective == rb.optima.objective);
        REQUIRE(ri.optima.objective == rb.optima.objective);
        REQUIRE(rm.optima.objective == rb.optima.objective);
        REQUIRE(objective_value(f, rb.optima.falsified) == rb.optima.objective);
        // the iterative algorithm's final model attains its counts at every level
        auto rep = verify_model(f, ri.optima.model);
        REQUIRE(rep.hard_ok);
        REQUIRE(rep.falsified == ri.optima.falsified);
    }
    REQUIRE(agree_rounds >= 150);
}

TEST_CASE("subproblem costs decode to the recounted falsified vector") {
    LeveledFormula f = example2();
    auto r = solve_rsc(f);
    REQUIRE(r.optimum());
    const int L = f.num_levels();
    for (const auto& sub : r.stats.subproblems) {
        REQUIRE(sub.recounts.size() == static_cast<std::size_t>(L));
        // settled levels are pinned exactly by the stage's upper bound
        for (int j = sub.level + 1; j <= L; ++j)
            REQUIRE(sub.recounts[static_cast<std::size_t>(j - 1)] ==
                    r.optima.falsified[static_cast<std::size_t>(j - 1)]);
        // the engine-reported stage cost equals the multiplier-weighted recount
        std::vector<std::size_t> upper;
        for (int j = sub.level + 1; j <= L; ++j)
            upper.push_back(sub.recounts[static_cast<std::size_t>(j - 1)]);
        auto rw = rescale_weights(sub.level, f.level_sizes(), upper);
        BigInt decoded = 0;
        for (int j = sub.level; j <= L; ++j)
            decoded +=
                rw.multiplier_for(j) * BigInt(sub.recounts[static_cast<std::size_t>(j - 1)]);
        REQUIRE(decoded == sub.cost);
    }
}

TEST_CASE("interruption statuses surface from bmo runs") {
    LeveledFormula f = example2();
    BmoOptions opt;
    opt.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    REQUIRE(solve_rsc(f, opt).interrupted());
    REQUIRE(solve_ipb(f, opt).interrupted());
    REQUIRE(solve_mono(f, opt).interrupted());
}

TEST_CASE("level completion callbacks fire top-down") {
    LeveledFormula f = example2();
    std::vector<std::pair<int, std::size_t>> done;
    BmoOptions opt;
    opt.on_level_done = [&](int level, std::size_t u) { done.emplace_back(level, u); };
    auto r = solve_rsc(f, opt);
    REQUIRE(r.optimum());
    REQUIRE(done ==
            std::vector<std::pair<int, std::size_t>>{{3, 0}, {2, 0}, {1, 1}});
    done.clear();
    auto ri = solve_ipb(f, opt);
    REQUIRE(ri.optimum());
    REQUIRE(done ==
            std::vector<std::pair<int, std::size_t>>{{3, 0}, {2, 0}, {1, 1}});
}
