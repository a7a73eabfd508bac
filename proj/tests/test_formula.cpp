#include <catch2/catch_amalgamated.hpp>

#include "bmo/formula.hpp"

using namespace bmo;

TEST_CASE("normalize_clause sorts, dedups, detects tautology") {
    auto c = normalize_clause({pos(3), neg(1), pos(3), pos(2)});
    REQUIRE(c.has_value());
    REQUIRE(c->lits == std::vector<Lit>{neg(1), pos(2), pos(3)});
    REQUIRE_FALSE(normalize_clause({pos(1), neg(1)}).has_value());
    REQUIRE_THROWS_AS(normalize_clause({}), EmptyClauseError);
}

TEST_CASE("minimal_weights recurrence") {
    auto [w, top] = minimal_weights({3, 1, 1});
    REQUIRE(w == std::vector<BigInt>{1, 4, 8});
    REQUIRE(top == 16);

    auto [w2, top2] = minimal_weights({});
    REQUIRE(w2.empty());
    REQUIRE(top2 == 1);

    auto [w3, top3] = minimal_weights({5});
    REQUIRE(w3 == std::vector<BigInt>{1});
    REQUIRE(top3 == 6);
}

TEST_CASE("minimal weights grow past 64 bits with enough levels") {
    // each level of 3 clauses roughly quadruples the next weight, so a
    // deep hierarchy needs arbitrary precision even at toy clause counts
    std::vector<std::size_t> sizes(35, 3);
    auto [w, top] = minimal_weights(sizes);
    REQUIRE(boost::multiprecision::msb(w.back()) + 1 > 64);
    REQUIRE(boost::multiprecision::msb(top) + 1 > 64);
    // and the stratified formula they induce is still a valid hierarchy
    std::vector<WeightedClause> flat;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        for (std::size_t k = 0; k < sizes[i]; ++k)
            flat.push_back(WeightedClause::soft(Clause({pos(static_cast<Var>(i + 1))}), w[i]));
    LeveledFormula f = stratify(flat);
    REQUIRE(f.num_levels() == 35);
    REQUIRE(f.hard_threshold() == top);
}

TEST_CASE("stratify groups by weight and checks dominance") {
    std::vector<WeightedClause> cs = {
        WeightedClause::make_hard(Clause({pos(1), pos(2)})),
        WeightedClause::soft(Clause({pos(1)}), 8),
        WeightedClause::soft(Clause({pos(2)}), 4),
        WeightedClause::soft(Clause({neg(3)}), 1),
        WeightedClause::soft(Clause({neg(4)}), 1),
        WeightedClause::soft(Clause({neg(5)}), 1),
    };
    LeveledFormula f = stratify(cs, 5);
    REQUIRE(f.num_vars == 5);
    REQUIRE(f.hard.size() == 1);
    REQUIRE(f.num_levels() == 3);
    REQUIRE(f.levels[0].weight == 1);
    REQUIRE(f.levels[0].clauses.size() == 3);
    REQUIRE(f.levels[2].weight == 8);
    REQUIRE(f.total_soft_weight() == 15);
    REQUIRE(f.hard_threshold() == 16);

    SECTION("non-dominant weights are rejected with the level index") {
        cs[1].weight = 6;  // 6 <= 1*3 + 4*1
        try {
            stratify(cs);
            FAIL("expected NotBmoError");
        } catch (const NotBmoError& e) {
            REQUIRE(e.level == 3);
        }
    }
    SECTION("explicit hard weight must dominate the soft total") {
        BigInt top = 15;
        REQUIRE_THROWS_AS(stratify(cs, 5, &top), NotBmoError);
        top = 16;
        REQUIRE_NOTHROW(stratify(cs, 5, &top));
    }
    SECTION("tautological hard is dropped, tautological soft rejected") {
        cs.push_back(WeightedClause::make_hard(Clause({pos(9), neg(9)})));
        REQUIRE(stratify(cs).hard.size() == 1);
        cs.push_back(WeightedClause::soft(Clause({pos(9), neg(9)}), 1));
        REQUIRE_THROWS_AS(stratify(cs), TautologicalSoftError);
    }
    SECTION("non-positive soft weight rejected") {
        cs[1].weight = 0;
        REQUIRE_THROWS_AS(stratify(cs), Error);
    }
}

TEST_CASE("flatten inverts stratify") {
    std::vector<WeightedClause> cs = {
        WeightedClause::make_hard(Clause({pos(1), pos(2)})),
        WeightedClause::soft(Clause({pos(1)}), 8),
        WeightedClause::soft(Clause({pos(2)}), 4),
        WeightedClause::soft(Clause({neg(3)}), 1),
    };
    LeveledFormula f = stratify(cs, 3);
    std::vector<WeightedClause> flat = flatten(f);
    REQUIRE(flat.size() == 4);
    REQUIRE(flat[0].hard);
    REQUIRE(flat[1].weight == 8);  // strongest level right after the hards
    REQUIRE(flat[3].weight == 1);
    LeveledFormula f2 = stratify(flat, 3);
    REQUIRE(f2.level_sizes() == f.level_sizes());
    REQUIRE(f2.hard.size() == f.hard.size());
    for (int i = 0; i < f.num_levels(); ++i)
        REQUIRE(f2.levels[static_cast<std::size_t>(i)].weight ==
                f.levels[static_cast<std::size_t>(i)].weight);
}

TEST_CASE("objective and falsified weight decompositions") {
    std::vector<WeightedClause> cs = {
        WeightedClause::soft(Clause({pos(1)}), 8),
        WeightedClause::soft(Clause({pos(2)}), 4),
        WeightedClause::soft(Clause({neg(3)}), 1),
        WeightedClause::soft(Clause({neg(4)}), 1),
        WeightedClause::soft(Clause({neg(5)}), 1),
    };
    LeveledFormula f = stratify(cs, 5);
    std::vector<std::size_t> u = {1, 0, 0};
    REQUIRE(objective_value(f, u) == 14);
    REQUIRE(falsified_weight(f, u) == 1);
    REQUIRE(objective_value(f, u) + falsified_weight(f, u) == f.total_soft_weight());
}

TEST_CASE("model basics") {
    Model m(std::vector<bool>{true, false, true});
    REQUIRE(m.value(1));
    REQUIRE_FALSE(m.value(2));
    REQUIRE(m.satisfies(pos(1)));
    REQUIRE(m.satisfies(neg(2)));
    REQUIRE(m.satisfies(Clause({neg(1), pos(3)})));
    REQUIRE_FALSE(m.satisfies(Clause({neg(1), pos(2)})));
    REQUIRE(Model::all_false(4).num_vars() == 4);
    REQUIRE_FALSE(Model::all_false(4).value(3));
    Model p = m.project(2);
    REQUIRE(p.num_vars() == 2);
    REQUIRE(p.value(1));
}
