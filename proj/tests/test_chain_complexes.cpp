#include "mbcascade/chain_complexes.hpp"
#include "mbcascade/scenario.hpp"
#include "oracles/snf_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mbcascade;

namespace {

IntMatrix random_matrix(std::mt19937& rng, int rows, int cols, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    IntMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
    return m;
}

GradedComplex manual(Ring ring, std::vector<std::vector<int>> gens, std::vector<IntMatrix> bd) {
    GradedComplex c;
    c.ring = ring;
    c.generators = std::move(gens);
    c.boundary = std::move(bd);
    return c;
}

}  // namespace

TEST(ChainComplexes, SmithFormAgreesWithBothOracles) {
    std::mt19937 rng(17);
    for (int t = 0; t < 1200; ++t) {
        const IntMatrix m = random_matrix(rng, 4, 4, -3, 3);
        const SmithForm s = smith_normal_form(m);
        const auto det = oracle::determinantal_factors(m);
        const auto ele = oracle::elementary_factors(m);
        ASSERT_EQ(s.diagonal, det) << m;
        ASSERT_EQ(s.diagonal, ele) << m;
        ASSERT_EQ(s.rank, static_cast<int>(det.size()));
    }
}

TEST(ChainComplexes, SmithFormOnRectangularAndRankDeficient) {
    std::mt19937 rng(3);
    for (int t = 0; t < 300; ++t) {
        const int r = 1 + t % 4, c = 1 + (t / 4) % 5;
        IntMatrix m = random_matrix(rng, r, c, -4, 4);
        if (c > 1) m.col(c - 1) = 2 * m.col(0);
        const SmithForm s = smith_normal_form(m);
        ASSERT_EQ(s.diagonal, oracle::determinantal_factors(m)) << m;
        for (size_t i = 1; i < s.diagonal.size(); ++i) EXPECT_EQ(s.diagonal[i] % s.diagonal[i - 1], 0);
    }
    IntMatrix two(1, 1);
    two << -2;
    EXPECT_EQ(smith_normal_form(two).diagonal, std::vector<long long>{2});
    EXPECT_EQ(smith_normal_form(IntMatrix::Zero(3, 2)).rank, 0);
    EXPECT_EQ(smith_normal_form(IntMatrix::Zero(0, 3)).rank, 0);
}

TEST(ChainComplexes, RankModTwoAgreesWithBruteForce) {
    std::mt19937 rng(29);
    for (int t = 0; t < 1000; ++t) {
        const int r = 1 + t % 5, c = 1 + (t / 5) % 6;
        const IntMatrix m = random_matrix(rng, r, c, -3, 3);
        ASSERT_EQ(rank_mod2(m), oracle::rank_mod2_bruteforce(m)) << m;
    }
}

TEST(ChainComplexes, ZeroBoundaryTorusHomology) {
    const GradedComplex c = manual(Ring::Z, {{0}, {1, 2}, {3}},
                                   {IntMatrix::Zero(0, 1), IntMatrix::Zero(1, 2), IntMatrix::Zero(2, 1)});
    const HomologyResult h = homology(c);
    EXPECT_EQ(h.betti, (std::vector<int>{1, 2, 1}));
    EXPECT_EQ(h.euler_characteristic(), 0);
}

TEST(ChainComplexes, CircleAndTorsion) {
    IntMatrix d1(1, 1);
    d1 << 0;
    EXPECT_EQ(homology(manual(Ring::Z, {{0}, {1}}, {IntMatrix::Zero(0, 1), d1})).betti, (std::vector<int>{1, 1}));
    d1 << 2;
    const HomologyResult z = homology(manual(Ring::Z, {{0}, {1}}, {IntMatrix::Zero(0, 1), d1}));
    EXPECT_EQ(z.betti, (std::vector<int>{0, 0}));
    EXPECT_EQ(z.torsion[0], std::vector<long long>{2});
    const HomologyResult z2 = homology(manual(Ring::Z2, {{0}, {1}}, {IntMatrix::Zero(0, 1), d1}));
    EXPECT_EQ(z2.betti, (std::vector<int>{1, 1}));
}

TEST(ChainComplexes, SphereWithEquatorOverZ2) {
    const ScenarioConfig cfg = catalog_scenario("sphere-z2");
    const auto& sc = cfg.scenario;
    const int N = sc.find_point("N"), S = sc.find_point("S"), b = sc.find_point("b"), a = sc.find_point("a");
    const CountTable counts{{{N, b}, 1}, {{S, b}, 1}, {{b, a}, 2}};
    const GradedComplex c = assemble(sc, counts, Ring::Z2);
    ASSERT_EQ(c.boundary.size(), 3u);
    EXPECT_EQ(c.boundary[2], IntMatrix::Ones(1, 2));
    EXPECT_EQ(c.boundary[1], IntMatrix::Zero(1, 1));
    EXPECT_EQ(homology(c).betti, (std::vector<int>{1, 0, 1}));
}

TEST(ChainComplexes, DSquaredNonzeroNamesDegreeAndColumn) {
    const ScenarioConfig cfg = catalog_scenario("sphere-z2");
    const auto& sc = cfg.scenario;
    const int N = sc.find_point("N"), S = sc.find_point("S"), b = sc.find_point("b"), a = sc.find_point("a");
    const CountTable counts{{{N, b}, 1}, {{S, b}, -1}, {{b, a}, 1}};
    try {
        assemble(sc, counts, Ring::Z);
        FAIL() << "expected DSquaredNonzero";
    } catch (const DSquaredNonzero& e) {
        EXPECT_EQ(e.degree, 2);
        EXPECT_EQ(e.column, 0);
    }
    // same counts mod 2 still fail: 1 * 1 is odd
    EXPECT_THROW(assemble(sc, counts, Ring::Z2), DSquaredNonzero);
    EXPECT_NO_THROW(assemble(sc, {{{N, b}, 1}, {{S, b}, -1}, {{b, a}, 0}}, Ring::Z));
}

TEST(ChainComplexes, AdjacentPairsDropOneDegree) {
    const ScenarioConfig cfg = catalog_scenario("flat-torus");
    const auto& sc = cfg.scenario;
    const auto pairs = adjacent_pairs(sc);
    EXPECT_EQ(pairs.size(), 4u);
    for (const auto& [q, p] : pairs) EXPECT_EQ(sc.point(q).total_index, sc.point(p).total_index + 1);
}

TEST(ChainComplexes, PerturbedCountSphere) {
    const ScenarioConfig cfg = catalog_scenario("sphere-z2");
    const auto& sc = cfg.scenario;
    const PerturbationData pd = build_h_eps(sc, cfg.tubes, 0.00625);
    const long long n = signed_count_h_eps(pd, sc.find_point("N"), sc.find_point("b"), cfg.cascade);
    EXPECT_EQ(std::llabs(n), 1);
    EXPECT_EQ(signed_count_h_eps(pd, sc.find_point("b"), sc.find_point("a"), cfg.cascade), 0);
}

TEST(ChainComplexes, CascadeCountModTwo) {
    const ScenarioConfig cfg = catalog_scenario("sphere-z2");
    const auto& sc = cfg.scenario;
    EXPECT_EQ(cascade_count_z2(sc, sc.find_point("N"), sc.find_point("b"), cfg.cascade), 1);
    EXPECT_EQ(cascade_count_z2(sc, sc.find_point("b"), sc.find_point("a"), cfg.cascade), 0);
}

TEST(ChainComplexes, SignedCascadeCountNeedsEverySign) {
    EXPECT_EQ(cascade_count_z({1, -1, 1}), 1);
    EXPECT_EQ(cascade_count_z({}), 0);
    EXPECT_THROW(cascade_count_z({1, std::nullopt}), MatchIncomplete);
}
