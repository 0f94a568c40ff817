#include "mbcascade/correspondence_checker.hpp"
#include "mbcascade/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace mbcascade;

namespace {

constexpr double kEps = 0.00625;

struct SphereZ2 : ::testing::Test {
    ScenarioConfig cfg = catalog_scenario("sphere-z2");
    const MorseBottScenario& sc() const { return cfg.scenario; }
    int id(const char* label) const { return sc().find_point(label); }
};

}  // namespace

TEST_F(SphereZ2, MatchPoleToSaddle) {
    const MatchReport m = match_moduli(sc(), cfg.tubes, id("N"), id("b"), kEps, cfg.cascade);
    EXPECT_TRUE(m.passed) << m.reason;
    EXPECT_EQ(m.cascade_count, 1);
    EXPECT_EQ(m.flow_count, 1);
    ASSERT_EQ(m.distances.size(), 1u);
    EXPECT_LT(m.distances[0], 1e-2 * sc().surface.diameter);
    EXPECT_TRUE(std::isinf(m.threshold));
    EXPECT_EQ(m.signed_count_cascades, -m.signed_count_h);
    EXPECT_TRUE(m.path_signs_agree);
}

TEST_F(SphereZ2, MatchSaddleToMinimum) {
    const MatchReport m = match_moduli(sc(), cfg.tubes, id("b"), id("a"), kEps, cfg.cascade);
    EXPECT_TRUE(m.passed) << m.reason;
    EXPECT_EQ(m.cascade_count, 2);
    EXPECT_EQ(m.flow_count, 2);
    EXPECT_EQ(m.signed_count_h, 0);
    ASSERT_EQ(m.matching.size(), 2u);
    EXPECT_NE(m.matching[0].second, m.matching[1].second);
    for (size_t k = 0; k < m.distances.size(); ++k) {
        EXPECT_LT(m.distances[k], m.threshold);
        EXPECT_GT(m.second_best[k], 2.0 * m.distances[k]);
    }
    EXPECT_EQ(cascade_count_z(m.cascade_signs), m.signed_count_cascades);
}

TEST_F(SphereZ2, OversizedEpsilonIsRefused) {
    EXPECT_THROW(match_moduli(sc(), cfg.tubes, id("N"), id("b"), 0.5, cfg.cascade), PreconditionFailed);
}

TEST_F(SphereZ2, CountMismatchCarriesTheReport) {
    const CascadeEnumeration ce = enumerate_cascades(sc(), id("b"), id("a"), cfg.cascade);
    HFlowEnumeration he;
    he.q = id("b");
    he.p = id("a");
    he.epsilon = kEps;
    try {
        match_moduli(sc(), ce, he);
        FAIL() << "expected CountMismatch";
    } catch (const CountMismatch& e) {
        EXPECT_EQ(e.report.cascade_count, 2);
        EXPECT_EQ(e.report.flow_count, 0);
        EXPECT_EQ(e.report.unmatched_cascades.size(), 2u);
        EXPECT_FALSE(e.report.passed);
    }
}

TEST(Correspondence, GeometricSchedule) {
    const auto s = geometric_schedule(0.01, 7, 2.0);
    ASSERT_EQ(s.size(), 7u);
    EXPECT_DOUBLE_EQ(s.front(), 0.01);
    EXPECT_NEAR(s.back(), 1e-4, 1e-18);
    for (size_t k = 1; k < s.size(); ++k) EXPECT_NEAR(s[k - 1] / s[k], std::pow(10.0, 1.0 / 3.0), 1e-12);
    EXPECT_EQ(geometric_schedule(0.02, 1), std::vector<double>{0.02});
}

TEST_F(SphereZ2, SingleEntrySweep) {
    const SweepReport r = eps_sweep(sc(), cfg.tubes, id("N"), id("b"), {kEps}, cfg.cascade);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_TRUE(r.passed);
    EXPECT_TRUE(r.counts_constant);
    EXPECT_TRUE(r.sign_relation);
    ASSERT_EQ(r.ratios.size(), 1u);
    EXPECT_EQ(r.ratios[0], 1.0);
}

TEST_F(SphereZ2, SweepKeepsCountsAndWritesCsv) {
    const auto schedule = geometric_schedule(kEps, 7, 2.0);
    const SweepReport r = eps_sweep(sc(), cfg.tubes, id("b"), id("a"), schedule, cfg.cascade);
    ASSERT_EQ(r.rows.size(), 7u);
    EXPECT_TRUE(r.counts_constant);
    EXPECT_TRUE(r.signs_constant);
    EXPECT_TRUE(r.sign_relation);
    for (const SweepRow& row : r.rows) {
        EXPECT_EQ(row.flow_count, 2);
        EXPECT_EQ(row.distances.size(), 2u);
    }
    const auto path = std::filesystem::temp_directory_path() / "mbcascade_sweep_test.csv";
    write_sweep_csv(r, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "epsilon,flow_count,signed_count,d_H_0,d_H_1");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 7);
    std::filesystem::remove(path);
}
