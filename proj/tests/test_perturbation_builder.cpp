#include "mbcascade/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mbcascade;

TEST(PerturbationBuilder, BumpProfile) {
    const BumpProfile b{0.1, 0.2};
    EXPECT_EQ(b.value(0.0), 1.0);
    EXPECT_EQ(b.value(0.1), 1.0);
    EXPECT_EQ(b.value(0.2), 0.0);
    EXPECT_EQ(b.value(0.5), 0.0);
    double prev = 1.0;
    for (int i = 1; i < 100; ++i) {
        const double s = 0.1 + 0.001 * i;
        const double v = b.value(s);
        EXPECT_LT(v, prev);
        EXPECT_GE(v, 0.0);
        EXPECT_NEAR(b.derivative(s), (b.value(s + 1e-7) - b.value(s - 1e-7)) / 2e-7, 1e-6);
        prev = v;
    }
    EXPECT_NEAR(b.derivative(0.1), 0.0, 1e-14);
    EXPECT_NEAR(b.derivative(0.2), 0.0, 1e-14);
}

TEST(PerturbationBuilder, EqualsFOutsideTubesAndShiftedOnInnerTubes) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const std::string& name : catalog_names()) {
        const ScenarioConfig c = catalog_scenario(name);
        const auto& sc = c.scenario;
        const PerturbationData pd = build_h_eps(sc, c.tubes, 0.01);
        int outside = 0, inner = 0;
        for (int i = 0; i < 4000; ++i) {
            const Vec3 x = project(sc.surface, sc.surface.chart(u(rng), u(rng))).coordinates;
            int host = -1;
            double d = 1e9;
            for (size_t k = 0; k < pd.tubes.size(); ++k) {
                const double dk = sc.submanifolds[pd.tubes[k].host].normal_distance(x);
                if (dk < pd.tubes[k].outer_radius) host = static_cast<int>(k);
                d = std::min(d, dk);
            }
            if (host < 0) {
                EXPECT_EQ(pd.h_eps.value(x), sc.f.value(x)) << name;
                ++outside;
            } else if (sc.submanifolds[pd.tubes[host].host].normal_distance(x) <= pd.tubes[host].inner_radius) {
                EXPECT_NEAR(pd.h_eps.value(x) - sc.f.value(x), 0.01 * pd.extended_aux(host, x), 1e-15) << name;
                ++inner;
            }
        }
        EXPECT_GT(outside, 0) << name;
    }
}

TEST(PerturbationBuilder, ValueOnCircleIsShiftedAuxValue) {
    const ScenarioConfig c = catalog_scenario("flat-torus");
    const auto& sc = c.scenario;
    const PerturbationData pd = build_h_eps(sc, c.tubes, 0.02);
    for (double u : {0.0, 0.7, 2.0, 4.5}) {
        const Vec3 x = sc.submanifolds[0].sample(u);
        EXPECT_NEAR(pd.h_eps.value(x), sc.submanifolds[0].critical_value + 0.02 * sc.aux_value(0, u), 1e-14);
    }
}

TEST(PerturbationBuilder, ZeroEpsilonIsF) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const PerturbationData pd = build_h_eps(sc, c.tubes, 0.0);
    for (const Vec3& x : {Vec3(1, 0, 0), Vec3(0.6, 0, 0.8), Vec3(0, 0, 1)}) {
        EXPECT_EQ(pd.h_eps.value(x), sc.f.value(x));
        EXPECT_EQ(pd.h_eps.ambient_gradient(x), sc.f.ambient_gradient(x));
    }
}

TEST(PerturbationBuilder, LargeEpsilonFailsTheBoundAndSmallerPasses) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const ConditionReport big = check_smallness(build_h_eps(sc, c.tubes, 0.1), c.smallness);
    EXPECT_FALSE(big.passed);
    bool bound_failed = false;
    for (const auto& t : big.tubes) bound_failed = bound_failed || !t.eps_bound;
    EXPECT_TRUE(bound_failed);
    const ConditionReport small = check_smallness(build_h_eps(sc, c.tubes, 0.01 * 0.625), c.smallness);
    EXPECT_TRUE(small.passed) << small.first_failure;
    // the eps term is linear in eps
    EXPECT_NEAR(big.tubes[0].eps_term_sup / small.tubes[0].eps_term_sup, 0.1 / 0.00625, 1e-6);
}

TEST(PerturbationBuilder, OrthogonalityOnSphere) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const ConditionReport r = check_smallness(build_h_eps(c.scenario, c.tubes, 0.00625), c.smallness);
    for (const auto& t : r.tubes) EXPECT_LT(t.orthogonality, 1e-3);
    EXPECT_EQ(r.seed, c.smallness.seed);
}

TEST(PerturbationBuilder, ReportIsDeterministic) {
    const ScenarioConfig c = catalog_scenario("flat-torus");
    const PerturbationData pd = build_h_eps(c.scenario, c.tubes, 0.003125);
    const ConditionReport a = check_smallness(pd, c.smallness);
    const ConditionReport b = check_smallness(pd, c.smallness);
    ASSERT_EQ(a.tubes.size(), b.tubes.size());
    for (size_t k = 0; k < a.tubes.size(); ++k) {
        EXPECT_EQ(a.tubes[k].eps_term_sup, b.tubes[k].eps_term_sup);
        EXPECT_EQ(a.tubes[k].variation, b.tubes[k].variation);
    }
    EXPECT_EQ(a.min_decrement, b.min_decrement);
}

TEST(PerturbationBuilder, CriticalPointsOfHAreTheGenerators) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const CriticalSweep s = critical_points_of_h(build_h_eps(sc, c.tubes, 0.00625));
    ASSERT_EQ(s.points.size(), sc.points.size());
    for (const HCriticalPoint& p : s.points) {
        EXPECT_LT(p.offset, 1e-6);
        EXPECT_EQ(p.index, sc.point(p.generator).total_index);
    }
    EXPECT_EQ(s.points[static_cast<size_t>(sc.find_point("b"))].index, 1);
    EXPECT_EQ(s.points[static_cast<size_t>(sc.find_point("N"))].index, 2);
}

TEST(PerturbationBuilder, CriticalPointsRefuseZeroEpsilon) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    EXPECT_ANY_THROW(critical_points_of_h(build_h_eps(c.scenario, c.tubes, 0.0)));
}

TEST(PerturbationBuilder, AutoEpsilonHalvesUntilEverythingPasses) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const EpsilonChoice ch = auto_epsilon(c.scenario, c.tubes, {}, 0.1, 20, c.smallness);
    EXPECT_TRUE(ch.conditions.passed);
    EXPECT_EQ(ch.epsilon, 0.1 * std::ldexp(1.0, -ch.halvings));
    EXPECT_EQ(ch.rejected.size(), static_cast<size_t>(ch.halvings));
    EXPECT_THROW(auto_epsilon(c.scenario, c.tubes, [](const PerturbationData&) { return false; }, 0.1, 3, c.smallness),
                 EpsilonNotFound);
}
