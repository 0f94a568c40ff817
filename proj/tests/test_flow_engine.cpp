#include "mbcascade/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mbcascade;

TEST(FlowEngine, MeridianFlowReachesSouthPole) {
    const ScenarioConfig c = catalog_scenario("sphere-z");
    StopRule stop;
    const Trajectory t = integrate(c.scenario.surface, c.scenario.f, Vec3(1, 0, 0), stop);
    EXPECT_EQ(t.status, TerminalStatus::Converged);
    EXPECT_LT((t.points.back() - Vec3(0, 0, -1)).norm(), 1e-6);
}

TEST(FlowEngine, ZSquaredDescentKeepsLongitude) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const FlowContext ctx(c.scenario);
    const Trajectory t = flow_to_landing(ctx, Vec3(std::sin(0.1), 0, std::cos(0.1)));
    const Landing L = classify_landing(ctx, t);
    EXPECT_EQ(L.kind, LandingKind::Circle);
    EXPECT_LT(std::abs(angle_difference(L.u, 0.0)), 1e-6);
    EXPECT_LT((L.location - Vec3(1, 0, 0)).norm(), 1e-6);
}

TEST(FlowEngine, CriticalStartConvergesImmediately) {
    const ScenarioConfig c = catalog_scenario("sphere-z");
    const Trajectory t = integrate(c.scenario.surface, c.scenario.f, Vec3(0, 0, 1), StopRule{});
    EXPECT_EQ(t.status, TerminalStatus::Converged);
    EXPECT_EQ(t.points.size(), 1u);
}

TEST(FlowEngine, EnergyDecreasesAndPointsStayOnSurface) {
    for (const std::string& name : catalog_names()) {
        const ScenarioConfig c = catalog_scenario(name);
        const auto& sc = c.scenario;
        const FlowContext ctx(sc);
        for (double s : {0.13, 0.41, 0.77}) {
            const Vec3 x0 = project(sc.surface, sc.surface.chart(s, 0.29)).coordinates;
            const Trajectory t = flow_to_landing(ctx, x0);
            for (size_t i = 0; i + 1 < t.points.size(); ++i)
                EXPECT_LE(sc.f.value(t.points[i + 1]), sc.f.value(t.points[i]) + 1e-10) << name;
            for (const Vec3& x : t.points) EXPECT_LT(std::abs(sc.surface.implicit_function(x)), 1e-9) << name;
        }
    }
}

TEST(FlowEngine, UnstableSeedsAtPole) {
    const ScenarioConfig c = catalog_scenario("sphere-z");
    const auto seeds = unstable_seeds(c.scenario, c.scenario.f, Vec3(0, 0, 1), 2, 1e-3, 64);
    ASSERT_EQ(seeds.size(), 64u);
    for (const Vec3& x : seeds) {
        EXPECT_NEAR((x - Vec3(0, 0, 1)).norm(), 1e-3, 1e-6);
        EXPECT_NEAR(x.norm(), 1.0, 1e-10);
    }
}

TEST(FlowEngine, UnstableSeedsAtSaddleAreAntipodal) {
    const ScenarioConfig c = catalog_scenario("upright-torus");
    const auto& sc = c.scenario;
    const Vec3 upper = sc.point(sc.find_point("upper")).location;
    const auto seeds = unstable_seeds(sc, sc.f, upper, 1, 1e-3, 2);
    ASSERT_EQ(seeds.size(), 2u);
    EXPECT_LT(((seeds[0] - upper) + (seeds[1] - upper)).norm(), 1e-6);
}

TEST(FlowEngine, NormalSeedsOfAttractingCircleMismatch) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    EXPECT_THROW(unstable_seeds(c.scenario, c.scenario.f, Vec3(1, 0, 0), 1, 1e-3, 2, SeedMode::Normal, 2),
                 IndexMismatch);
}

TEST(FlowEngine, SaddleToMinimumOnUprightTorusHasTwoOrbits) {
    const ScenarioConfig c = catalog_scenario("upright-torus");
    const auto& sc = c.scenario;
    const int q = sc.find_point("lower"), p = sc.find_point("bottom");
    FlowContext ctx(sc);
    ctx.source_submanifold = sc.point(q).host;
    const auto target = [p](const Landing& L) { return L.destination == p; };
    int total = 0;
    for (const SeedFamily& fam : morse_seed_families(sc, sc.f, q, 1e-3))
        total += static_cast<int>(shoot_connecting_orbits(ctx, fam, target).results.size());
    EXPECT_EQ(total, 2);
}

TEST(FlowEngine, ContinuumFlaggedForIndexGapTwo) {
    const ScenarioConfig c = catalog_scenario("sphere-z");
    const auto& sc = c.scenario;
    const int q = sc.find_point("N"), p = sc.find_point("S");
    FlowContext ctx(sc);
    ctx.source_submanifold = sc.point(q).host;
    const auto fams = morse_seed_families(sc, sc.f, q, 1e-3);
    ASSERT_EQ(fams.size(), 1u);
    const ShootOutcome o = shoot_connecting_orbits(ctx, fams[0], [p](const Landing& L) { return L.destination == p; });
    EXPECT_TRUE(o.continuum);
}

TEST(FlowEngine, EmptyFamilyGivesNothing) {
    const ScenarioConfig c = catalog_scenario("sphere-z");
    const FlowContext ctx(c.scenario);
    SeedFamily empty;
    empty.at = [](double) { return SeedPoint{}; };
    empty.lo = empty.hi = 0.0;
    ShootSettings s;
    s.samples = 0;
    const ShootOutcome o = shoot_connecting_orbits(ctx, empty, [](const Landing&) { return true; }, s);
    EXPECT_TRUE(o.results.empty());
}

TEST(FlowEngine, ShootingResultsAreSortedAndSeparated) {
    const ScenarioConfig c = catalog_scenario("upright-torus");
    const auto& sc = c.scenario;
    const int q = sc.find_point("top");
    FlowContext ctx(sc);
    ctx.source_submanifold = sc.point(q).host;
    const auto fams = morse_seed_families(sc, sc.f, q, 1e-3);
    const ShootOutcome o = shoot_connecting_orbits(ctx, fams[0], [](const Landing& L) { return L.isolated; });
    ASSERT_GE(o.results.size(), 2u);
    for (size_t i = 0; i + 1 < o.results.size(); ++i)
        EXPECT_GT(o.results[i + 1].parameter - o.results[i].parameter, 10 * 1e-12);
}

TEST(FlowEngine, BackwardFlowReturnsToSeedCircle) {
    // reverse the field from just before the landing of an isolated orbit
    const ScenarioConfig c = catalog_scenario("upright-torus");
    const auto& sc = c.scenario;
    const int q = sc.find_point("lower"), p = sc.find_point("bottom");
    FlowContext ctx(sc);
    ctx.source_submanifold = sc.point(q).host;
    const auto fams = morse_seed_families(sc, sc.f, q, 1e-3);
    const Vec3 base = sc.point(q).location;
    for (const SeedFamily& fam : fams) {
        const ShootOutcome o = shoot_connecting_orbits(ctx, fam, [p](const Landing& L) { return L.destination == p; });
        for (const ShootResult& r : o.results) {
            const auto& P = r.trajectory.points;
            const Vec3 late = P[P.size() * 3 / 4];
            StopRule back;
            back.capture = [&](const Vec3& x) { return (x - base).norm() <= 1e-3; };
            back.gradient_tol = 1e-14;
            const Trajectory t = integrate(sc.surface, sc.f, late, back, {}, +1.0);
            double closest = 1e9;
            for (const Vec3& x : t.points) closest = std::min(closest, (x - base).norm());
            EXPECT_LT(closest, 1e-3 + 1e-4);
        }
    }
}

TEST(FlowEngine, CompletedPathStartsAndEndsAtGenerators) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const CascadeEnumeration ce = enumerate_cascades(sc, sc.find_point("N"), sc.find_point("b"));
    ASSERT_EQ(ce.cascades.size(), 1u);
    const auto& poly = ce.cascades[0].polyline;
    EXPECT_LT((poly.front() - Vec3(0, 0, 1)).norm(), 1e-9);
    EXPECT_LT((poly.back() - Vec3(1, 0, 0)).norm(), 1e-6);
    for (size_t i = 0; i + 1 < poly.size(); ++i) EXPECT_LE((poly[i + 1] - poly[i]).norm(), 1e-3 + 1e-9);
}
