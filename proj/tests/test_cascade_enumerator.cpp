#include "mbcascade/chain_complexes.hpp"
#include "mbcascade/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace mbcascade;

namespace {

size_t count(const std::string& scenario, const std::string& q, const std::string& p) {
    const ScenarioConfig c = catalog_scenario(scenario);
    const auto& sc = c.scenario;
    return enumerate_cascades(sc, sc.find_point(q), sc.find_point(p), c.cascade).cascades.size();
}

}  // namespace

TEST(CascadeEnumerator, SphereZSquaredMeridian) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const CascadeEnumeration e = enumerate_cascades(sc, sc.find_point("N"), sc.find_point("b"), c.cascade);
    ASSERT_EQ(e.cascades.size(), 1u);
    const CascadeFlowLine& l = e.cascades[0];
    EXPECT_EQ(l.n, 1);
    // the meridian through b stays in the plane y = 0
    for (const Vec3& x : l.polyline) EXPECT_LT(std::abs(x[1]), 1e-6);
}

TEST(CascadeEnumerator, SphereZSquaredEquatorArcs) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const CascadeEnumeration e = enumerate_cascades(sc, sc.find_point("b"), sc.find_point("a"), c.cascade);
    ASSERT_EQ(e.cascades.size(), 2u);
    for (const auto& l : e.cascades) EXPECT_EQ(l.n, 0);
    EXPECT_EQ(e.cascades[0].path_sign, -e.cascades[1].path_sign);
}

TEST(CascadeEnumerator, CatalogCountsRegression) {
    EXPECT_EQ(count("sphere-z2", "S", "b"), 1u);
    EXPECT_EQ(count("sphere-skew", "N", "b"), 1u);
    EXPECT_EQ(count("flat-torus", "d", "b"), 2u);
    EXPECT_EQ(count("flat-torus", "d", "c"), 2u);
    EXPECT_EQ(count("flat-torus", "c", "a"), 2u);
    EXPECT_EQ(count("flat-torus", "b", "a"), 2u);
    EXPECT_EQ(count("upright-torus", "top", "upper"), 2u);
    EXPECT_EQ(count("upright-torus", "top", "lower"), 0u);
    EXPECT_EQ(count("upright-torus", "upper", "bottom"), 0u);
    EXPECT_EQ(count("upright-torus", "lower", "bottom"), 2u);
}

TEST(CascadeEnumerator, FlatTorusCascadesHaveOneSegment) {
    const ScenarioConfig c = catalog_scenario("flat-torus");
    const auto& sc = c.scenario;
    const CascadeEnumeration e = enumerate_cascades(sc, sc.find_point("d"), sc.find_point("b"), c.cascade);
    for (const auto& l : e.cascades) {
        EXPECT_EQ(l.n, 1);
        EXPECT_EQ(l.cascades.size(), 1u);
    }
}

TEST(CascadeEnumerator, IndexGapTwoIsAContinuum) {
    ScenarioConfig c = catalog_scenario("sphere-z");
    const auto& sc = c.scenario;
    c.cascade.allow_index_gap = true;
    EXPECT_THROW(enumerate_cascades(sc, sc.find_point("N"), sc.find_point("S"), c.cascade), ContinuumDetected);
}

TEST(CascadeEnumerator, IndexGapIsRejectedByDefault) {
    const ScenarioConfig c = catalog_scenario("sphere-z");
    const auto& sc = c.scenario;
    EXPECT_ANY_THROW(enumerate_cascades(sc, sc.find_point("N"), sc.find_point("S"), c.cascade));
}

TEST(CascadeEnumerator, LinkingInvariantsHold) {
    for (const std::string& name : catalog_names()) {
        const ScenarioConfig c = catalog_scenario(name);
        const auto& sc = c.scenario;
        for (auto [q, p] : adjacent_pairs(sc))
            for (const auto& l : enumerate_cascades(sc, q, p, c.cascade).cascades) {
                const LinkCheck k = check_links(sc, l, 1e-4);
                EXPECT_TRUE(k.passed) << name << " " << sc.point(q).label << "->" << sc.point(p).label
                                      << " source " << k.source_gap << " target " << k.target_gap;
                EXPECT_TRUE(k.nonconstant);
            }
    }
}

TEST(CascadeEnumerator, RefinementKeepsCountsAndImages) {
    for (const std::string& name : {"sphere-skew", "flat-torus", "upright-torus"}) {
        const ScenarioConfig c = catalog_scenario(name);
        const auto& sc = c.scenario;
        CascadeSettings fine = c.cascade;
        fine.samples *= 2;
        fine.ode.rtol *= 0.5;
        fine.ode.atol *= 0.5;
        for (auto [q, p] : adjacent_pairs(sc)) {
            const auto a = enumerate_cascades(sc, q, p, c.cascade);
            const auto b = enumerate_cascades(sc, q, p, fine);
            ASSERT_EQ(a.cascades.size(), b.cascades.size()) << name;
            for (size_t k = 0; k < a.cascades.size(); ++k) {
                const double d = image_distance(image_of(sc, a.cascades[k], 1e-3), image_of(sc, b.cascades[k], 1e-3));
                EXPECT_LT(d, 1e-3) << name;
            }
        }
    }
}

TEST(CascadeEnumerator, ImageOfSingleCascadeHasZeroTimes) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    const auto e = enumerate_cascades(sc, sc.find_point("N"), sc.find_point("b"), c.cascade);
    const CascadeImage im = image_of(sc, e.cascades.at(0), 1e-3);
    ASSERT_EQ(im.time_vector.size(), sc.submanifolds.size());
    for (double t : im.time_vector) EXPECT_EQ(t, 0.0);
    EXPECT_GT(im.points.size(), 100u);
}

TEST(CascadeEnumerator, HybridFlowCases) {
    const ScenarioConfig c = catalog_scenario("sphere-z2");
    const auto& sc = c.scenario;
    // on the equator: drift toward the minimum of the auxiliary function at u = pi
    const Vec3 x = Vec3(std::cos(1.0), std::sin(1.0), 0.0);
    const Vec3 y = hybrid_flow(sc, x, 1.0);
    EXPECT_NEAR(y[2], 0.0, 1e-12);
    EXPECT_GT(std::atan2(y[1], y[0]), 1.0);
    EXPECT_NEAR(std::atan2(y[1], y[0]), drift_on_circle(sc, 2, 1.0, 1.0), 1e-9);
    // off the critical set: the ordinary flow lowers z^2
    const Vec3 z0 = Vec3(std::sin(0.5), 0.0, std::cos(0.5));
    const Vec3 z1 = hybrid_flow(sc, z0, 0.1);
    EXPECT_LT(sc.f.value(z1), sc.f.value(z0));
    // fixed point
    const Vec3 a = sc.point(sc.find_point("a")).location;
    EXPECT_LT((hybrid_flow(sc, a, 5.0) - a).norm(), 1e-12);
}

TEST(CascadeEnumerator, Compactify) {
    EXPECT_EQ(compactify(0.0), 0.0);
    EXPECT_EQ(compactify(std::numeric_limits<double>::infinity()), 1.0);
    EXPECT_NEAR(compactify(1.0), 1.0 / std::sqrt(2.0), 1e-15);
}
