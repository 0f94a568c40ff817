#include "mbcascade/orientation.hpp"

#include <cmath>
#include <stdexcept>

namespace mbcascade {

Vec3 unstable_direction(const MorseBottScenario& sc, int q) {
    const AuxCriticalPoint& g = sc.point(q);
    if (g.total_index != 1)
        throw std::invalid_argument("unstable direction requested for a generator of index != 1");
    const CriticalSubmanifold& C = sc.submanifolds.at(g.host);
    Vec3 e;
    if (C.kind == SubmanifoldKind::Circle) {
        e = C.bott_index == 0 ? C.circle.unit_tangent(g.u) : circle_in_surface_normal(sc, C.id, g.u);
    } else {
        const TangentHessian H = tangential_hessian(sc.surface, sc.f, g.location);
        e = H.ambient_eigenvector(0);
        int k = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(e[i]) > std::abs(e[k]) + 1e-12) k = i;
        if (e[k] < 0.0) e = -e;
    }
    return g.orientation_tag * e.normalized();
}

namespace {

Vec3 departure(const std::vector<Vec3>& poly, double min_dist) {
    const Vec3& q = poly.front();
    for (size_t i = 1; i < poly.size(); ++i)
        if ((poly[i] - q).norm() >= min_dist) return (poly[i] - q).normalized();
    return (poly.back() - q).normalized();
}

Vec3 arrival(const std::vector<Vec3>& poly, double min_dist) {
    const Vec3& p = poly.back();
    for (size_t i = poly.size() - 1; i-- > 0;)
        if ((p - poly[i]).norm() >= min_dist) return (p - poly[i]).normalized();
    return (p - poly.front()).normalized();
}

}  // namespace

int flow_line_sign(const MorseBottScenario& sc, int q, int p, const std::vector<Vec3>& poly) {
    const AuxCriticalPoint& gq = sc.point(q);
    const AuxCriticalPoint& gp = sc.point(p);
    if (gq.total_index - gp.total_index != 1)
        throw std::invalid_argument("flow line sign needs a total index drop of one");
    if (poly.size() < 2) throw std::invalid_argument("flow line polyline too short");
    const double min_dist = 1e-4 * sc.surface.curvature_scale;

    if (gq.total_index == 1) {
        const double s = departure(poly, min_dist).dot(unstable_direction(sc, q));
        return (s >= 0.0 ? 1 : -1) * gp.orientation_tag;
    }
    if (gq.total_index != 2)
        throw std::invalid_argument("flow line sign: unsupported index on a surface");

    TangentFrame start = tangent_frame(sc.surface, poly.front());
    Vec3 t1 = start.e1;
    Vec3 t2 = gq.orientation_tag * start.e2;
    for (size_t i = 1; i < poly.size(); ++i) {
        const Vec3 n = unit_normal(sc.surface, poly[i]);
        t1 = (t1 - t1.dot(n) * n).normalized();
        t2 = t2 - t2.dot(n) * n;
        t2 = (t2 - t2.dot(t1) * t1).normalized();
    }
    const Vec3 in = arrival(poly, min_dist);
    const Vec3 ep = unstable_direction(sc, p);
    const double det = in.dot(t1) * ep.dot(t2) - in.dot(t2) * ep.dot(t1);
    return det >= 0.0 ? 1 : -1;
}

}  // namespace mbcascade
