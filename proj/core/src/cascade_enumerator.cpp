#include "mbcascade/cascade_enumerator.hpp"

#include "mbcascade/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbcascade {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

double chord(const CircleGeometry& c, double du) {
    return 2.0 * c.radius * std::abs(std::sin(0.5 * du));
}

double drift_rate(const MorseBottScenario& sc, int j, double u) {
    const CriticalSubmanifold& C = sc.submanifolds[j];
    return -C.aux.function.d1(u) / (C.circle.radius * C.circle.radius);
}

// RK4 drift; returns the end parameter and the closest approach to `target_u`.
std::pair<double, double> drift_with_gap(const MorseBottScenario& sc, int j, double u, double t,
                                         double target_u) {
    const CircleGeometry& c = sc.submanifolds[j].circle;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / 0.01)));
    const double h = t / n;
    double gap = chord(c, u - target_u);
    for (int i = 0; i < n; ++i) {
        const double k1 = drift_rate(sc, j, u);
        const double k2 = drift_rate(sc, j, u + 0.5 * h * k1);
        const double k3 = drift_rate(sc, j, u + 0.5 * h * k2);
        const double k4 = drift_rate(sc, j, u + h * k3);
        u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        gap = std::min(gap, chord(c, u - target_u));
    }
    return {u, gap};
}

SeedPoint seed_at(const SurfaceModel& s, const Vec3& base, const Vec3& x) {
    return SeedPoint{project(s, x).coordinates, base};
}

}  // namespace

double drift_on_circle(const MorseBottScenario& sc, int j, double u, double t) {
    if (sc.submanifolds.at(j).kind != SubmanifoldKind::Circle)
        throw std::invalid_argument("drift_on_circle needs a circle");
    return wrap_angle(drift_with_gap(sc, j, u, t, u).first);
}

Vec3 hybrid_flow(const MorseBottScenario& sc, const Vec3& x, double t, double capture_tol) {
    const double tol = capture_tol * sc.surface.curvature_scale;
    for (const CriticalSubmanifold& C : sc.submanifolds) {
        if (C.normal_distance(x) >= tol) continue;
        if (C.kind == SubmanifoldKind::Point) return x;
        return C.circle.point(drift_on_circle(sc, C.id, C.parameter_of(x), t));
    }
    StopRule stop;
    stop.gradient_tol = 1e-14;
    stop.time_budget = t;
    const Trajectory tr = integrate(sc.surface, sc.f, x, stop);
    return tr.points.back();
}

std::vector<SeedFamily> cascade_seed_families(const MorseBottScenario& sc, int q, double delta) {
    const AuxCriticalPoint& g = sc.point(q);
    const CriticalSubmanifold& C = sc.host_of(q);
    const SurfaceModel& s = sc.surface;
    std::vector<SeedFamily> out;
    if (C.kind == SubmanifoldKind::Point) {
        const TangentHessian H = tangential_hessian(s, sc.f, C.point);
        const int idx = H.index(0.0);
        if (idx != C.bott_index) throw IndexMismatch("normal index differs from the declared index at " + C.name);
        const Vec3 base = C.point;
        if (idx == 2) {
            SeedFamily f;
            f.periodic = true;
            f.lo = 0.0;
            f.hi = kTwoPi;
            f.label = "circle";
            const TangentFrame fr = H.frame;
            f.at = [&s, base, fr, delta](double th) {
                return seed_at(s, base, base + delta * (std::cos(th) * fr.e1 + std::sin(th) * fr.e2));
            };
            out.push_back(std::move(f));
        } else if (idx == 1) {
            SeedFamily f;
            f.discrete = {1.0, -1.0};
            f.label = "pair";
            const Vec3 v = H.ambient_eigenvector(0);
            f.at = [&s, base, v, delta](double sgn) { return seed_at(s, base, base + sgn * delta * v); };
            out.push_back(std::move(f));
        }
        return out;
    }
    if (C.bott_index == 0) return out;
    const int host = C.id;
    const MorseBottScenario* scp = &sc;
    if (g.aux_index == 0) {
        SeedFamily f;
        f.discrete = {1.0, -1.0};
        f.label = "pair";
        const Vec3 base = g.location;
        const double u = g.u;
        f.at = [scp, host, base, u, delta](double sgn) {
            const Vec3 nu = circle_in_surface_normal(*scp, host, u);
            return seed_at(scp->surface, base, base + sgn * delta * nu);
        };
        out.push_back(std::move(f));
        return out;
    }
    // unstable arc of an auxiliary maximum, crossed with both normal sides
    const auto& ids = C.aux.critical_points;
    const int m = static_cast<int>(ids.size());
    const int k = static_cast<int>(std::find(ids.begin(), ids.end(), q) - ids.begin());
    double lo = sc.point(ids[(k - 1 + m) % m]).u;
    double hi = sc.point(ids[(k + 1) % m]).u;
    while (lo >= g.u) lo -= kTwoPi;
    while (hi <= g.u) hi += kTwoPi;
    for (int side : {1, -1}) {
        SeedFamily f;
        f.lo = lo;
        f.hi = hi;
        f.label = side > 0 ? "arc+" : "arc-";
        const Vec3 base = g.location;
        f.at = [scp, host, base, side, delta](double u) {
            const CriticalSubmanifold& H = scp->submanifolds[host];
            const Vec3 nu = circle_in_surface_normal(*scp, host, u);
            return seed_at(scp->surface, base, H.circle.point(u) + side * delta * nu);
        };
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<SeedFamily> morse_seed_families(const MorseBottScenario& sc, const ScalarField& field,
                                            int q, double delta) {
    const AuxCriticalPoint& g = sc.point(q);
    const SurfaceModel& s = sc.surface;
    const TangentHessian H = tangential_hessian(s, field, g.location);
    const int idx = H.index(0.0);
    if (idx != g.total_index) {
        std::ostringstream os;
        os << "Hessian index " << idx << " at " << g.label << ", expected " << g.total_index;
        throw IndexMismatch(os.str());
    }
    std::vector<SeedFamily> out;
    const Vec3 base = g.location;
    if (idx == 2) {
        SeedFamily f;
        f.periodic = true;
        f.lo = 0.0;
        f.hi = kTwoPi;
        f.label = "circle";
        const TangentFrame fr = H.frame;
        f.at = [&s, base, fr, delta](double th) {
            return seed_at(s, base, base + delta * (std::cos(th) * fr.e1 + std::sin(th) * fr.e2));
        };
        out.push_back(std::move(f));
    } else if (idx == 1) {
        SeedFamily f;
        f.discrete = {1.0, -1.0};
        f.label = "pair";
        const Vec3 v = H.ambient_eigenvector(0);
        f.at = [&s, base, v, delta](double sgn) { return seed_at(s, base, base + sgn * delta * v); };
        out.push_back(std::move(f));
    }
    return out;
}

CascadeEnumeration enumerate_cascades(const MorseBottScenario& sc, int q, int p,
                                      const CascadeSettings& cfg) {
    const AuxCriticalPoint& gq = sc.point(q);
    const AuxCriticalPoint& gp = sc.point(p);
    const int drop = gq.total_index - gp.total_index;
    if (drop != 1 && !cfg.allow_index_gap)
        throw std::invalid_argument("enumerate_cascades needs a total index drop of one");
    CascadeEnumeration out;
    out.q = q;
    out.p = p;

    if (gq.host == gp.host) {
        const CriticalSubmanifold& C = sc.submanifolds[gq.host];
        if (C.kind != SubmanifoldKind::Circle || gq.aux_index - gp.aux_index != 1) return out;
        const AuxFlowCount af = aux_flow_lines(sc, q, p, cfg.resolution);
        for (const AuxArc& a : af.arcs) {
            CascadeFlowLine c;
            c.q = q;
            c.p = p;
            c.n = 0;
            c.parameter = a.direction;
            c.family = a.direction > 0 ? "aux+" : "aux-";
            c.backward_limit = gq.location;
            c.forward_limit = gp.location;
            c.polyline = a.polyline;
            c.path_sign = -a.sign;
            out.cascades.push_back(std::move(c));
        }
        return out;
    }
    if (sc.host_of(p).critical_value >= sc.host_of(q).critical_value) return out;

    FlowContext ctx(sc);
    if (sc.host_of(q).kind == SubmanifoldKind::Point) ctx.source_submanifold = gq.host;
    ctx.ode = cfg.ode;
    ctx.capture = cfg.capture;
    const auto target = [p](const Landing& L) { return L.destination == p; };
    ShootSettings ss;
    ss.samples = cfg.samples;
    ss.bisection_tol = cfg.bisection_tol;

    for (const SeedFamily& fam : cascade_seed_families(sc, q, cfg.delta)) {
        const ShootOutcome o = shoot_with_refinement(ctx, fam, target, ss, cfg.max_doublings);
        out.integrations += o.integrations;
        for (const std::string& n : o.notes) out.notes.push_back(fam.label + ": " + n);
        if (o.continuum) {
            std::ostringstream os;
            os << "open family of flow lines from " << gq.label << " to " << gp.label << " (" << fam.label << ")";
            throw ContinuumDetected(os.str());
        }
        if (o.spurious > 0)
            out.notes.push_back(fam.label + ": " + std::to_string(o.spurious) + " class changes without a separatrix");
        for (const ShootResult& r : o.isolated) {
            const CriticalSubmanifold& L = sc.submanifolds[r.landing.submanifold];
            if (L.kind == SubmanifoldKind::Point && L.bott_index >= 1 && L.id != gp.host) {
                std::ostringstream os;
                os << fam.label << ": connection to saddle " << L.name << " at parameter " << r.parameter
                   << " is not continued (non-transverse)";
                out.notes.push_back(os.str());
            }
        }
        for (const ShootResult& r : o.results) {
            if (!landing_confirmed(ctx, r.trajectory)) {
                std::ostringstream os;
                os << fam.label << ": landing at parameter " << r.parameter << " changes past the capture tube";
                out.notes.push_back(os.str());
            }
            const CompletedPath path = complete_path(ctx, r, cfg.resolution, gq.host, cfg.delta);
            CascadeFlowLine c;
            c.q = q;
            c.p = p;
            c.n = 1;
            c.cascades.push_back(r.trajectory);
            c.parameter = r.parameter;
            c.family = fam.label;
            c.landing = r.landing;
            c.backward_limit = path.backward_limit;
            c.forward_limit = path.forward_limit;
            c.polyline = path.polyline;
            if (drop == 1) c.path_sign = flow_line_sign(sc, q, p, c.polyline);
            out.cascades.push_back(std::move(c));
        }
    }
    return out;
}

CascadeImage image_of(const MorseBottScenario& sc, const CascadeFlowLine& c, double resolution) {
    CascadeImage img;
    img.time_vector.assign(sc.submanifolds.size(), 0.0);
    for (size_t k = 0; k < c.intermediate.size() && k < c.drift_times.size(); ++k)
        img.time_vector[c.intermediate[k]] = c.drift_times[k];
    const auto& P = c.polyline;
    if (P.empty()) return img;
    img.points.push_back(P.front());
    for (size_t i = 0; i + 1 < P.size(); ++i) {
        const int m = std::max(1, static_cast<int>(std::ceil((P[i + 1] - P[i]).norm() / resolution)));
        for (int k = 1; k <= m; ++k) img.points.push_back(P[i] + (P[i + 1] - P[i]) * (static_cast<double>(k) / m));
    }
    return img;
}

LinkCheck check_links(const MorseBottScenario& sc, const CascadeFlowLine& c, double tol) {
    LinkCheck out;
    const AuxCriticalPoint& gq = sc.point(c.q);
    const AuxCriticalPoint& gp = sc.point(c.p);
    const CriticalSubmanifold& Hq = sc.submanifolds[gq.host];
    const CriticalSubmanifold& Hp = sc.submanifolds[gp.host];
    const double budget = 1e3;
    if (Hq.kind == SubmanifoldKind::Circle)
        out.source_gap = drift_with_gap(sc, Hq.id, Hq.parameter_of(c.backward_limit), -budget, gq.u).second;
    else
        out.source_gap = (c.backward_limit - gq.location).norm();
    if (Hp.kind == SubmanifoldKind::Circle)
        out.target_gap = drift_with_gap(sc, Hp.id, Hp.parameter_of(c.forward_limit), budget, gp.u).second;
    else
        out.target_gap = (c.forward_limit - gp.location).norm();
    for (const Trajectory& t : c.cascades) {
        if (t.points.size() < 2 || sc.f.value(t.points.front()) <= sc.f.value(t.points.back()))
            out.nonconstant = false;
    }
    out.link_gap = 0.0;  // drift links are only produced for n >= 2
    out.passed = out.nonconstant && out.source_gap <= tol && out.target_gap <= tol && out.link_gap <= tol;
    return out;
}

}  // namespace mbcascade
