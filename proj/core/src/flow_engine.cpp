#include "mbcascade/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbcascade {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct Integrator {
    const SurfaceModel& s;
    const ScalarField& field;
    const StopRule& stop;
    const IntegratorSettings& cfg;
    double sign;
    Trajectory tr;
    double t = 0.0;

    Vec3 vel(const Vec3& x) const { return sign * tangential_gradient(s, field, x); }

    void push(const Vec3& x, const Vec3& v) {
        tr.points.push_back(x);
        tr.times.push_back(t);
        tr.velocities.push_back(v);
    }

    // true when the trajectory should stop at its current end point
    bool check(const Vec3& x, const Vec3& v) {
        if (stop.capture && stop.capture(x)) {
            tr.status = TerminalStatus::Converged;
            tr.captured = true;
            tr.target = "capture";
            return true;
        }
        if (v.norm() < stop.gradient_tol) {
            tr.status = TerminalStatus::Converged;
            tr.target = "critical";
            return true;
        }
        if (sign < 0.0 && field.value(x) < stop.value_floor) {
            tr.status = TerminalStatus::Converged;
            tr.target = "floor";
            return true;
        }
        if (!in_bounding_box(s, x)) {
            tr.status = TerminalStatus::Escaped;
            return true;
        }
        if (t >= stop.time_budget) {
            tr.status = TerminalStatus::Budget;
            return true;
        }
        return false;
    }

    // Frozen-Hessian solution near a nondegenerate critical point. Returns false when
    // the local Newton offset is too large for the linear model to be trusted.
    bool linear_segment(Vec3& y, bool& done) {
        const TangentHessian H = tangential_hessian(s, field, y);
        if (std::min(std::abs(H.eigenvalues[0]), std::abs(H.eigenvalues[1])) < 1e-10) return false;
        const Vec3 g = tangential_gradient(s, field, y);
        const Vec2 gf(g.dot(H.frame.e1), g.dot(H.frame.e2));
        const Vec2 step = -H.matrix.ldlt().solve(gf);
        if (step.norm() > 1e-3 * s.curvature_scale) return false;
        const Vec3 xstar = y + step[0] * H.frame.e1 + step[1] * H.frame.e2;
        const Vec2 c = H.eigenvectors.transpose() * (-step);
        Vec2 rate;
        for (int i = 0; i < 2; ++i) rate[i] = sign * H.eigenvalues[i];

        double T = 0.0;
        bool grows = false;
        for (int i = 0; i < 2; ++i)
            if (rate[i] > 0.0 && std::abs(c[i]) > 0.0) grows = true;
        if (grows) {
            T = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 2; ++i) {
                if (rate[i] <= 0.0 || std::abs(c[i]) == 0.0) continue;
                const double target = 2.0 * cfg.linearize_below / std::abs(H.eigenvalues[i]);
                T = std::min(T, std::log(std::max(1.0, target / std::abs(c[i]))) / rate[i]);
            }
        } else {
            for (int i = 0; i < 2; ++i) {
                const double gi = std::abs(H.eigenvalues[i] * c[i]);
                T = std::max(T, std::log(std::max(1.0, gi / (0.5 * stop.gradient_tol))) / -rate[i]);
            }
        }
        T = std::min({T, cfg.linearized_time, stop.time_budget - t});
        if (!(T > 0.0)) return false;

        const int M = 12;
        const double t0 = t;
        for (int k = 1; k <= M; ++k) {
            const double tau = T * k / M;
            const Vec2 ck(c[0] * std::exp(rate[0] * tau), c[1] * std::exp(rate[1] * tau));
            const Vec2 d = H.eigenvectors * ck;
            y = project(s, xstar + d[0] * H.frame.e1 + d[1] * H.frame.e2).coordinates;
            t = t0 + tau;
            const Vec3 v = vel(y);
            push(y, v);
            if (check(y, v)) {
                done = true;
                return true;
            }
        }
        return true;
    }

    void run(const Vec3& x0) {
        Vec3 y;
        try {
            y = project(s, x0).coordinates;
        } catch (const NoConvergence&) {
            tr.status = TerminalStatus::Escaped;
            return;
        }
        Vec3 v = vel(y);
        push(y, v);
        if (check(y, v)) return;

        double h = cfg.initial_step;
        int linear_segments = 0;
        for (int n = 0; n < cfg.max_steps; ++n) {
            if (v.norm() < cfg.linearize_below && linear_segments < 64) {
                bool done = false;
                bool used = false;
                try {
                    used = linear_segment(y, done);
                } catch (const NoConvergence&) {
                    used = false;
                }
                if (used) {
                    ++linear_segments;
                    if (done) return;
                    v = tr.velocities.back();
                    continue;
                }
            }
            h = std::min({h, cfg.max_step, std::max(stop.time_budget - t, 1e-14)});
            const Vec3 k1 = v;
            const Vec3 k2 = vel(y + h * a21 * k1);
            const Vec3 k3 = vel(y + h * (a31 * k1 + a32 * k2));
            const Vec3 k4 = vel(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Vec3 k5 = vel(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Vec3 k6 = vel(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vec3 y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vec3 k7 = vel(y5);
            const Vec3 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double acc = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
                acc += (err[i] / sc) * (err[i] / sc);
            }
            const double en = std::sqrt(acc / 3.0);
            const double factor = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            if (en > 1.0) {
                h *= std::max(0.2, factor);
                if (h < 1e-14) {
                    tr.status = TerminalStatus::Budget;
                    tr.target = "step underflow";
                    return;
                }
                continue;
            }
            try {
                y = project(s, y5).coordinates;
            } catch (const NoConvergence&) {
                tr.status = TerminalStatus::Escaped;
                return;
            }
            t += h;
            v = vel(y);
            push(y, v);
            if (check(y, v)) return;
            h *= std::min(5.0, std::max(0.2, factor));
        }
        tr.status = TerminalStatus::Budget;
        tr.target = "step limit";
    }
};

Vec3 hermite(const Vec3& x0, const Vec3& v0, const Vec3& x1, const Vec3& v1, double dt, double u) {
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * dt * v0 + (-2 * u3 + 3 * u2) * x1 +
           (u3 - u2) * dt * v1;
}

}  // namespace

const char* to_string(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::Converged: return "converged";
        case TerminalStatus::Escaped: return "escaped";
        case TerminalStatus::Budget: return "budget";
    }
    return "?";
}

Trajectory integrate(const SurfaceModel& s, const ScalarField& field, const Vec3& x0,
                     const StopRule& stop, const IntegratorSettings& cfg, double sign) {
    Integrator in{s, field, stop, cfg, sign, {}, 0.0};
    in.run(x0);
    return std::move(in.tr);
}

std::vector<Vec3> densify(const SurfaceModel& s, const Trajectory& t, double resolution) {
    std::vector<Vec3> out;
    if (t.points.empty()) return out;
    out.push_back(t.points.front());
    for (size_t i = 0; i + 1 < t.points.size(); ++i) {
        const Vec3& x0 = t.points[i];
        const Vec3& x1 = t.points[i + 1];
        const double dt = t.times[i + 1] - t.times[i];
        // Hermite spacing is uneven: subdivide until every gap is within the resolution
        int m = static_cast<int>(std::ceil((x1 - x0).norm() / resolution));
        std::vector<Vec3> seg;
        for (int attempt = 0; attempt < 8; ++attempt) {
            seg.clear();
            for (int k = 1; k < m; ++k) {
                const Vec3 x = hermite(x0, t.velocities[i], x1, t.velocities[i + 1], dt,
                                       static_cast<double>(k) / m);
                try {
                    seg.push_back(project(s, x).coordinates);
                } catch (const NoConvergence&) {
                    seg.push_back(x);
                }
            }
            seg.push_back(x1);
            double gap = (seg.front() - out.back()).norm();
            for (size_t k = 1; k < seg.size(); ++k) gap = std::max(gap, (seg[k] - seg[k - 1]).norm());
            if (gap <= resolution) break;
            m = static_cast<int>(std::ceil(m * gap / resolution)) + 1;
        }
        out.insert(out.end(), seg.begin(), seg.end());
    }
    return out;
}

std::vector<Vec3> unstable_seeds(const MorseBottScenario& sc, const ScalarField& field,
                                 const Vec3& base, int expected_index, double delta, int count,
                                 SeedMode mode, int host) {
    const SurfaceModel& s = sc.surface;
    std::vector<Vec3> out;
    if (mode == SeedMode::Normal) {
        const CriticalSubmanifold& C = sc.submanifolds.at(host);
        if (C.kind != SubmanifoldKind::Circle)
            throw std::invalid_argument("normal seeds need a circle host");
        const double u = C.parameter_of(base);
        const Vec3 nu = circle_in_surface_normal(sc, host, u);
        const TangentHessian H = tangential_hessian(s, field, base);
        const Vec2 nf(nu.dot(H.frame.e1), nu.dot(H.frame.e2));
        const int measured = nf.dot(H.matrix * nf) < 0.0 ? 1 : 0;
        if (measured != expected_index) {
            std::ostringstream os;
            os << "normal index " << measured << " at seed base, expected " << expected_index;
            throw IndexMismatch(os.str());
        }
        if (measured == 1)
            for (int sgn : {1, -1}) out.push_back(project(s, base + sgn * delta * nu).coordinates);
        return out;
    }
    const TangentHessian H = tangential_hessian(s, field, base);
    const int measured = H.index(0.0);
    if (measured != expected_index) {
        std::ostringstream os;
        os << "Hessian index " << measured << " at seed base, expected " << expected_index;
        throw IndexMismatch(os.str());
    }
    if (measured == 1) {
        const Vec3 v = H.ambient_eigenvector(0);
        for (int sgn : {1, -1}) out.push_back(project(s, base + sgn * delta * v).coordinates);
    } else if (measured == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = kTwoPi * (i + 0.5) / count;
            const Vec3 d = std::cos(th) * H.frame.e1 + std::sin(th) * H.frame.e2;
            out.push_back(project(s, base + delta * d).coordinates);
        }
    }
    return out;
}

// ---- landings -------------------------------------------------------------------

std::string Landing::key() const {
    std::ostringstream os;
    os << static_cast<int>(kind) << ':' << submanifold << ':' << arc << ':' << side << ':'
       << quadrant;
    return os.str();
}

FlowContext::FlowContext(const MorseBottScenario& sc) : FlowContext(sc, sc.f) {}

FlowContext::FlowContext(const MorseBottScenario& sc, ScalarField f)
    : scenario(&sc), field(std::move(f)) {
    prepare();
}

void FlowContext::prepare() {
    const MorseBottScenario& sc = *scenario;
    sink_frames.assign(sc.submanifolds.size(), TangentFrame{});
    sink_eigvecs.assign(sc.submanifolds.size(), Mat2::Identity());
    for (const CriticalSubmanifold& C : sc.submanifolds) {
        if (C.kind != SubmanifoldKind::Point || C.bott_index != 0) continue;
        const TangentHessian H = tangential_hessian(sc.surface, field, C.point);
        sink_frames[C.id] = H.frame;
        sink_eigvecs[C.id] = H.eigenvectors;
    }
}

namespace {

double capture_threshold(const FlowContext& ctx, const CriticalSubmanifold& C) {
    const double scale = ctx.scenario->surface.curvature_scale;
    if (C.kind == SubmanifoldKind::Circle) return ctx.capture.circle_eta * scale;
    return C.bott_index == 0 ? ctx.capture.sink_radius * scale : ctx.capture.point_eta * scale;
}

int captured_by(const FlowContext& ctx, const Vec3& x) {
    for (const CriticalSubmanifold& C : ctx.scenario->submanifolds) {
        if (C.id == ctx.source_submanifold) continue;
        if (C.normal_distance(x) < capture_threshold(ctx, C)) return C.id;
    }
    return -1;
}

}  // namespace

Trajectory flow_to_landing(const FlowContext& ctx, const Vec3& x0) {
    StopRule stop = ctx.stop;
    stop.capture = [&ctx](const Vec3& x) { return captured_by(ctx, x) >= 0; };
    return integrate(ctx.scenario->surface, ctx.field, x0, stop, ctx.ode, -1.0);
}

Landing classify_landing(const FlowContext& ctx, const Trajectory& t) {
    Landing L;
    if (!t.captured || t.points.empty()) return L;
    const MorseBottScenario& sc = *ctx.scenario;
    const Vec3& x = t.points.back();
    const int j = captured_by(ctx, x);
    if (j < 0) return L;
    const CriticalSubmanifold& C = sc.submanifolds[j];
    L.submanifold = j;
    if (C.kind == SubmanifoldKind::Point) {
        L.kind = LandingKind::Point;
        L.location = C.point;
        L.destination = C.aux.critical_points.front();
        L.isolated = C.bott_index >= 1;
        if (!L.isolated) {
            const TangentFrame& fr = ctx.sink_frames[j];
            const Vec3 d = x - C.point;
            const Vec2 c = ctx.sink_eigvecs[j].transpose() * Vec2(d.dot(fr.e1), d.dot(fr.e2));
            L.quadrant = 2 * (c[0] >= 0.0 ? 1 : 0) + (c[1] >= 0.0 ? 1 : 0);
        }
        return L;
    }
    L.kind = LandingKind::Circle;
    L.u = C.parameter_of(x);
    L.location = C.sample(L.u);
    // side from the approach, not the capture point, which can sit across the circle
    const double approach = ctx.capture.sink_radius * sc.surface.curvature_scale;
    Vec3 y = x;
    for (auto it = t.points.rbegin(); it != t.points.rend(); ++it)
        if (C.normal_distance(*it) > approach) {
            y = *it;
            break;
        }
    const double uy = C.parameter_of(y);
    L.side = (y - C.sample(uy)).dot(circle_in_surface_normal(sc, j, uy)) >= 0.0 ? 1 : -1;
    L.arc = arc_of(sc, j, L.u);
    for (int id : C.aux.critical_points) {
        if (std::abs(angle_difference(L.u, sc.point(id).u)) < ctx.capture.landing_tol) {
            L.destination = id;
            L.isolated = true;
            return L;
        }
    }
    L.destination = arc_sink(sc, j, L.arc);
    L.isolated = C.bott_index >= 1;
    return L;
}

bool landing_confirmed(const FlowContext& ctx, const Trajectory& t) {
    const Landing L = classify_landing(ctx, t);
    if (L.kind == LandingKind::None || L.isolated) return true;
    FlowContext fine = ctx;
    fine.capture.circle_eta /= 100.0;
    fine.capture.point_eta /= 100.0;
    fine.capture.sink_radius /= 100.0;
    const Landing M = classify_landing(fine, flow_to_landing(fine, t.points.back()));
    return M.submanifold == L.submanifold;
}

// ---- shooting -------------------------------------------------------------------

namespace {

struct Sample {
    double s = 0.0;
    SeedPoint seed;
    Trajectory tr;
    Landing L;
};

struct Shooter {
    const FlowContext& ctx;
    const SeedFamily& fam;
    const ShootSettings& cfg;
    ShootOutcome& out;

    Sample eval(double s) {
        Sample x;
        x.s = s;
        x.seed = fam.at(s);
        x.tr = flow_to_landing(ctx, x.seed.start);
        x.L = classify_landing(ctx, x.tr);
        ++out.integrations;
        return x;
    }

    // a: regular sample with key ka; b: isolated. Returns the boundary of the isolated window.
    double edge(double a, double b, const std::string& ka) {
        while (std::abs(b - a) > cfg.bisection_tol) {
            const double m = 0.5 * (a + b);
            const Sample x = eval(m);
            if (x.L.isolated) b = m;
            else if (x.L.key() == ka) a = m;
            else throw AmbiguousTransition("third landing class inside an isolated window edge");
        }
        return 0.5 * (a + b);
    }

    void add_window(double left, double right, const Sample& fallback) {
        Sample x = eval(0.5 * (left + right));
        if (!x.L.isolated) {
            out.notes.push_back("isolated window midpoint not isolated; using scan sample");
            x = fallback;
        }
        found.push_back(std::move(x));
    }

    void bracket(const Sample& A, const Sample& B, const std::vector<const Sample*>& iso) {
        if (!iso.empty()) {
            const double left = edge(A.s, iso.front()->s, A.L.key());
            const double right = edge(B.s, iso.back()->s, B.L.key());
            add_window(left, right, *iso.front());
            return;
        }
        if (A.L.key() == B.L.key()) return;
        double a = A.s, b = B.s;
        const std::string ka = A.L.key(), kb = B.L.key();
        while (std::abs(b - a) > cfg.bisection_tol) {
            const double m = 0.5 * (a + b);
            Sample x = eval(m);
            if (x.L.isolated) {
                const double left = edge(a, m, ka);
                const double right = edge(b, m, kb);
                add_window(left, right, x);
                return;
            }
            const std::string km = x.L.key();
            if (km == ka) a = m;
            else if (km == kb) b = m;
            else throw AmbiguousTransition("bisection met a third landing class: " + km);
        }
        Sample x = eval(0.5 * (a + b));
        if (x.L.isolated) found.push_back(std::move(x));
        else ++out.spurious;
    }

    std::vector<Sample> found;
};

ShootResult to_result(Sample&& x, const SeedFamily& fam) {
    ShootResult r;
    r.parameter = x.s;
    if (fam.periodic) {
        const double period = fam.hi - fam.lo;
        r.parameter = fam.lo + std::fmod(std::fmod(x.s - fam.lo, period) + period, period);
    }
    r.seed = x.seed;
    r.trajectory = std::move(x.tr);
    r.landing = x.L;
    r.family = fam.label;
    return r;
}

}  // namespace

ShootOutcome shoot_connecting_orbits(const FlowContext& ctx, const SeedFamily& family,
                                     const std::function<bool(const Landing&)>& target,
                                     const ShootSettings& cfg) {
    ShootOutcome out;
    Shooter sh{ctx, family, cfg, out, {}};

    if (!family.discrete.empty()) {
        for (double s : family.discrete) {
            Sample x = sh.eval(s);
            ShootResult r = to_result(std::move(x), family);
            if (r.landing.isolated) out.isolated.push_back(r);
            if (target(r.landing)) out.results.push_back(std::move(r));
        }
        return out;
    }

    const int N = cfg.samples;
    const double span = family.hi - family.lo;
    std::vector<Sample> scan;
    scan.reserve(N);
    for (int i = 0; i < N; ++i) scan.push_back(sh.eval(family.lo + span * (i + 0.5) / N));

    std::vector<int> regular;
    for (int i = 0; i < N; ++i)
        if (!scan[i].L.isolated) regular.push_back(i);

    // open set of target landings
    for (int i = 0; i < N; ++i) {
        const int j = i + 1;
        if (j == N && !family.periodic) break;
        const Sample& a = scan[i];
        const Sample& b = scan[j % N];
        if (!a.L.isolated && !b.L.isolated && target(a.L) && target(b.L)) out.continuum = true;
    }

    if (regular.empty()) {
        out.notes.push_back("every scan sample landed non-generically");
        for (Sample& x : scan) sh.found.push_back(std::move(x));
    } else {
        const int R = static_cast<int>(regular.size());
        const int pairs = family.periodic ? R : R - 1;
        for (int k = 0; k < pairs; ++k) {
            const int ia = regular[k];
            int ib = regular[(k + 1) % R];
            Sample B = scan[ib];
            if (family.periodic && k + 1 == R) B.s += span;  // wrap around
            std::vector<const Sample*> iso;
            for (int i = ia + 1;; ++i) {
                const int w = i % N;
                if (w == ib) break;
                iso.push_back(&scan[w]);
                if (!family.periodic && i >= N - 1) break;
            }
            if (R == 1 && family.periodic && iso.empty()) continue;
            std::vector<Sample> iso_copy;
            for (const Sample* p : iso) {
                iso_copy.push_back(*p);
                if (iso_copy.back().s < scan[ia].s) iso_copy.back().s += span;
            }
            std::vector<const Sample*> iso_ptr;
            for (const Sample& p : iso_copy) iso_ptr.push_back(&p);
            sh.bracket(scan[ia], B, iso_ptr);
        }
        // isolated samples before the first / after the last regular one (open families)
        if (!family.periodic) {
            for (int i = 0; i < regular.front(); ++i) sh.found.push_back(scan[i]);
            for (int i = regular.back() + 1; i < N; ++i) sh.found.push_back(scan[i]);
        }
    }

    std::vector<ShootResult> all;
    for (Sample& x : sh.found) all.push_back(to_result(std::move(x), family));
    std::sort(all.begin(), all.end(),
              [](const ShootResult& a, const ShootResult& b) { return a.parameter < b.parameter; });
    std::vector<ShootResult> dedup;
    const double merge = 10.0 * cfg.bisection_tol;
    for (ShootResult& r : all) {
        if (!dedup.empty() && std::abs(r.parameter - dedup.back().parameter) < merge) continue;
        dedup.push_back(std::move(r));
    }
    if (family.periodic && dedup.size() > 1 &&
        std::abs(dedup.front().parameter + span - dedup.back().parameter) < merge)
        dedup.pop_back();
    for (ShootResult& r : dedup) {
        out.isolated.push_back(r);
        if (target(r.landing)) out.results.push_back(std::move(r));
    }
    return out;
}

ShootOutcome shoot_with_refinement(const FlowContext& ctx, const SeedFamily& family,
                                   const std::function<bool(const Landing&)>& target,
                                   ShootSettings cfg, int max_doublings) {
    for (int k = 0;; ++k) {
        try {
            ShootOutcome o = shoot_connecting_orbits(ctx, family, target, cfg);
            if (k > 0) o.notes.push_back("scan refined to " + std::to_string(cfg.samples) + " samples");
            return o;
        } catch (const AmbiguousTransition&) {
            if (k >= max_doublings) throw;
            cfg.samples *= 2;
        }
    }
}

// ---- path completion --------------------------------------------------------------

std::vector<Vec3> circle_arc(const CircleGeometry& c, double u0, double u1, double resolution) {
    const double len = std::abs(u1 - u0) * c.radius;
    const int n = std::max(1, static_cast<int>(std::ceil(len / resolution)));
    std::vector<Vec3> out;
    out.reserve(n + 1);
    for (int i = 0; i <= n; ++i) out.push_back(c.point(u0 + (u1 - u0) * i / n));
    return out;
}

namespace {

void append(std::vector<Vec3>& dst, const std::vector<Vec3>& src) {
    for (const Vec3& x : src)
        if (dst.empty() || (dst.back() - x).norm() > 1e-15) dst.push_back(x);
}

// Unwrapped parameter interval of the given arc of a circle.
std::pair<double, double> arc_bounds(const MorseBottScenario& sc, int j, int arc) {
    const auto& ids = sc.submanifolds[j].aux.critical_points;
    const int m = static_cast<int>(ids.size());
    const double u0 = sc.point(ids[arc % m]).u;
    double u1 = sc.point(ids[(arc + 1) % m]).u;
    if (u1 <= u0) u1 += kTwoPi;
    return {u0, u1};
}

}  // namespace

CompletedPath complete_path(const FlowContext& ctx, const ShootResult& r, double resolution,
                            int source_host, double delta) {
    const MorseBottScenario& sc = *ctx.scenario;
    const SurfaceModel& s = sc.surface;
    const CriticalSubmanifold& H = sc.submanifolds.at(source_host);
    const Vec3 base = r.seed.base;
    const double eta = ctx.capture.circle_eta * s.curvature_scale;
    CompletedPath out;

    // head: backward flow from the seed
    StopRule back;
    back.gradient_tol = 1e-14;
    back.time_budget = 200.0;
    back.capture = [&](const Vec3& x) {
        if ((x - base).norm() < 1e-2 * delta) return true;
        return H.kind == SubmanifoldKind::Circle && H.normal_distance(x) < eta;
    };
    Trajectory head = integrate(s, ctx.field, r.seed.start, back, ctx.ode, 1.0);
    std::vector<Vec3> head_pts = densify(s, head, resolution);
    std::reverse(head_pts.begin(), head_pts.end());
    const Vec3 join = head_pts.front();

    std::vector<Vec3> poly;
    if ((join - base).norm() < 1e-2 * delta) {
        poly.push_back(base);
        out.backward_limit = base;
        if (H.kind == SubmanifoldKind::Circle) out.backward_limit = H.closest_point(base);
    } else if (H.kind == SubmanifoldKind::Circle && H.normal_distance(join) < 10.0 * eta) {
        const double ub = H.parameter_of(base);
        const double uj = ub + angle_difference(H.parameter_of(join), ub);
        append(poly, circle_arc(H.circle, ub, uj, resolution));
        poly.front() = base;
        out.backward_limit = H.circle.point(uj);
    } else {
        // closest approach, then a straight chord to the base
        size_t best = 0;
        for (size_t i = 0; i < head_pts.size(); ++i)
            if ((head_pts[i] - base).norm() < (head_pts[best] - base).norm()) best = i;
        head_pts.erase(head_pts.begin(), head_pts.begin() + static_cast<long>(best));
        const Vec3 a = head_pts.front();
        const int n = std::max(1, static_cast<int>(std::ceil((a - base).norm() / resolution)));
        for (int i = 0; i < n; ++i) {
            const Vec3 x = base + (a - base) * (static_cast<double>(i) / n);
            poly.push_back(i == 0 ? base : project(s, x).coordinates);
        }
        out.backward_limit = base;
    }
    out.head_end = poly.size() - 1;
    append(poly, head_pts);
    append(poly, densify(s, r.trajectory, resolution));

    // tail: to the destination
    const Landing& L = r.landing;
    if (L.kind == LandingKind::Point) {
        out.tail_begin = poly.size();
        out.forward_limit = L.location;
        append(poly, {L.location});
        if (out.tail_begin >= poly.size()) out.tail_begin = poly.size() - 1;
    } else if (L.kind == LandingKind::Circle) {
        const CriticalSubmanifold& C = sc.submanifolds[L.submanifold];
        const AuxCriticalPoint& dst = sc.point(L.destination);
        double u0 = L.u, u1;
        if (L.isolated && std::abs(angle_difference(L.u, dst.u)) < ctx.capture.landing_tol) {
            u1 = u0 + angle_difference(dst.u, u0);
        } else {
            auto [a, b] = arc_bounds(sc, L.submanifold, L.arc);
            while (u0 < a) u0 += kTwoPi;
            while (u0 >= a + kTwoPi) u0 -= kTwoPi;
            u1 = (L.destination == C.aux.critical_points[L.arc % C.aux.critical_points.size()]) ? a : b;
        }
        out.forward_limit = C.circle.point(u0);
        append(poly, {out.forward_limit});
        out.tail_begin = poly.size() - 1;
        std::vector<Vec3> arc = circle_arc(C.circle, u0, u1, resolution);
        arc.back() = dst.location;
        append(poly, arc);
    } else {
        out.tail_begin = poly.size() - 1;
        out.forward_limit = poly.back();
    }
    out.polyline = std::move(poly);
    return out;
}

}  // namespace mbcascade
