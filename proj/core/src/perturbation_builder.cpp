#include "mbcascade/perturbation_builder.hpp"

#include "mbcascade/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace mbcascade {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kInf = std::numeric_limits<double>::infinity();

double radical_inverse(unsigned i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

// Halton points in [0,1)^3 with a seeded Cranley-Patterson rotation.
struct Halton3 {
    double shift[3];
    explicit Halton3(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (double& s : shift) s = U(rng);
    }
    void at(unsigned i, double out[3]) const {
        const unsigned bases[3] = {2, 3, 5};
        for (int k = 0; k < 3; ++k) out[k] = std::fmod(radical_inverse(i + 1, bases[k]) + shift[k], 1.0);
    }
};

// Shared evaluation data behind the h_eps closures.
struct HData {
    const MorseBottScenario* sc;
    double eps;
    std::vector<TubularPair> tubes;
    std::vector<BumpProfile> bumps;
};

double aux_at(const HData& d, int k, const Vec3& x) {
    const CriticalSubmanifold& C = d.sc->submanifolds[d.tubes[k].host];
    if (C.kind == SubmanifoldKind::Point) return C.aux.function.constant;
    return C.aux.function.value(C.circle.parameter(x));
}

Vec3 aux_gradient_at(const HData& d, int k, const Vec3& x) {
    const CriticalSubmanifold& C = d.sc->submanifolds[d.tubes[k].host];
    if (C.kind == SubmanifoldKind::Point) return Vec3::Zero();
    return C.aux.function.d1(C.circle.parameter(x)) * C.circle.parameter_gradient(x);
}

// ambient gradient of rho_k * (extended f_k)
Vec3 term_gradient(const HData& d, int k, const Vec3& x) {
    const CriticalSubmanifold& C = d.sc->submanifolds[d.tubes[k].host];
    const double s = C.normal_distance(x);
    const BumpProfile& b = d.bumps[k];
    if (s >= b.outer) return Vec3::Zero();
    Vec3 g = b.value(s) * aux_gradient_at(d, k, x);
    const double dr = b.derivative(s);
    if (dr != 0.0 && s > 0.0) g += dr * aux_at(d, k, x) * (x - C.closest_point(x)) / s;
    return g;
}

Vec3 tangential(const SurfaceModel& s, const Vec3& x, const Vec3& g) {
    const Vec3 n = unit_normal(s, x);
    return g - g.dot(n) * n;
}

}  // namespace

double BumpProfile::value(double s) const {
    if (s <= inner) return 1.0;
    if (s >= outer) return 0.0;
    const double t = (s - inner) / (outer - inner);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double BumpProfile::derivative(double s) const {
    if (s <= inner || s >= outer) return 0.0;
    const double t = (s - inner) / (outer - inner);
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (outer - inner);
}

double PerturbationData::extended_aux(int k, const Vec3& x) const {
    const HData d{scenario, epsilon, tubes, bumps};
    return aux_at(d, k, x);
}

Vec3 PerturbationData::extended_aux_gradient(int k, const Vec3& x) const {
    const HData d{scenario, epsilon, tubes, bumps};
    return aux_gradient_at(d, k, x);
}

double PerturbationData::bump(int k, const Vec3& x) const {
    return bumps[k].value(scenario->submanifolds[tubes[k].host].normal_distance(x));
}

std::vector<TubularPair> uniform_tubes(const MorseBottScenario& sc, double inner, double outer) {
    std::vector<TubularPair> out;
    for (const auto& C : sc.submanifolds) out.push_back(TubularPair{C.id, inner, outer});
    return out;
}

PerturbationData build_h_eps(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes,
                             double epsilon) {
    PerturbationData pd;
    pd.scenario = &sc;
    pd.epsilon = epsilon;
    pd.tubes = tubes;
    for (const auto& t : tubes) {
        if (!(t.inner_radius > 0.0 && t.inner_radius < t.outer_radius))
            throw std::invalid_argument("tube radii must satisfy 0 < inner < outer");
        pd.bumps.push_back(BumpProfile{t.inner_radius, t.outer_radius});
    }
    auto data = std::make_shared<const HData>(HData{&sc, epsilon, pd.tubes, pd.bumps});
    pd.h_eps.value = [data](const Vec3& x) {
        double v = data->sc->f.value(x);
        if (data->eps == 0.0) return v;
        double add = 0.0;
        for (size_t k = 0; k < data->tubes.size(); ++k) {
            const double s = data->sc->submanifolds[data->tubes[k].host].normal_distance(x);
            if (s >= data->bumps[k].outer) continue;
            add += data->bumps[k].value(s) * aux_at(*data, static_cast<int>(k), x);
        }
        return v + data->eps * add;
    };
    pd.h_eps.ambient_gradient = [data](const Vec3& x) {
        Vec3 g = data->sc->f.ambient_gradient(x);
        if (data->eps == 0.0) return g;
        Vec3 add = Vec3::Zero();
        for (size_t k = 0; k < data->tubes.size(); ++k) add += term_gradient(*data, static_cast<int>(k), x);
        return Vec3(g + data->eps * add);
    };
    return pd;
}

// ---- smallness conditions ----------------------------------------------------------

ConditionReport check_smallness(const PerturbationData& pd, const SmallnessSettings& cfg) {
    const MorseBottScenario& sc = *pd.scenario;
    const SurfaceModel& S = sc.surface;
    const HData data{pd.scenario, pd.epsilon, pd.tubes, pd.bumps};
    ConditionReport rep;
    rep.epsilon = pd.epsilon;
    rep.seed = cfg.seed;
    auto fail = [&](const std::string& m) {
        if (rep.first_failure.empty()) rep.first_failure = m;
    };

    double max_var = 0.0;
    for (size_t k = 0; k < pd.tubes.size(); ++k) {
        const TubularPair& T = pd.tubes[k];
        const CriticalSubmanifold& C = sc.submanifolds.at(T.host);
        const double r = T.inner_radius, R = T.outer_radius;
        TubeConditions tc;
        tc.host = T.host;
        tc.gradient_inf = kInf;
        const Halton3 hal(cfg.seed + 7919u * k);

        // normal Hessian data for the quadratic model
        TangentHessian Hp;
        std::vector<double> mu;
        const int nmu = 256;
        if (C.kind == SubmanifoldKind::Point) {
            Hp = tangential_hessian(S, sc.f, C.point);
        } else {
            for (int i = 0; i < nmu; ++i) {
                const double u = kTwoPi * i / nmu;
                const Vec3 nu = circle_in_surface_normal(sc, C.id, u);
                const TangentHessian H = tangential_hessian(S, sc.f, C.circle.point(u));
                const Vec2 c(nu.dot(H.frame.e1), nu.dot(H.frame.e2));
                mu.push_back(c.dot(H.matrix * c));
            }
        }

        auto sample = [&](unsigned i, bool shell) -> Vec3 {
            double h[3];
            hal.at(i, h);
            if (C.kind == SubmanifoldKind::Point) {
                const double th = kTwoPi * h[0];
                const double rho = shell ? std::sqrt(r * r + (R * R - r * r) * h[1]) : R * std::sqrt(h[1]);
                const Vec3 dir = std::cos(th) * Hp.frame.e1 + std::sin(th) * Hp.frame.e2;
                return project(S, C.point + rho * dir).coordinates;
            }
            const double u = kTwoPi * h[0];
            const double sgn = h[2] < 0.5 ? -1.0 : 1.0;
            const double w = shell ? sgn * (r + (R - r) * h[1]) : (2.0 * h[1] - 1.0) * R;
            return project(S, C.circle.point(u) + w * circle_in_surface_normal(sc, C.id, u)).coordinates;
        };

        double fmin = kInf, fmax = -kInf;
        for (int i = 0; i < cfg.samples; ++i) {
            Vec3 x;
            try {
                x = sample(static_cast<unsigned>(i), false);
            } catch (const NoConvergence&) {
                continue;
            }
            const double d = C.normal_distance(x);
            if (d > R) continue;
            ++tc.tube_samples;
            const double fv = sc.f.value(x);
            fmin = std::min(fmin, fv);
            fmax = std::max(fmax, fv);
            const Vec3 gf = tangential_gradient(S, sc.f, x);
            if (C.kind == SubmanifoldKind::Circle) {
                const Vec3 ga = tangential(S, x, aux_gradient_at(data, static_cast<int>(k), x));
                if (gf.norm() > 1e-12 && ga.norm() > 1e-12)
                    tc.orthogonality = std::max(tc.orthogonality, std::abs(gf.dot(ga)) / (gf.norm() * ga.norm()));
            }
            if (d >= 0.25 * R) {
                double model, scale;
                if (C.kind == SubmanifoldKind::Point) {
                    const Vec3 dx = x - C.point;
                    const Vec2 c(dx.dot(Hp.frame.e1), dx.dot(Hp.frame.e2));
                    model = 0.5 * c.dot(Hp.matrix * c);
                    scale = 0.5 * std::max(std::abs(Hp.eigenvalues[0]), std::abs(Hp.eigenvalues[1])) * d * d;
                } else {
                    const double u = C.circle.parameter(x);
                    const int iu = static_cast<int>(std::lround(u / kTwoPi * nmu)) % nmu;
                    model = 0.5 * mu[iu] * d * d;
                    scale = std::abs(model);
                }
                const double dev = std::abs(fv - C.critical_value - model) / std::max(scale, 1e-300);
                tc.model_fit = std::max(tc.model_fit, dev);
            }
        }
        for (int i = 0; i < cfg.samples; ++i) {
            Vec3 x;
            try {
                x = sample(static_cast<unsigned>(i), true);
            } catch (const NoConvergence&) {
                continue;
            }
            const double d = C.normal_distance(x);
            if (d < r || d > R) continue;
            ++tc.shell_samples;
            const Vec3 gt = tangential(S, x, term_gradient(data, static_cast<int>(k), x));
            tc.eps_term_sup = std::max(tc.eps_term_sup, pd.epsilon * gt.norm());
            tc.gradient_inf = std::min(tc.gradient_inf, tangential_gradient(S, sc.f, x).norm());
        }
        tc.variation = tc.tube_samples > 0 ? fmax - fmin : 0.0;
        max_var = std::max(max_var, tc.variation);
        tc.eps_bound = tc.shell_samples > 0 && tc.eps_term_sup < tc.gradient_inf;
        tc.orthogonality_ok = tc.orthogonality < cfg.orthogonality_tol;
        tc.model_ok = tc.model_fit < cfg.model_tol;
        const std::string where = "tube of '" + C.name + "': ";
        if (!tc.eps_bound) fail(where + "epsilon bound violated");
        if (!tc.orthogonality_ok) fail(where + "gradients of f and f_k not orthogonal");
        if (!tc.model_ok) fail(where + "quadratic normal model off by more than tolerance");
        rep.tubes.push_back(tc);
    }

    // pairwise disjointness and variation against value gaps
    rep.disjoint = true;
    for (size_t a = 0; a < pd.tubes.size(); ++a)
        for (size_t b = a + 1; b < pd.tubes.size(); ++b) {
            const CriticalSubmanifold& Ca = sc.submanifolds[pd.tubes[a].host];
            const CriticalSubmanifold& Cb = sc.submanifolds[pd.tubes[b].host];
            double dist = kInf;
            const int n = Ca.kind == SubmanifoldKind::Point ? 1 : 512;
            for (int i = 0; i < n; ++i) dist = std::min(dist, Cb.normal_distance(Ca.sample(kTwoPi * i / n)));
            if (!(dist > pd.tubes[a].outer_radius + pd.tubes[b].outer_radius)) {
                rep.disjoint = false;
                fail("tubes of '" + Ca.name + "' and '" + Cb.name + "' overlap");
            }
            const double gap = std::abs(Ca.critical_value - Cb.critical_value);
            if (gap < 1e-12) continue;
            PairConditions pc;
            pc.i = Ca.id;
            pc.j = Cb.id;
            pc.variation_sum = rep.tubes[a].variation + rep.tubes[b].variation;
            pc.value_gap_third = gap / 3.0;
            pc.ok = pc.variation_sum < pc.value_gap_third;
            if (!pc.ok) fail("variation of '" + Ca.name + "' and '" + Cb.name + "' too large for their value gap");
            rep.pairs.push_back(pc);
        }

    // decrement along flow lines leaving one tube until they enter another
    rep.required_decrement = 3.0 * max_var;
    rep.min_decrement = kInf;
    for (size_t k = 0; k < pd.tubes.size(); ++k) {
        const CriticalSubmanifold& C = sc.submanifolds[pd.tubes[k].host];
        const double R = pd.tubes[k].outer_radius;
        std::vector<Vec3> starts;
        const int m = cfg.boundary_flows;
        if (C.kind == SubmanifoldKind::Point) {
            const TangentFrame fr = tangent_frame(S, C.point);
            for (int i = 0; i < m; ++i) {
                const double th = kTwoPi * (i + 0.5) / m;
                starts.push_back(C.point + R * (std::cos(th) * fr.e1 + std::sin(th) * fr.e2));
            }
        } else {
            for (int i = 0; i < m / 2; ++i) {
                const double u = kTwoPi * (i + 0.5) / (m / 2);
                const Vec3 nu = circle_in_surface_normal(sc, C.id, u);
                for (int sg : {1, -1}) starts.push_back(C.circle.point(u) + sg * R * nu);
            }
        }
        for (const Vec3& s0 : starts) {
            Vec3 x0;
            try {
                x0 = project(S, s0).coordinates;
            } catch (const NoConvergence&) {
                continue;
            }
            const Vec3 g = tangential_gradient(S, sc.f, x0);
            const Vec3 out = x0 - C.closest_point(x0);
            if (-g.dot(out) <= 0.0) continue;  // flow enters this tube
            StopRule stop;
            stop.time_budget = 1e3;
            stop.capture = [&](const Vec3& x) {
                for (size_t j = 0; j < pd.tubes.size(); ++j) {
                    if (j == k) continue;
                    if (sc.submanifolds[pd.tubes[j].host].normal_distance(x) < pd.tubes[j].outer_radius) return true;
                }
                return false;
            };
            IntegratorSettings ode;
            ode.rtol = 1e-8;
            ode.atol = 1e-10;
            const Trajectory tr = integrate(S, sc.f, x0, stop, ode);
            if (!tr.captured) continue;
            rep.min_decrement = std::min(rep.min_decrement, sc.f.value(x0) - sc.f.value(tr.points.back()));
        }
    }
    if (std::isinf(rep.min_decrement)) rep.min_decrement = 0.0;
    rep.decrement_ok = rep.min_decrement >= rep.required_decrement;
    if (!rep.decrement_ok) fail("f does not drop by three times the largest tube variation between tubes");

    rep.passed = rep.first_failure.empty();
    return rep;
}

// ---- critical points of h ------------------------------------------------------------

CriticalSweep critical_points_of_h(const PerturbationData& pd, int grid) {
    if (!(pd.epsilon > 0.0))
        throw std::invalid_argument("critical_points_of_h needs epsilon > 0 (Morse-Bott degeneracy at 0)");
    const MorseBottScenario& sc = *pd.scenario;
    const SurfaceModel& S = sc.surface;
    CriticalSweep out;

    for (const AuxCriticalPoint& q : sc.points) {
        const CriticalRefinement r = refine_critical_point(S, pd.h_eps, q.location);
        HCriticalPoint c;
        c.generator = q.id;
        c.location = r.x;
        c.index = r.hessian.index(0.0);
        c.offset = (r.x - q.location).norm();
        c.gradient = r.gradient;
        out.points.push_back(c);
        if (!r.converged || c.offset > 1e-6 * S.curvature_scale) {
            std::ostringstream os;
            os << "no critical point of h near generator " << q.label << " (offset " << c.offset << ")";
            throw IndexDrift(os.str());
        }
        if (c.index != q.total_index) {
            std::ostringstream os;
            os << "index of h at " << q.label << " is " << c.index << ", total index " << q.total_index;
            throw IndexDrift(os.str());
        }
    }

    for (const Vec3& x : gradient_grid_minima(S, pd.h_eps, grid)) {
        ++out.grid_minima;
        const CriticalRefinement r = refine_critical_point(S, pd.h_eps, x);
        if (!r.converged || r.gradient > 1e-11) continue;
        ++out.refined_zeros;
        double dmin = kInf;
        for (const auto& q : sc.points) dmin = std::min(dmin, (r.x - q.location).norm());
        if (dmin > 1e-3 * S.curvature_scale) {
            std::ostringstream os;
            os << "undeclared critical point of h at (" << r.x.transpose() << "), distance " << dmin;
            throw ExtraCritical(os.str());
        }
    }
    return out;
}

EpsilonChoice auto_epsilon(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes,
                           const std::function<bool(const PerturbationData&)>& accept, double start,
                           int max_halvings, const SmallnessSettings& cfg) {
    EpsilonChoice ch;
    for (int k = 0; k <= max_halvings; ++k) {
        const double eps = start * std::ldexp(1.0, -k);
        const PerturbationData pd = build_h_eps(sc, tubes, eps);
        std::ostringstream why;
        why << "eps=" << eps << ": ";
        ConditionReport rep = check_smallness(pd, cfg);
        if (!rep.passed) {
            ch.rejected.push_back(why.str() + rep.first_failure);
            continue;
        }
        CriticalSweep cs;
        try {
            cs = critical_points_of_h(pd);
        } catch (const std::runtime_error& e) {
            ch.rejected.push_back(why.str() + e.what());
            continue;
        }
        if (accept && !accept(pd)) {
            ch.rejected.push_back(why.str() + "matching not yet unambiguous");
            continue;
        }
        ch.epsilon = eps;
        ch.halvings = k;
        ch.conditions = std::move(rep);
        ch.critical = std::move(cs);
        return ch;
    }
    throw EpsilonNotFound("no admissible epsilon after " + std::to_string(max_halvings) + " halvings");
}

}  // namespace mbcascade
