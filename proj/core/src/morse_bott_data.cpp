#include "mbcascade/morse_bott_data.hpp"

#include "mbcascade/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mbcascade {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double wrap_angle(double u) {
    double w = std::fmod(u, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w -= kTwoPi;
    return w;
}

double angle_difference(double a, double b) {
    double d = std::fmod(a - b, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    if (d > kPi) d -= kTwoPi;
    return d;
}

// ---- circle ----------------------------------------------------------------

Vec3 CircleGeometry::point(double u) const {
    return center + radius * (std::cos(u) * e1 + std::sin(u) * e2);
}

Vec3 CircleGeometry::unit_tangent(double u) const {
    return -std::sin(u) * e1 + std::cos(u) * e2;
}

double CircleGeometry::parameter(const Vec3& x) const {
    const Vec3 d = x - center;
    return wrap_angle(std::atan2(d.dot(e2), d.dot(e1)));
}

Vec3 CircleGeometry::parameter_gradient(const Vec3& x) const {
    const Vec3 d = x - center;
    const double a = d.dot(e1), b = d.dot(e2);
    const double r2 = a * a + b * b;
    if (r2 == 0.0) return Vec3::Zero();
    return (a * e2 - b * e1) / r2;
}

Vec3 CircleGeometry::closest_point(const Vec3& x) const { return point(parameter(x)); }

double CircleGeometry::distance(const Vec3& x) const { return (x - closest_point(x)).norm(); }

// ---- trigonometric polynomial -----------------------------------------------

double TrigPolynomial::value(double u) const {
    double v = constant;
    for (size_t m = 0; m < cos_coeffs.size(); ++m) v += cos_coeffs[m] * std::cos((m + 1) * u);
    for (size_t m = 0; m < sin_coeffs.size(); ++m) v += sin_coeffs[m] * std::sin((m + 1) * u);
    return v;
}

double TrigPolynomial::d1(double u) const {
    double v = 0.0;
    for (size_t m = 0; m < cos_coeffs.size(); ++m)
        v -= (m + 1) * cos_coeffs[m] * std::sin((m + 1) * u);
    for (size_t m = 0; m < sin_coeffs.size(); ++m)
        v += (m + 1) * sin_coeffs[m] * std::cos((m + 1) * u);
    return v;
}

double TrigPolynomial::d2(double u) const {
    double v = 0.0;
    for (size_t m = 0; m < cos_coeffs.size(); ++m)
        v -= double((m + 1) * (m + 1)) * cos_coeffs[m] * std::cos((m + 1) * u);
    for (size_t m = 0; m < sin_coeffs.size(); ++m)
        v -= double((m + 1) * (m + 1)) * sin_coeffs[m] * std::sin((m + 1) * u);
    return v;
}

// ---- submanifold -------------------------------------------------------------

double CriticalSubmanifold::normal_distance(const Vec3& x) const {
    return kind == SubmanifoldKind::Point ? (x - point).norm() : circle.distance(x);
}

Vec3 CriticalSubmanifold::closest_point(const Vec3& x) const {
    return kind == SubmanifoldKind::Point ? point : circle.closest_point(x);
}

double CriticalSubmanifold::parameter_of(const Vec3& x) const {
    return kind == SubmanifoldKind::Point ? 0.0 : circle.parameter(x);
}

Vec3 CriticalSubmanifold::sample(double u) const {
    return kind == SubmanifoldKind::Point ? point : circle.point(u);
}

// ---- scenario ------------------------------------------------------------------

int MorseBottScenario::find_point(const std::string& label) const {
    for (const auto& q : points)
        if (q.label == label) return q.id;
    throw std::out_of_range("no critical point labelled '" + label + "'");
}

int MorseBottScenario::max_degree() const {
    int k = 0;
    for (const auto& q : points) k = std::max(k, q.total_index);
    return k;
}

std::vector<int> MorseBottScenario::generators_of_degree(int k) const {
    std::vector<int> out;
    for (const auto& q : points)
        if (q.total_index == k) out.push_back(q.id);
    return out;
}

double MorseBottScenario::aux_value(int j, double u) const {
    return submanifolds.at(j).aux.function.value(u);
}

Vec3 circle_in_surface_normal(const MorseBottScenario& sc, int j, double u) {
    const CriticalSubmanifold& C = sc.submanifolds.at(j);
    const Vec3 x = C.circle.point(u);
    return unit_normal(sc.surface, x).cross(C.circle.unit_tangent(u)).normalized();
}

namespace {

std::vector<double> aux_critical_parameters(const TrigPolynomial& f, int samples) {
    std::vector<double> roots;
    const double h = kTwoPi / samples;
    for (int i = 0; i < samples; ++i) {
        double a = i * h, b = (i + 1) * h;
        double fa = f.d1(a), fb = f.d1(b);
        if (fa == 0.0) {
            roots.push_back(a);
            continue;
        }
        if (fb == 0.0 || fa * fb > 0.0) continue;
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = f.d1(m);
            if (fm == 0.0) {
                a = b = m;
                break;
            }
            if (fa * fm < 0.0) {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push_back(wrap_angle(0.5 * (a + b)));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

void finalize_scenario(MorseBottScenario& sc) {
    sc.points.clear();
    for (size_t j = 0; j < sc.submanifolds.size(); ++j) {
        CriticalSubmanifold& C = sc.submanifolds[j];
        C.id = static_cast<int>(j);
        C.aux.host = C.id;
        C.aux.critical_points.clear();
        C.critical_value = sc.f.value(C.sample(0.0));
        std::vector<double> us;
        if (C.kind == SubmanifoldKind::Point) {
            C.aux.function.cos_coeffs.clear();
            C.aux.function.sin_coeffs.clear();
            us.push_back(0.0);
        } else {
            us = aux_critical_parameters(C.aux.function, sc.circle_samples);
        }
        for (size_t k = 0; k < us.size(); ++k) {
            AuxCriticalPoint q;
            q.id = static_cast<int>(sc.points.size());
            q.host = C.id;
            q.u = us[k];
            q.location = C.sample(us[k]);
            q.aux_index = (C.kind == SubmanifoldKind::Circle && C.aux.function.d2(us[k]) < 0.0) ? 1 : 0;
            q.total_index = C.bott_index + q.aux_index;
            q.orientation_tag = k < C.orientation_tags.size() ? C.orientation_tags[k] : 1;
            if (k < C.labels.size())
                q.label = C.labels[k];
            else if (us.size() == 1)
                q.label = C.name;
            else
                q.label = C.name + "#" + std::to_string(k);
            C.aux.critical_points.push_back(q.id);
            sc.points.push_back(q);
        }
    }
}

int total_index(const MorseBottScenario& sc, const AuxCriticalPoint& q) {
    return sc.submanifolds.at(q.host).bott_index + q.aux_index;
}

int arc_of(const MorseBottScenario& sc, int j, double u) {
    const CriticalSubmanifold& C = sc.submanifolds.at(j);
    const auto& ids = C.aux.critical_points;
    if (C.kind == SubmanifoldKind::Point || ids.size() < 2) return 0;
    const double w = wrap_angle(u);
    const int m = static_cast<int>(ids.size());
    for (int k = 0; k + 1 < m; ++k)
        if (w >= sc.point(ids[k]).u && w < sc.point(ids[k + 1]).u) return k;
    return m - 1;  // wraps through 2 pi
}

int arc_sink(const MorseBottScenario& sc, int j, int arc) {
    const CriticalSubmanifold& C = sc.submanifolds.at(j);
    const auto& ids = C.aux.critical_points;
    if (ids.size() == 1) return ids[0];
    const int m = static_cast<int>(ids.size());
    const int a = ids[arc % m], b = ids[(arc + 1) % m];
    return sc.point(a).aux_index == 0 ? a : b;
}

// ---- verification --------------------------------------------------------------

namespace {

// Coefficient of s^2 in f(project(x + s v)) - f(x), least squares with terms s^2..s^5.
double fitted_quadratic(const MorseBottScenario& sc, const Vec3& x, const Vec3& v) {
    const double s0 = 1e-3 * sc.surface.curvature_scale;
    const double f0 = sc.f.value(x);
    Eigen::MatrixXd A(8, 4);
    Eigen::VectorXd b(8);
    int row = 0;
    for (int k = 1; k <= 4; ++k) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
            const double s = sgn * k * s0;
            const Vec3 y = project(sc.surface, x + s * v).coordinates;
            const double t = s / s0;
            A(row, 0) = t * t;
            A(row, 1) = t * t * t;
            A(row, 2) = t * t * t * t;
            A(row, 3) = t * t * t * t * t;
            b(row) = sc.f.value(y) - f0;
            ++row;
        }
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    return c(0) / (s0 * s0);
}

}  // namespace

VerificationReport morse_bott_report(const MorseBottScenario& sc, double tol) {
    VerificationReport rep;
    auto fail = [&](const std::string& msg) {
        if (rep.first_failure.empty()) rep.first_failure = msg;
    };

    for (const CriticalSubmanifold& C : sc.submanifolds) {
        SubmanifoldCheck chk;
        chk.id = C.id;
        chk.name = C.name;
        double fit_err = 0.0;
        if (C.kind == SubmanifoldKind::Point) {
            chk.max_gradient = tangential_gradient(sc.surface, sc.f, C.point).norm();
            const TangentHessian H = tangential_hessian(sc.surface, sc.f, C.point);
            chk.min_normal_hessian = std::min(std::abs(H.eigenvalues[0]), std::abs(H.eigenvalues[1]));
            chk.measured_index = H.index();
            chk.index_constant = chk.measured_index == C.bott_index;
            for (int k = 0; k < 2; ++k) {
                const double lam = H.eigenvalues[k];
                const double twice = 2.0 * fitted_quadratic(sc, C.point, H.ambient_eigenvector(k));
                fit_err = std::max(fit_err, std::abs(twice - lam) / std::max(std::abs(lam), 1e-300));
            }
        } else {
            const int n = sc.circle_samples;
            double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
            double hmin = std::numeric_limits<double>::infinity();
            int neg = 0, pos = 0;
            for (int i = 0; i < n; ++i) {
                const double u = kTwoPi * i / n;
                const Vec3 x = C.circle.point(u);
                chk.max_gradient = std::max(chk.max_gradient, tangential_gradient(sc.surface, sc.f, x).norm());
                const double fv = sc.f.value(x);
                fmin = std::min(fmin, fv);
                fmax = std::max(fmax, fv);
                const Vec3 nu = circle_in_surface_normal(sc, C.id, u);
                const TangentHessian H = tangential_hessian(sc.surface, sc.f, x);
                const Vec2 c(nu.dot(H.frame.e1), nu.dot(H.frame.e2));
                const double hn = c.dot(H.matrix * c);
                hmin = std::min(hmin, std::abs(hn));
                (hn < 0.0 ? neg : pos)++;
                if (i % 64 == 0) {
                    const double twice = 2.0 * fitted_quadratic(sc, x, nu);
                    fit_err = std::max(fit_err, std::abs(twice - hn) / std::max(std::abs(hn), 1e-300));
                }
                const double fj = C.aux.function.value(u);
                if (!(fj > 0.0)) chk.aux_positive = false;
            }
            chk.value_spread = fmax - fmin;
            chk.min_normal_hessian = hmin;
            chk.measured_index = neg == n ? 1 : (pos == n ? 0 : -1);
            chk.index_constant = chk.measured_index == C.bott_index;
            for (int id : C.aux.critical_points)
                if (std::abs(C.aux.function.d2(sc.point(id).u)) < 1e-8) chk.aux_nondegenerate = false;
            if (C.aux.critical_points.size() < 2) chk.aux_nondegenerate = false;
        }
        if (!(C.aux.function.constant > 0.0) && C.kind == SubmanifoldKind::Point) chk.aux_positive = false;
        chk.fit_relative_error = fit_err;

        std::ostringstream where;
        where << "submanifold '" << C.name << "': ";
        if (!(chk.max_gradient < tol)) fail(where.str() + "gradient does not vanish");
        else if (!(chk.value_spread < tol)) fail(where.str() + "f is not constant");
        else if (!(chk.min_normal_hessian > tol)) fail(where.str() + "normal Hessian degenerate");
        else if (!chk.index_constant) fail(where.str() + "index mismatch (declared " +
                                            std::to_string(C.bott_index) + ", measured " +
                                            std::to_string(chk.measured_index) + ")");
        else if (!(chk.fit_relative_error < tol)) fail(where.str() + "quadratic normal model does not fit");
        else if (!chk.aux_positive) fail(where.str() + "auxiliary function not positive");
        else if (!chk.aux_nondegenerate) fail(where.str() + "auxiliary function not Morse");
        chk.passed = chk.max_gradient < tol && chk.value_spread < tol && chk.min_normal_hessian > tol &&
                     chk.index_constant && chk.fit_relative_error < tol && chk.aux_positive &&
                     chk.aux_nondegenerate;
        rep.submanifolds.push_back(chk);
    }

    for (const auto& q : sc.points) rep.euler_sum += (q.total_index % 2 == 0) ? 1 : -1;
    rep.euler_characteristic = sc.surface.euler_characteristic;
    if (rep.euler_sum != rep.euler_characteristic) fail("Euler characteristic mismatch");

    // pairwise separation on samples
    rep.min_pairwise_distance = std::numeric_limits<double>::infinity();
    auto samples = [&](const CriticalSubmanifold& C) {
        std::vector<Vec3> out;
        const int n = C.kind == SubmanifoldKind::Point ? 1 : 128;
        for (int i = 0; i < n; ++i) out.push_back(C.sample(kTwoPi * i / n));
        return out;
    };
    for (size_t a = 0; a < sc.submanifolds.size(); ++a)
        for (size_t b = a + 1; b < sc.submanifolds.size(); ++b) {
            const auto sa = samples(sc.submanifolds[a]);
            for (const Vec3& x : sa)
                rep.min_pairwise_distance =
                    std::min(rep.min_pairwise_distance, sc.submanifolds[b].normal_distance(x));
        }
    if (sc.submanifolds.size() > 1 && !(rep.min_pairwise_distance > 0.0))
        fail("critical submanifolds intersect");

    // no undeclared critical points: refine every local minimum of |grad f| on a 100 x 100 chart grid
    for (const Vec3& x : gradient_grid_minima(sc.surface, sc.f, 100)) {
        const CriticalRefinement r = refine_critical_point(sc.surface, sc.f, x);
        if (!r.converged) continue;
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& C : sc.submanifolds) dmin = std::min(dmin, C.normal_distance(r.x));
        if (dmin > sc.capture_radius) ++rep.undeclared_grid_points;
    }
    if (rep.undeclared_grid_points > 0) fail("undeclared critical points on the verification grid");

    rep.passed = rep.first_failure.empty();
    return rep;
}

VerificationReport verify_morse_bott(const MorseBottScenario& sc, double tol) {
    VerificationReport rep = morse_bott_report(sc, tol);
    if (!rep.passed) throw VerificationFailure(rep.first_failure);
    return rep;
}

// ---- auxiliary flow lines --------------------------------------------------------

AuxFlowCount aux_flow_lines(const MorseBottScenario& sc, int q, int p, double resolution) {
    const AuxCriticalPoint& gq = sc.point(q);
    const AuxCriticalPoint& gp = sc.point(p);
    if (gq.host != gp.host) throw std::invalid_argument("aux_flow_lines: points on different submanifolds");
    const CriticalSubmanifold& C = sc.submanifolds.at(gq.host);
    if (C.kind != SubmanifoldKind::Circle || gq.aux_index - gp.aux_index != 1)
        throw std::invalid_argument("aux_flow_lines: needs an auxiliary index drop of one on a circle");

    const auto& ids = C.aux.critical_points;
    const int m = static_cast<int>(ids.size());
    const int k = static_cast<int>(std::find(ids.begin(), ids.end(), q) - ids.begin());
    AuxFlowCount out;
    for (int dir : {1, -1}) {
        const int next = ids[((k + dir) % m + m) % m];
        if (next != p) continue;
        AuxArc arc;
        arc.direction = dir;
        arc.u_start = gq.u;
        double span = dir * (gp.u - gq.u);
        while (span <= 0.0) span += kTwoPi;
        arc.u_end = gq.u + dir * span;
        const double len = span * C.circle.radius;
        const int nseg = std::max(2, static_cast<int>(std::ceil(len / resolution)));
        for (int i = 0; i <= nseg; ++i)
            arc.polyline.push_back(C.circle.point(arc.u_start + (arc.u_end - arc.u_start) * i / nseg));
        arc.polyline.front() = gq.location;
        arc.polyline.back() = gp.location;
        arc.sign = -flow_line_sign(sc, q, p, arc.polyline);
        out.signed_count += arc.sign;
        out.arcs.push_back(std::move(arc));
    }
    out.z2_count = static_cast<int>(out.arcs.size()) % 2;
    return out;
}

}  // namespace mbcascade
