#include "mbcascade/manifold_model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace mbcascade {

namespace {
constexpr double kPi = 3.14159265358979323846;

void orthonormal_complement(const Vec3& a, Vec3& e1, Vec3& e2) {
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(a[i]) < std::abs(a[k])) k = i;
    Vec3 ref = Vec3::Zero();
    ref[k] = 1.0;
    e1 = (ref - ref.dot(a) * a).normalized();
    e2 = a.cross(e1);
}
}  // namespace

SurfaceModel make_sphere(double radius, const Vec3& center) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    SurfaceModel s;
    s.name = "sphere";
    s.implicit_function = [radius, center](const Vec3& x) {
        return (x - center).squaredNorm() - radius * radius;
    };
    s.implicit_gradient = [center](const Vec3& x) -> Vec3 { return 2.0 * (x - center); };
    s.box_min = center - Vec3::Constant(1.5 * radius);
    s.box_max = center + Vec3::Constant(1.5 * radius);
    s.curvature_scale = radius;
    s.diameter = 2.0 * radius;
    s.euler_characteristic = 2;
    s.chart = [radius, center](double a, double b) -> Vec3 {
        const double th = kPi * a, ph = 2.0 * kPi * b;
        return center + radius * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                      std::cos(th));
    };
    s.chart_periodic_s = false;
    return s;
}

SurfaceModel make_torus(double R, double r, const Vec3& axis_in) {
    if (!(r > 0.0) || !(R > r)) throw std::invalid_argument("torus needs R > r > 0");
    const Vec3 a = axis_in.normalized();
    SurfaceModel s;
    s.name = "torus";
    s.implicit_function = [R, r, a](const Vec3& x) {
        const double n2 = x.squaredNorm();
        const double w = n2 + R * R - r * r;
        const double h = x.dot(a);
        return w * w - 4.0 * R * R * (n2 - h * h);
    };
    s.implicit_gradient = [R, r, a](const Vec3& x) -> Vec3 {
        const double w = x.squaredNorm() + R * R - r * r;
        return 4.0 * w * x - 8.0 * R * R * (x - x.dot(a) * a);
    };
    s.box_min = Vec3::Constant(-1.5 * (R + r));
    s.box_max = Vec3::Constant(1.5 * (R + r));
    s.curvature_scale = r;
    s.diameter = 2.0 * (R + r);
    s.euler_characteristic = 0;
    Vec3 e1, e2;
    orthonormal_complement(a, e1, e2);
    s.chart = [R, r, a, e1, e2](double sv, double tu) -> Vec3 {
        const double v = 2.0 * kPi * sv, u = 2.0 * kPi * tu;
        const Vec3 radial = std::cos(u) * e1 + std::sin(u) * e2;
        return (R + r * std::cos(v)) * radial + r * std::sin(v) * a;
    };
    s.chart_periodic_s = true;
    return s;
}

bool in_bounding_box(const SurfaceModel& s, const Vec3& x) {
    return (x.array() >= s.box_min.array()).all() && (x.array() <= s.box_max.array()).all();
}

SurfacePoint project(const SurfaceModel& s, const Vec3& x0, const ProjectionSettings& cfg) {
    if (!in_bounding_box(s, x0)) throw NoConvergence("point outside bounding box");
    Vec3 x = x0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const double F = s.implicit_function(x);
        const Vec3 g = s.implicit_gradient(x);
        const double g2 = g.squaredNorm();
        if (std::abs(F) < cfg.tolerance) {
            // one more step polishes to roundoff; keep it only if it does not hurt
            if (g2 > 0.0) {
                const Vec3 y = x - (F / g2) * g;
                const double Fy = s.implicit_function(y);
                if (std::abs(Fy) <= std::abs(F)) return {y, std::abs(Fy)};
            }
            return {x, std::abs(F)};
        }
        if (!(g2 > 1e-24)) throw NoConvergence("degenerate implicit gradient during projection");
        x -= (F / g2) * g;
        if (!x.allFinite() || !in_bounding_box(s, x))
            throw NoConvergence("projection left the bounding box");
    }
    throw NoConvergence("projection did not converge in the iteration limit");
}

Vec3 unit_normal(const SurfaceModel& s, const Vec3& p) {
    return s.implicit_gradient(p).normalized();
}

Vec3 tangential_gradient(const SurfaceModel& s, const ScalarField& field, const Vec3& p) {
    const Vec3 n = unit_normal(s, p);
    const Vec3 g = field.ambient_gradient(p);
    return g - g.dot(n) * n;
}

TangentFrame tangent_frame(const SurfaceModel& s, const Vec3& p, double rotation) {
    TangentFrame f;
    f.normal = unit_normal(s, p);
    Vec3 e1, e2;
    orthonormal_complement(f.normal, e1, e2);
    const double c = std::cos(rotation), sn = std::sin(rotation);
    f.e1 = c * e1 + sn * e2;
    f.e2 = -sn * e1 + c * e2;
    return f;
}

int TangentHessian::index(double zero_tol) const {
    int k = 0;
    for (int i = 0; i < 2; ++i)
        if (eigenvalues[i] < -zero_tol) ++k;
    return k;
}

Vec3 TangentHessian::ambient_eigenvector(int k) const {
    return eigenvectors(0, k) * frame.e1 + eigenvectors(1, k) * frame.e2;
}

TangentHessian tangential_hessian(const SurfaceModel& s, const ScalarField& field, const Vec3& p,
                                  double rotation, double fd_relative_step) {
    TangentHessian out;
    out.frame = tangent_frame(s, p, rotation);
    const double h = fd_relative_step * s.curvature_scale;
    const Vec3 dirs[2] = {out.frame.e1, out.frame.e2};
    Mat2 H;
    for (int j = 0; j < 2; ++j) {
        const Vec3 xp = project(s, p + h * dirs[j]).coordinates;
        const Vec3 xm = project(s, p - h * dirs[j]).coordinates;
        const Vec3 dg = (tangential_gradient(s, field, xp) - tangential_gradient(s, field, xm)) /
                        (xp - xm).norm();
        for (int i = 0; i < 2; ++i) H(i, j) = dirs[i].dot(dg);
    }
    out.asymmetry = std::abs(H(0, 1) - H(1, 0));
    out.matrix = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat2> es(out.matrix);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    return out;
}

CriticalRefinement refine_critical_point(const SurfaceModel& s, const ScalarField& field, Vec3 x,
                                         int max_iterations) {
    const double cap = 0.05 * s.curvature_scale;
    CriticalRefinement r;
    r.x = x;
    r.gradient = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iterations; ++it) {
        const Vec3 g = tangential_gradient(s, field, x);
        r.hessian = tangential_hessian(s, field, x);
        r.gradient = g.norm();
        r.x = x;
        if (r.gradient < 1e-13) {
            r.converged = true;
            return r;
        }
        const Vec2 gf(g.dot(r.hessian.frame.e1), g.dot(r.hessian.frame.e2));
        Vec2 step = -r.hessian.matrix.fullPivLu().solve(gf);
        if (!step.allFinite()) return r;
        if (step.norm() > cap) step *= cap / step.norm();
        try {
            x = project(s, x + step[0] * r.hessian.frame.e1 + step[1] * r.hessian.frame.e2).coordinates;
        } catch (const NoConvergence&) {
            return r;
        }
        if (step.norm() < 1e-14 * s.curvature_scale) {
            r.x = x;
            r.gradient = tangential_gradient(s, field, x).norm();
            r.hessian = tangential_hessian(s, field, x);
            r.converged = r.gradient < 1e-10;
            return r;
        }
    }
    r.converged = r.gradient < 1e-10;
    return r;
}

std::vector<Vec3> gradient_grid_minima(const SurfaceModel& s, const ScalarField& field, int grid) {
    const double inf = std::numeric_limits<double>::infinity();
    const size_t n = static_cast<size_t>(grid);
    std::vector<Vec3> X(n * n, Vec3::Zero());
    std::vector<double> G(X.size(), inf);
    for (int i = 0; i < grid; ++i)
        for (int k = 0; k < grid; ++k) {
            const size_t id = static_cast<size_t>(i) * n + static_cast<size_t>(k);
            try {
                X[id] = project(s, s.chart((i + 0.5) / grid, (k + 0.5) / grid)).coordinates;
                G[id] = tangential_gradient(s, field, X[id]).norm();
            } catch (const NoConvergence&) {
            }
        }
    std::vector<Vec3> out;
    for (int i = 0; i < grid; ++i)
        for (int k = 0; k < grid; ++k) {
            const size_t id = static_cast<size_t>(i) * n + static_cast<size_t>(k);
            if (std::isinf(G[id])) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dk = -1; dk <= 1; ++dk) {
                    if (di == 0 && dk == 0) continue;
                    int ii = i + di;
                    if (s.chart_periodic_s) ii = (ii + grid) % grid;
                    else if (ii < 0 || ii >= grid) continue;
                    const int kk = (k + dk + grid) % grid;
                    if (G[static_cast<size_t>(ii) * n + static_cast<size_t>(kk)] < G[id]) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) out.push_back(X[id]);
        }
    return out;
}

}  // namespace mbcascade
