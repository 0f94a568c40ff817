#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbcascade {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ambient function on 3-space; restricted to the surface it is the object of study.
struct ScalarField {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> ambient_gradient;
};

// Zero level set of a smooth function F with the metric induced from R^3.
struct SurfaceModel {
    std::string name;
    std::function<double(const Vec3&)> implicit_function;
    std::function<Vec3(const Vec3&)> implicit_gradient;
    Vec3 box_min = Vec3::Constant(-1.0);
    Vec3 box_max = Vec3::Constant(1.0);
    double curvature_scale = 1.0;  // smallest principal radius, sets finite-difference steps
    double diameter = 2.0;
    int euler_characteristic = 2;
    // Rough chart (s,t) in [0,1]^2 -> point near the surface; used for grid sweeps only.
    std::function<Vec3(double, double)> chart;
    // true when the chart wraps in s (torus) rather than collapsing at s = 0, 1 (sphere)
    bool chart_periodic_s = false;
};

struct SurfacePoint {
    Vec3 coordinates = Vec3::Zero();
    double residual = 0.0;
};

struct ProjectionSettings {
    double tolerance = 1e-10;
    int max_iterations = 50;
};

SurfaceModel make_sphere(double radius, const Vec3& center = Vec3::Zero());
// Torus of revolution: centre circle of radius R around `axis`, tube radius r < R.
SurfaceModel make_torus(double R, double r, const Vec3& axis);

bool in_bounding_box(const SurfaceModel& s, const Vec3& x);

// Newton iteration along grad F; throws NoConvergence after max_iterations.
SurfacePoint project(const SurfaceModel& s, const Vec3& x, const ProjectionSettings& cfg = {});

Vec3 unit_normal(const SurfaceModel& s, const Vec3& p);

// Riemannian gradient of the restriction: grad f - <grad f, n> n.
Vec3 tangential_gradient(const SurfaceModel& s, const ScalarField& field, const Vec3& p);
inline Vec3 tangential_gradient(const SurfaceModel& s, const ScalarField& field,
                                const SurfacePoint& p) {
    return tangential_gradient(s, field, p.coordinates);
}

// Orthonormal tangent frame (e1, e2) with e1 x e2 = n; `rotation` turns it within the plane.
struct TangentFrame {
    Vec3 e1, e2, normal;
};
TangentFrame tangent_frame(const SurfaceModel& s, const Vec3& p, double rotation = 0.0);

struct TangentHessian {
    Mat2 matrix = Mat2::Zero();      // in the frame (e1, e2)
    TangentFrame frame;
    Vec2 eigenvalues = Vec2::Zero();  // ascending
    Mat2 eigenvectors = Mat2::Identity();  // columns, frame coordinates
    double asymmetry = 0.0;           // |H12 - H21| before symmetrisation

    int index(double zero_tol = 0.0) const;
    Vec3 ambient_eigenvector(int k) const;
};

// Central differences of the tangential gradient along the frame directions,
// step = fd_relative_step * curvature_scale.
TangentHessian tangential_hessian(const SurfaceModel& s, const ScalarField& field, const Vec3& p,
                                  double rotation = 0.0, double fd_relative_step = 1e-4);

struct CriticalRefinement {
    Vec3 x = Vec3::Zero();
    double gradient = 0.0;
    bool converged = false;
    TangentHessian hessian;
};

// Newton iteration on the tangential gradient, steps capped at 5% of the curvature scale.
CriticalRefinement refine_critical_point(const SurfaceModel& s, const ScalarField& field, Vec3 x,
                                         int max_iterations = 100);

// Chart-grid cells whose |grad| is a local minimum among their eight neighbours.
std::vector<Vec3> gradient_grid_minima(const SurfaceModel& s, const ScalarField& field, int grid);

}  // namespace mbcascade
