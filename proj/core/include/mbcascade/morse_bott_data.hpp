#pragma once

#include "mbcascade/manifold_model.hpp"

#include <string>
#include <vector>

namespace mbcascade {

struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SubmanifoldKind { Point, Circle };

// Round circle in 3-space: center + radius (cos u e1 + sin u e2).
struct CircleGeometry {
    Vec3 center = Vec3::Zero();
    Vec3 e1 = Vec3::UnitX();
    Vec3 e2 = Vec3::UnitY();
    double radius = 1.0;

    Vec3 point(double u) const;
    Vec3 unit_tangent(double u) const;  // direction of increasing u
    double parameter(const Vec3& x) const;  // in [0, 2 pi)
    Vec3 parameter_gradient(const Vec3& x) const;
    Vec3 closest_point(const Vec3& x) const;
    double distance(const Vec3& x) const;
};

// c + sum_m (a_m cos(m u) + b_m sin(m u)), m = 1, 2, ...
struct TrigPolynomial {
    double constant = 1.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    double value(double u) const;
    double d1(double u) const;
    double d2(double u) const;
};

struct AuxCriticalPoint {
    int id = -1;
    int host = -1;
    double u = 0.0;
    Vec3 location = Vec3::Zero();
    int aux_index = 0;
    int total_index = 0;
    int orientation_tag = 1;
    std::string label;
};

struct AuxiliaryMorse {
    int host = -1;
    TrigPolynomial function;          // constant only for point submanifolds
    std::vector<int> critical_points;  // ids into MorseBottScenario::points, sorted by u
};

struct CriticalSubmanifold {
    int id = -1;
    std::string name;
    SubmanifoldKind kind = SubmanifoldKind::Point;
    Vec3 point = Vec3::Zero();
    CircleGeometry circle;
    int bott_index = 0;
    double critical_value = 0.0;
    AuxiliaryMorse aux;
    // declared labels and orientation tags for the auxiliary critical points, in order of u
    std::vector<std::string> labels;
    std::vector<int> orientation_tags;

    int dim() const { return kind == SubmanifoldKind::Point ? 0 : 1; }
    double normal_distance(const Vec3& x) const;
    Vec3 closest_point(const Vec3& x) const;
    double parameter_of(const Vec3& x) const;
    Vec3 sample(double u) const;
};

struct MorseBottScenario {
    std::string name;
    SurfaceModel surface;
    ScalarField f;
    std::vector<CriticalSubmanifold> submanifolds;
    std::vector<AuxCriticalPoint> points;
    double capture_radius = 0.05;
    int circle_samples = 512;

    const AuxCriticalPoint& point(int id) const { return points.at(id); }
    const CriticalSubmanifold& host_of(int id) const { return submanifolds.at(points.at(id).host); }
    int find_point(const std::string& label) const;
    int max_degree() const;
    std::vector<int> generators_of_degree(int k) const;
    // auxiliary function f_j at parameter u (constant for points)
    double aux_value(int j, double u) const;
};

// Fills critical values, auxiliary critical points, total indices and labels.
void finalize_scenario(MorseBottScenario& sc);

// Unit normal to a circle inside the surface, n x t.
Vec3 circle_in_surface_normal(const MorseBottScenario& sc, int j, double u);

struct SubmanifoldCheck {
    int id = -1;
    std::string name;
    double max_gradient = 0.0;
    double value_spread = 0.0;
    double min_normal_hessian = 0.0;  // min |eigenvalue| of the normal Hessian
    double fit_relative_error = 0.0;   // quadratic fit along normal rays vs Hessian
    int measured_index = -1;
    bool index_constant = true;
    bool aux_positive = true;
    bool aux_nondegenerate = true;
    bool passed = false;
};

struct VerificationReport {
    std::vector<SubmanifoldCheck> submanifolds;
    int euler_sum = 0;
    int euler_characteristic = 0;
    double min_pairwise_distance = 0.0;
    int undeclared_grid_points = 0;
    bool passed = false;
    std::string first_failure;
};

// Report without throwing.
VerificationReport morse_bott_report(const MorseBottScenario& sc, double tol);
// Same report; throws VerificationFailure naming the first violated invariant.
VerificationReport verify_morse_bott(const MorseBottScenario& sc, double tol);

int total_index(const MorseBottScenario& sc, const AuxCriticalPoint& q);

// One arc of a circle's auxiliary gradient flow.
struct AuxArc {
    double u_start = 0.0;
    double u_end = 0.0;   // unwrapped: u_end - u_start has the sign of the direction
    int direction = 1;
    int sign = 0;         // cascade-complex sign of this zero-cascade flow line
    std::vector<Vec3> polyline;
};

struct AuxFlowCount {
    int signed_count = 0;
    int z2_count = 0;
    std::vector<AuxArc> arcs;
};

// Gradient lines of f_j from q to p inside one circle; needs aux index drop of one.
AuxFlowCount aux_flow_lines(const MorseBottScenario& sc, int q, int p, double resolution = 1e-3);

// Arc of a circle between consecutive auxiliary critical points containing u.
int arc_of(const MorseBottScenario& sc, int j, double u);
// The auxiliary minimum bounding the given arc (the drift destination).
int arc_sink(const MorseBottScenario& sc, int j, int arc);

double wrap_angle(double u);  // into [0, 2 pi)
double angle_difference(double a, double b);  // a - b into (-pi, pi]

}  // namespace mbcascade
