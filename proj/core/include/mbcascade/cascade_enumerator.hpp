#pragma once

#include "mbcascade/flow_engine.hpp"

#include <limits>
#include <string>
#include <vector>

namespace mbcascade {

struct ContinuumDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySet : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CascadeSettings {
    double delta = 1e-3;          // seed offset from the source
    int samples = 64;             // scan size of continuous seed families
    double bisection_tol = 1e-12;
    int max_doublings = 3;
    double resolution = 1e-3;     // polyline spacing
    bool allow_index_gap = false; // negative control: permit total index drop != 1
    IntegratorSettings ode;
    CaptureSettings capture;
};

struct CascadeFlowLine {
    int q = -1, p = -1;
    int n = 0;
    std::vector<Trajectory> cascades;
    std::vector<int> intermediate;      // submanifold ids between cascades
    std::vector<double> drift_times;
    // enumeration provenance
    double parameter = 0.0;
    std::string family;
    Landing landing;
    Vec3 backward_limit = Vec3::Zero();
    Vec3 forward_limit = Vec3::Zero();
    // continuous path q -> p: source arc, cascades with drift arcs, target arc
    std::vector<Vec3> polyline;
    int path_sign = 0;  // orientation sign of the path, diagnostic only
};

struct CascadeEnumeration {
    int q = -1, p = -1;
    std::vector<CascadeFlowLine> cascades;
    std::vector<std::string> notes;
    int integrations = 0;
};

// All flow lines with cascades from q to p (total index drop one).
// Throws ContinuumDetected when a qualifying open family appears.
CascadeEnumeration enumerate_cascades(const MorseBottScenario& sc, int q, int p,
                                      const CascadeSettings& cfg = {});

// Seed family for shooting out of q under `field`: the normal unstable sphere of the host
// (f-cascades) or the Hessian unstable sphere of `field` at q (gradient lines of h).
std::vector<SeedFamily> cascade_seed_families(const MorseBottScenario& sc, int q, double delta);
std::vector<SeedFamily> morse_seed_families(const MorseBottScenario& sc, const ScalarField& field,
                                            int q, double delta);

struct CascadeImage {
    std::vector<Vec3> points;
    std::vector<double> time_vector;  // one entry per critical submanifold
};

CascadeImage image_of(const MorseBottScenario& sc, const CascadeFlowLine& c, double resolution);

// Linking invariants of a flow line with cascades, each within `tol`.
struct LinkCheck {
    double source_gap = 0.0;  // closest approach to q of the +grad f_j flow from the backward limit
    double target_gap = 0.0;  // closest approach to p of the -grad f_i flow from the forward limit
    double link_gap = 0.0;    // max over drifts
    bool nonconstant = true;
    bool passed = false;
};
LinkCheck check_links(const MorseBottScenario& sc, const CascadeFlowLine& c, double tol = 1e-4);

// Flow of -grad f_j along circle j for time t (negative t flows backward); returns u(t).
double drift_on_circle(const MorseBottScenario& sc, int j, double u, double t);

// Def.-17 style hybrid flow: drift on a critical circle, rest on a critical point,
// otherwise the negative gradient flow of f.
Vec3 hybrid_flow(const MorseBottScenario& sc, const Vec3& x, double t, double capture_tol = 1e-9);

// ---- distances ------------------------------------------------------------------

double compactify(double t);  // t / sqrt(1 + t^2), 1 at +infinity

// Exact directed and symmetric Hausdorff distance of finite point sets.
double directed_hausdorff(const std::vector<Vec3>& A, const std::vector<Vec3>& B);
double hausdorff_distance(const std::vector<Vec3>& A, const std::vector<Vec3>& B);
// Product metric with compactified time vectors, aggregated by maximum.
double hausdorff_distance(const std::vector<Vec3>& A, const std::vector<Vec3>& B,
                          const std::vector<double>& ta, const std::vector<double>& tb);
double time_vector_distance(const std::vector<double>& a, const std::vector<double>& b);

// Distance of polyline images: vertices of one against segments of the other.
double image_distance(const CascadeImage& a, const CascadeImage& b);

}  // namespace mbcascade
