#pragma once

#include "mbcascade/morse_bott_data.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mbcascade {

struct IndexMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AmbiguousTransition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegratorSettings {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double max_step = 0.05;
    int max_steps = 400000;
    double linearize_below = 1e-6;   // gradient norm that triggers the frozen-Hessian segment
    double linearized_time = 1e3;
};

struct StopRule {
    double gradient_tol = 1e-9;
    double time_budget = 1e3;
    double value_floor = -std::numeric_limits<double>::infinity();
    std::function<bool(const Vec3&)> capture;  // optional
};

enum class TerminalStatus { Converged, Escaped, Budget };
const char* to_string(TerminalStatus s);

struct Trajectory {
    std::vector<Vec3> points;
    std::vector<double> times;
    std::vector<Vec3> velocities;  // field value at each point, for dense output
    TerminalStatus status = TerminalStatus::Budget;
    bool captured = false;
    std::string target;
};

// Adaptive Dormand-Prince 5(4) on sign * grad_M(field), projecting every accepted
// step back to the surface. sign = -1 is the negative gradient flow.
Trajectory integrate(const SurfaceModel& s, const ScalarField& field, const Vec3& x0,
                     const StopRule& stop, const IntegratorSettings& cfg = {}, double sign = -1.0);

// Cubic Hermite resampling so consecutive points are at most `resolution` apart.
std::vector<Vec3> densify(const SurfaceModel& s, const Trajectory& t, double resolution);

enum class SeedMode { Full, Normal };

// Points at distance ~delta from `base` in the negative eigenspace of the relevant Hessian.
// Full: tangential Hessian of `field` (count points on a circle for index 2, two for index 1).
// Normal: the in-surface normal direction of circle `host` (two points when unstable).
std::vector<Vec3> unstable_seeds(const MorseBottScenario& sc, const ScalarField& field,
                                 const Vec3& base, int expected_index, double delta, int count,
                                 SeedMode mode = SeedMode::Full, int host = -1);

// ---- landings -----------------------------------------------------------------

struct CaptureSettings {
    double circle_eta = 1e-9;   // normal distance to a critical circle, times curvature scale
    double point_eta = 1e-6;    // distance to a non-minimum point submanifold (hyperbolic passage ~ sqrt of offset)
    double sink_radius = 1e-6;  // distance to a minimum point submanifold
    double landing_tol = 1e-8;  // circle parameter tolerance for landing on an auxiliary point
};

enum class LandingKind { None, Point, Circle };

struct Landing {
    LandingKind kind = LandingKind::None;
    int submanifold = -1;
    double u = 0.0;
    int side = 0;
    int arc = -1;
    int quadrant = -1;
    int destination = -1;  // auxiliary critical point reached (directly or by drift)
    bool isolated = false; // non-generic landing: separatrix, saddle or exact auxiliary point
    Vec3 location = Vec3::Zero();

    std::string key() const;
};

struct FlowContext {
    const MorseBottScenario* scenario = nullptr;
    ScalarField field;
    int source_submanifold = -1;  // excluded point submanifold
    IntegratorSettings ode;
    StopRule stop;
    CaptureSettings capture;

    explicit FlowContext(const MorseBottScenario& sc);
    FlowContext(const MorseBottScenario& sc, ScalarField f);
    void prepare();  // caches sink frames; call after changing field

    std::vector<TangentFrame> sink_frames;
    std::vector<Mat2> sink_eigvecs;
};

Trajectory flow_to_landing(const FlowContext& ctx, const Vec3& x0);
Landing classify_landing(const FlowContext& ctx, const Trajectory& t);
// Grazing check: re-integrates from the capture point with every tube shrunk 100-fold and
// compares landing submanifolds. Isolated (saddle) landings are accepted as they are.
bool landing_confirmed(const FlowContext& ctx, const Trajectory& t);

// ---- shooting -------------------------------------------------------------------

struct SeedPoint {
    Vec3 start = Vec3::Zero();
    Vec3 base = Vec3::Zero();
};

struct SeedFamily {
    bool periodic = false;
    double lo = 0.0, hi = 0.0;
    std::function<SeedPoint(double)> at;
    std::vector<double> discrete;  // when non-empty the family is this finite set
    std::string label;
};

struct ShootSettings {
    int samples = 64;
    double bisection_tol = 1e-12;
};

struct ShootResult {
    double parameter = 0.0;
    SeedPoint seed;
    Trajectory trajectory;
    Landing landing;
    std::string family;
};

struct ShootOutcome {
    std::vector<ShootResult> results;   // landings satisfying the target, sorted by parameter
    std::vector<ShootResult> isolated;  // every isolated landing found
    bool continuum = false;
    int spurious = 0;                   // transitions that did not converge onto a separatrix
    int integrations = 0;
    std::vector<std::string> notes;
};

// Scans the family at `samples` points, bisects every change of landing class to
// `bisection_tol`, deduplicates, and flags a continuum when the target is met on an
// open set. Throws AmbiguousTransition when a bisection meets a third class.
ShootOutcome shoot_connecting_orbits(const FlowContext& ctx, const SeedFamily& family,
                                     const std::function<bool(const Landing&)>& target,
                                     const ShootSettings& cfg = {});

// Retries with doubled sample counts on AmbiguousTransition.
ShootOutcome shoot_with_refinement(const FlowContext& ctx, const SeedFamily& family,
                                   const std::function<bool(const Landing&)>& target,
                                   ShootSettings cfg, int max_doublings = 3);

// Polyline from the seed base point to the landing destination: backward flow from the
// seed (closed along the source circle when it lands there), dense forward trajectory,
// then drift along the landing circle. The limits are where the flow leaves the source
// submanifold and where it meets the target submanifold.
struct CompletedPath {
    std::vector<Vec3> polyline;
    Vec3 backward_limit = Vec3::Zero();
    Vec3 forward_limit = Vec3::Zero();
    size_t head_end = 0;     // polyline index of the backward limit
    size_t tail_begin = 0;   // polyline index of the forward limit
};
CompletedPath complete_path(const FlowContext& ctx, const ShootResult& r, double resolution,
                            int source_host, double delta);

// Samples of a circle arc from u0 to u1 (unwrapped) at spacing <= resolution.
std::vector<Vec3> circle_arc(const CircleGeometry& c, double u0, double u1, double resolution);

}  // namespace mbcascade
