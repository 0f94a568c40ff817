#pragma once

#include "mbcascade/morse_bott_data.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mbcascade {

struct ExtraCritical : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexDrift : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EpsilonNotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Normal-distance tubes inner (where the bump is 1) and outer (support) around one submanifold.
struct TubularPair {
    int host = -1;
    double inner_radius = 0.1;
    double outer_radius = 0.2;
};

// Quintic smoothstep: 1 for s <= inner, 0 for s >= outer, C^2, strictly decreasing between.
struct BumpProfile {
    double inner = 0.1;
    double outer = 0.2;
    double value(double s) const;
    double derivative(double s) const;
};

struct PerturbationData {
    const MorseBottScenario* scenario = nullptr;
    double epsilon = 0.0;
    std::vector<TubularPair> tubes;
    std::vector<BumpProfile> bumps;
    ScalarField h_eps;

    // auxiliary function of tube k extended constantly along normals (closest-point rule)
    double extended_aux(int k, const Vec3& x) const;
    Vec3 extended_aux_gradient(int k, const Vec3& x) const;
    double bump(int k, const Vec3& x) const;
};

std::vector<TubularPair> uniform_tubes(const MorseBottScenario& sc, double inner, double outer);

PerturbationData build_h_eps(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes,
                             double epsilon);

struct TubeConditions {
    int host = -1;
    double eps_term_sup = 0.0;      // sup over the shell of eps |grad(rho f_k)|
    double gradient_inf = 0.0;      // inf over the shell of |grad f|
    bool eps_bound = false;
    double variation = 0.0;         // sup f - inf f on the tube
    double orthogonality = 0.0;     // max normalized |<grad f, grad f_k>| on the tube
    bool orthogonality_ok = false;
    double model_fit = 0.0;         // relative deviation from the quadratic normal model
    bool model_ok = false;
    int tube_samples = 0;
    int shell_samples = 0;
};

struct PairConditions {
    int i = -1, j = -1;
    double variation_sum = 0.0;
    double value_gap_third = 0.0;
    bool ok = false;
};

struct ConditionReport {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::vector<TubeConditions> tubes;
    std::vector<PairConditions> pairs;
    bool disjoint = false;
    double min_decrement = 0.0;       // along sampled flow lines between tubes
    double required_decrement = 0.0;  // three times the largest variation
    bool decrement_ok = false;
    bool passed = false;
    std::string first_failure;
};

struct SmallnessSettings {
    int samples = 10000;
    std::uint64_t seed = 20240611;
    double orthogonality_tol = 1e-3;
    double model_tol = 0.1;
    int boundary_flows = 8;
};

ConditionReport check_smallness(const PerturbationData& pd, const SmallnessSettings& cfg = {});

struct HCriticalPoint {
    int generator = -1;
    Vec3 location = Vec3::Zero();
    int index = -1;
    double offset = 0.0;    // distance from the generator's declared location
    double gradient = 0.0;  // residual |grad h| after refinement
};

struct CriticalSweep {
    std::vector<HCriticalPoint> points;
    int grid_minima = 0;
    int refined_zeros = 0;
};

// Newton refinement at every generator plus a chart-grid sweep for undeclared zeros.
// Throws ExtraCritical or IndexDrift.
CriticalSweep critical_points_of_h(const PerturbationData& pd, int grid = 100);

struct EpsilonChoice {
    double epsilon = 0.0;
    int halvings = 0;
    ConditionReport conditions;
    CriticalSweep critical;
    std::vector<std::string> rejected;  // reason per rejected candidate
};

// Halve from `start` until check_smallness, critical_points_of_h and `accept` all pass.
EpsilonChoice auto_epsilon(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes,
                           const std::function<bool(const PerturbationData&)>& accept = {},
                           double start = 0.1, int max_halvings = 20,
                           const SmallnessSettings& cfg = {});

}  // namespace mbcascade
