#pragma once

#include "mbcascade/chain_complexes.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mbcascade {

struct MatchReport {
    int q = -1, p = -1;
    double epsilon = 0.0;
    int cascade_count = 0;
    int flow_count = 0;
    Eigen::MatrixXd distance_matrix;          // cascades x flow lines
    std::vector<std::pair<int, int>> matching;  // (cascade, flow line)
    std::vector<double> distances;              // per matched pair
    std::vector<double> second_best;            // per matched cascade row
    double threshold = 0.0;
    std::vector<int> unmatched_cascades;
    std::vector<int> unmatched_flows;
    std::vector<std::optional<int>> cascade_signs;  // carried through the matching
    long long signed_count_h = 0;
    long long signed_count_cascades = 0;
    bool path_signs_agree = true;  // intrinsic path signs of matched pairs coincide
    bool passed = false;
    std::string reason;
    std::vector<std::string> notes;
};

struct Ambiguous : std::runtime_error {
    Ambiguous(const std::string& m, MatchReport r) : std::runtime_error(m), report(std::move(r)) {}
    MatchReport report;
};
struct CountMismatch : std::runtime_error {
    CountMismatch(const std::string& m, MatchReport r) : std::runtime_error(m), report(std::move(r)) {}
    MatchReport report;
};
struct PreconditionFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Greedy minimal-distance matching of enumerated cascades and gradient lines of h.
// Throws CountMismatch or Ambiguous (both carry the report).
MatchReport match_moduli(const MorseBottScenario& sc, const CascadeEnumeration& cascades,
                         const HFlowEnumeration& flows, double resolution = 1e-3);

// Enumerates both sides at eps; refuses to run when the smallness conditions fail.
MatchReport match_moduli(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes, int q,
                         int p, double epsilon, const CascadeSettings& cfg = {});

struct SweepRow {
    double epsilon = 0.0;
    int flow_count = 0;
    long long signed_count_h = 0;
    long long signed_count_cascades = 0;
    std::vector<double> distances;  // per cascade, NaN when unmatched
    bool matched = false;
    std::string note;
};

struct SweepSettings {
    double monotone_slack = 0.10;
    double final_fraction = 1e-2;   // of the surface diameter
    double convergence_ratio = 0.25;
    double exact_floor = 1e-6;      // of the diameter: distances below count as converged
};

struct SweepReport {
    int q = -1, p = -1;
    int cascade_count = 0;
    std::vector<SweepRow> rows;
    bool counts_constant = false;
    bool signs_constant = false;
    bool sign_relation = false;  // n^c = -n_h at every epsilon
    bool monotone = false;
    bool final_small = false;
    bool ratio_ok = false;
    std::vector<double> ratios;  // per cascade, smallest-eps over largest-eps distance
    bool passed = false;         // counts, monotonicity and final size
    std::vector<std::string> notes;
};

// Sweep over a decreasing schedule, reusing one cascade enumeration per pair.
std::vector<SweepReport> eps_sweep(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes,
                                   const std::vector<CascadeEnumeration>& cascades,
                                   const std::vector<double>& schedule, const CascadeSettings& cfg = {},
                                   const SweepSettings& sw = {});
SweepReport eps_sweep(const MorseBottScenario& sc, const std::vector<TubularPair>& tubes, int q, int p,
                      const std::vector<double>& schedule, const CascadeSettings& cfg = {},
                      const SweepSettings& sw = {});

// eps0 * 10^(-k/3), k = 0..count-1
std::vector<double> geometric_schedule(double eps0, int count = 7, double decades = 2.0);

// One row per epsilon: epsilon, flow_count, signed_count, then one distance column per cascade.
void write_sweep_csv(const SweepReport& r, const std::string& path);

}  // namespace mbcascade
