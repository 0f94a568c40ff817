#pragma once

#include "mbcascade/correspondence_checker.hpp"
#include "mbcascade/scenario.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mbcascade {

enum Stage : unsigned {
    kStageVerify = 1u << 0,
    kStageCascades = 1u << 1,
    kStagePerturb = 1u << 2,
    kStageComplex = 1u << 3,
    kStageCorrespond = 1u << 4,
    kStageAll = 0x1fu,
};

// "verify,cascades" -> mask; "all" selects every stage. Throws std::invalid_argument.
unsigned parse_stages(const std::string& list);
std::vector<std::string> stage_names(unsigned mask);

struct StageFailure {
    std::string stage;
    std::string message;
};

struct ComplexSummary {
    GradedComplex complex;
    HomologyResult homology;
};

// Everything a pipeline run produces. Sections exist only for the stages that were requested;
// prerequisites of a requested stage run but are not reported.
struct PipelineReport {
    std::string scenario_name;
    std::string scenario_json;  // canonical configuration, including the seed
    std::uint64_t seed = 0;
    unsigned stages = 0;
    std::vector<std::string> labels;  // auxiliary critical point labels by id

    std::optional<VerificationReport> verification;

    std::vector<CascadeEnumeration> cascades;  // one per adjacent pair
    CountTable cascade_counts_z;               // minus the summed path signs
    CountTable cascade_counts_z2;

    std::optional<double> epsilon;
    bool epsilon_overridden = false;
    std::optional<EpsilonChoice> epsilon_choice;
    std::optional<ConditionReport> conditions;
    std::optional<CriticalSweep> critical;

    std::vector<HFlowEnumeration> flows;  // one per adjacent pair, at epsilon
    CountTable h_counts;
    CountTable matched_cascade_counts;  // signs carried through the matching
    std::optional<ComplexSummary> h_complex;
    std::optional<ComplexSummary> cascade_complex;
    std::optional<ComplexSummary> cascade_complex_z2;
    std::vector<int> expected_betti;
    bool boundary_relation = false;  // cascade boundary = -(h boundary) entrywise
    bool path_signs_agree = false;

    std::vector<MatchReport> matches;
    std::vector<double> schedule;
    std::vector<SweepReport> sweeps;

    std::map<std::string, double> timings;  // seconds per stage, kept out of the report file
    std::vector<StageFailure> failures;
    bool passed = false;

    const StageFailure* first_failure() const { return failures.empty() ? nullptr : &failures.front(); }
};

PipelineReport run_pipeline(const ScenarioConfig& cfg, unsigned stages = kStageAll);

// Deterministic JSON of the report (no timings) and the timings alone.
std::string report_to_json(const PipelineReport& r);
std::string timings_to_json(const PipelineReport& r);
// Writes report.json and timings.json into dir.
void write_report(const PipelineReport& r, const std::string& dir);

// Cross-reference problems: complex counts without an inventory entry, and so on.
std::vector<std::string> report_consistency(const PipelineReport& r);

// CSV polylines per pair (cascades_<q>_<p>.csv, flows_<q>_<p>.csv), sweep CSVs and
// manifest.json listing written files and empty pairs. Returns the written file names.
std::vector<std::string> export_plots(const PipelineReport& r, const MorseBottScenario& sc,
                                      const std::string& dir);

// Betti numbers of the closed orientable surface with the given Euler characteristic.
std::vector<int> surface_betti(int euler_characteristic);

}  // namespace mbcascade
