#pragma once

#include "mbcascade/cascade_enumerator.hpp"
#include "mbcascade/perturbation_builder.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mbcascade {

struct ScenarioFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioFormatVersion = 1;

struct EpsilonSettings {
    double value = 0.0;  // 0 selects epsilon automatically
    double start = 0.1;
    int max_halvings = 20;
    int schedule_points = 7;
    double schedule_decades = 2.0;
    std::vector<double> schedule;  // explicit schedule overrides the geometric one
};

// A parsed scenario file: the geometric data plus every numerical setting.
struct ScenarioConfig {
    int format_version = kScenarioFormatVersion;
    MorseBottScenario scenario;
    std::vector<TubularPair> tubes;
    EpsilonSettings epsilon;
    CascadeSettings cascade;
    SmallnessSettings smallness;
    double verify_tol = 1e-6;
    std::string output_dir = "out";
    std::string source_text;  // canonical JSON of the configuration
};

std::vector<std::string> catalog_names();
// Built-in scenarios: sphere-z, sphere-z2, sphere-skew, flat-torus, upright-torus.
ScenarioConfig catalog_scenario(const std::string& name);

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path_or_catalog_name);
std::string scenario_to_json(const ScenarioConfig& cfg);

}  // namespace mbcascade
