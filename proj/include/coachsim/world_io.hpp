#pragma once

#include <string>

#include "coachsim/sim_types.hpp"

namespace coachsim::sim {

/// Scenario config file support (JSON). The map spec may be embedded under
/// "map" or referenced with "map_path"; a referenced map is resolved into
/// the returned config. Throws std::runtime_error with a field diagnostic
/// on malformed input.
ScenarioConfig load_scenario_config(const std::string& path);
ScenarioConfig scenario_config_from_json_text(const std::string& text,
                                              const std::string& base_dir = "");
std::string scenario_config_to_json_text(const ScenarioConfig& config);

}  // namespace coachsim::sim
