// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bistatic/geometry.hpp"
#include "bistatic/measurement.hpp"

namespace bistatic {

enum class Engine { SignalLevel, ModelBased };
enum class MotionDirection { RadialInward, RadialOutward };

struct MotionConfig {
    double speed_mps = 0.2;
    MotionDirection direction = MotionDirection::RadialInward;
    double theta2_deg = 60.0;
    std::size_t pulses = 64;

    bool operator==(const MotionConfig&) const = default;
};

/// nodes[0] and nodes[1] form the bistatic pair (N1, N2). Extra nodes are
/// additional receivers for the multistatic run, all served by nodes[0].
struct ScenarioConfig {
    std::string scenario_id = "custom";
    std::vector<NodePosition> nodes;
    double baseline_l = 0.0;
    double sum_range = 0.0;
    double rcs_dbsm = 0.0;
    RadarParams radar;
    std::optional<MeasurementErrorModel> error_override;
    std::size_t sweep_points = 360;
    std::size_t trials_per_point = 1;
    double exclusion_deg = 5.0;
    bool model_quantize = false;
    std::uint64_t seed = 1;
    Engine engine = Engine::ModelBased;
    std::optional<MotionConfig> motion;

    BistaticPair pair(Mode mode = Mode::Mode1) const;
    void validate() const;
    bool operator==(const ScenarioConfig& o) const;
};

/// Built-in presets: scenario1, scenario2, scenario3.
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);
bool is_preset(const std::string& name);

/// Preset name or path to a config file.
ScenarioConfig load_scenario(const std::string& preset_or_path);
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig parse_scenario(const std::string& text);
void serialize_scenario(std::ostream& os, const ScenarioConfig& cfg);
std::string serialize_scenario(const ScenarioConfig& cfg);

/// Switches the radar to the 100 or 400 MHz preset, keeping the carrier.
void apply_bandwidth(ScenarioConfig& cfg, int bandwidth_mhz);

/// Gaussian model matching the mean absolute TDOA/AoA errors observed for a
/// preset scenario at 100 or 400 MHz.
MeasurementErrorModel tabulated_error_model(const std::string& scenario_id, int bandwidth_mhz);

/// error_override when set, else the preset table at the radar's bandwidth.
MeasurementErrorModel effective_error_model(const ScenarioConfig& cfg);

std::string to_string(Engine e);
Engine engine_from_string(const std::string& s);

}  // namespace bistatic
