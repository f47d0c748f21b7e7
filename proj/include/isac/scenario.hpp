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

#include <string>

#include "isac/chanest.hpp"
#include "isac/dbscan.hpp"
#include "isac/scene.hpp"
#include "isac/signal.hpp"

namespace isac
{

// Everything a scenario file describes: geometry, radio parameters and the processing defaults.
struct ScenarioFile
{
    ScenarioConfig scene;
    WaveformConfig waveform;
    int array_n_x = 8;
    int array_n_z = 8;
    SaConfig sa;
    DbscanParams dbscan;

    ArrayConfig array() const { return ArrayConfig::half_wavelength(array_n_x, array_n_z, waveform.carrier_freq); }
};

// Desk preset: desk_scenario_config() with the default 128-subcarrier waveform.
ScenarioFile desk_scenario_file();

// Full-size preset: reference_scenario_config() with 256 subcarriers over 400 MHz.
ScenarioFile reference_scenario_file();

// YAML scenario description. Angles are given in degrees (orientation_deg: [roll, pitch, yaw]);
// missing optional keys keep their defaults, unknown keys are rejected. Errors raise ConfigError.
ScenarioFile parse_scenario(const std::string &yaml_text);
ScenarioFile load_scenario(const std::string &path);
std::string dump_scenario(const ScenarioFile &scenario);
void save_scenario(const std::string &path, const ScenarioFile &scenario);

} // namespace isac
