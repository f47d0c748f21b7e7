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

// Scenes shared by the unit tests and the acceptance runner.

#pragma once

#include <filesystem>
#include <string>

#include "isac/scenario.hpp"

namespace isac::fixture
{

// Street canyon: two parallel 100 m blocks 20 m apart, one BS at the southern end looking
// north, three UE tracks along the street. Double-bounce paths between the walls map to
// ghost IPs behind the opposite wall, whose segments cross the wall hulls.
inline ScenarioFile canyon_scenario(double sample_interval = 2.0)
{
    ScenarioFile s;
    auto &c = s.scene;
    c.name = "canyon";
    c.base_stations = {{1, Vec3(0.0, -45.0, 15.0), {0.0, 0.0, kPi / 2.0}, 70.0}};
    c.buildings = {{"W", Vec3(-20.0, 0.0, 15.0), 20.0, 100.0, 30.0}, {"E", Vec3(20.0, 0.0, 15.0), 20.0, 100.0, 30.0}};
    c.trajectories = {{1, {Vec2(4.0, -30.0), Vec2(4.0, 20.0)}},
                      {2, {Vec2(0.0, -30.0), Vec2(0.0, 20.0)}},
                      {3, {Vec2(-4.0, -30.0), Vec2(-4.0, 20.0)}}};
    c.sample_interval = sample_interval;
    c.seed = 7;
    return s;
}

// Fresh scratch directory below the system temp path.
inline std::filesystem::path scratch_dir(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("isac_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace isac::fixture
