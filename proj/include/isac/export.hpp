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
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "isac/pipeline.hpp"

namespace isac
{

inline constexpr int kSchemaVersion = 1;

struct ExportError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Everything a per-trial JSON file carries, enough to recompute metrics and redraw the plot.
struct TrialExport
{
    std::string scenario;
    bool oracle = false;
    std::vector<Facade> facades;
    std::vector<BsState> base_stations;
    TrialResult result;
};

nlohmann::json hull_to_json(const Hull &h);
Hull hull_from_json(const nlohmann::json &j);
nlohmann::json landmark_map_to_json(const LandmarkMap &map);
LandmarkMap landmark_map_from_json(const nlohmann::json &j);
nlohmann::json metrics_to_json(const MetricsReport &m);

nlohmann::json trial_to_json(const TrialExport &t);
TrialExport trial_from_json(const nlohmann::json &j);

TrialExport make_trial_export(const TrialResult &trial, const Scene &scene, const RunConfig &config);

// One row per trial and scope (all BSs, then each BS); the trial column is "all" for merged rows.
std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>> &rows);

// Top view: building footprints, BSs, true and estimated UE positions, true IPs, estimated IPs
// (retained / removed) and one closed polygon per final hull.
std::string render_svg(const TrialExport &t);

void write_text_file(const std::string &path, const std::string &text);
std::string read_text_file(const std::string &path);
TrialExport read_trial_json(const std::string &path);

// Writes trial_NNN.json and trial_NNN.svg per trial plus metrics.csv into `dir` (created if needed).
void export_artifacts(const RunResult &result, const Scene &scene, const RunConfig &config, const std::string &dir);

} // namespace isac
