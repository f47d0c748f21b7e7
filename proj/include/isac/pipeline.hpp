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
#include <string>
#include <vector>

#include "isac/chanest.hpp"
#include "isac/fusion.hpp"
#include "isac/metrics.hpp"
#include "isac/posmap.hpp"
#include "isac/scenario.hpp"

namespace isac
{

struct RunConfig
{
    ScenarioFile scenario; // geometry, radio parameters, augmentation and DBSCAN settings
    int trials = 1;
    std::uint64_t seed = 1;

    // Oracle mode skips synthesis and channel estimation and feeds the true path parameters
    // straight into positioning, optionally perturbed by Gaussian noise with `sigmas`.
    bool oracle = false;
    bool oracle_noise = false;

    bool thermal_noise = true; // full mode: add receiver noise to the synthesized tensor
    double snr_offset_db = 0.0;
    MeasurementSigmas sigmas; // weighting of the LoS fix (and oracle noise level)
    CpdOptions cpd;
    double order_gamma = 3.0;

    // Use the ground-truth UE position for the UE-IP occlusion segment instead of the estimate.
    bool occlusion_uses_true_ue = false;
    int threads = 0; // 0: one per hardware thread

    void validate() const;
};

// Per (BS, UE, time step) bookkeeping. `error` is empty when the snapshot went through.
struct SnapshotRecord
{
    int bs_id = -1;
    int ue_id = -1;
    int time_step = -1;
    Vec3 ue_truth = Vec3::Zero();
    bool located = false;
    Vec3 ue_estimate = Vec3::Zero();
    int true_paths = 0;
    int estimated_paths = 0;
    int model_order = 0;
    int ips = 0;
    int infeasible_ips = 0;
    std::string error;

    bool operator==(const SnapshotRecord &) const = default;
};

// Ground truth behind one pooled IP: the true path it was derived from (if identified).
struct IpTruth
{
    int true_path = -1;   // index into the traced paths of its snapshot, -1 if unmatched
    int bounce_order = -1;
    Vec3 true_ip = Vec3::Zero(); // UE-side interaction point of the true path

    bool operator==(const IpTruth &) const = default;
};

struct TrialResult
{
    int trial = 0;
    std::uint64_t seed = 0;
    std::vector<SnapshotRecord> snapshots;
    std::vector<IpTruth> ip_truth; // aligned with map.ips
    LandmarkMap map;
    MetricsReport metrics;

    std::vector<UeFix> ue_fixes() const;
};

struct RunResult
{
    std::vector<TrialResult> trials;
    MetricsReport metrics; // merged over trials
};

// Runs one Monte-Carlo trial: trace, (synthesize, estimate), locate, map IPs, fuse.
TrialResult run_trial(const Scene &scene, const RunConfig &config, int trial);

// Runs all trials; trials execute concurrently but results keep trial order.
RunResult run_pipeline(const RunConfig &config);

} // namespace isac
