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

#include <optional>
#include <span>
#include <vector>

#include "isac/fusion.hpp"
#include "isac/scene.hpp"

namespace isac
{

inline constexpr double kSubmeterThreshold = 1.0; // m, horizontal
inline constexpr double kFacadeNearThreshold = 2.0; // m

// One UE fix from one BS, paired with the ground truth.
struct UeFix
{
    int bs_id = -1;
    int ue_id = -1;
    int time_step = -1;
    Vec3 estimate = Vec3::Zero();
    Vec3 truth = Vec3::Zero();

    double horizontal_error() const { return (estimate - truth).head<2>().norm(); }
    bool operator==(const UeFix &) const = default;
};

// Raw counts; every rate is derived from them so reports over several trials can be merged.
struct MetricsCounts
{
    int ue_fixes = 0;
    int submeter = 0;
    double error_sum = 0.0; // m
    int ips_total = 0;
    int ips_removed = 0;
    int ips_within_2m = 0;
    int retained_within_2m = 0;

    MetricsCounts &operator+=(const MetricsCounts &o);
    bool operator==(const MetricsCounts &) const = default;

    // Undefined (nullopt) when the denominator is zero.
    std::optional<double> submeter_rate() const;
    std::optional<double> mae() const;
    std::optional<double> removal_rate() const;
};

struct BsMetrics
{
    int bs_id = -1;
    MetricsCounts counts;

    bool operator==(const BsMetrics &) const = default;
};

struct MetricsReport
{
    MetricsCounts total;
    std::vector<BsMetrics> per_bs; // ascending BS id

    bool empty() const { return total.ue_fixes == 0 && total.ips_total == 0; }
    MetricsReport &operator+=(const MetricsReport &o);
    bool operator==(const MetricsReport &) const = default;
};

// Distance from p to the closest point of any facade rectangle.
double facade_distance(const Vec3 &p, std::span<const Facade> facades);

MetricsReport compute_metrics(std::span<const UeFix> fixes, const LandmarkMap &map, std::span<const Facade> facades);

} // namespace isac
