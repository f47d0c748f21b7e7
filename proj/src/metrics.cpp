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

#include "isac/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace isac
{

MetricsCounts &MetricsCounts::operator+=(const MetricsCounts &o)
{
    ue_fixes += o.ue_fixes;
    submeter += o.submeter;
    error_sum += o.error_sum;
    ips_total += o.ips_total;
    ips_removed += o.ips_removed;
    ips_within_2m += o.ips_within_2m;
    retained_within_2m += o.retained_within_2m;
    return *this;
}

std::optional<double> MetricsCounts::submeter_rate() const
{
    if (ue_fixes == 0)
        return std::nullopt;
    return static_cast<double>(submeter) / ue_fixes;
}

std::optional<double> MetricsCounts::mae() const
{
    if (ue_fixes == 0)
        return std::nullopt;
    return error_sum / ue_fixes;
}

std::optional<double> MetricsCounts::removal_rate() const
{
    if (ips_total == 0)
        return std::nullopt;
    return static_cast<double>(ips_removed) / ips_total;
}

MetricsReport &MetricsReport::operator+=(const MetricsReport &o)
{
    total += o.total;
    std::map<int, MetricsCounts> merged;
    for (const auto &b : per_bs)
        merged[b.bs_id] += b.counts;
    for (const auto &b : o.per_bs)
        merged[b.bs_id] += b.counts;
    per_bs.clear();
    for (const auto &[id, c] : merged)
        per_bs.push_back({id, c});
    return *this;
}

double facade_distance(const Vec3 &p, std::span<const Facade> facades)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto &f : facades)
        best = std::min(best, f.distance(p));
    return best;
}

MetricsReport compute_metrics(std::span<const UeFix> fixes, const LandmarkMap &map, std::span<const Facade> facades)
{
    // Errors are summed in sorted order so the result does not depend on the order of the fixes.
    std::map<int, std::vector<double>> errors;
    for (const auto &f : fixes)
        errors[f.bs_id].push_back(f.horizontal_error());
    std::map<int, MetricsCounts> by_bs;
    for (auto &[id, list] : errors)
    {
        std::sort(list.begin(), list.end());
        MetricsCounts &c = by_bs[id];
        for (double e : list)
        {
            c.ue_fixes += 1;
            c.submeter += e < kSubmeterThreshold ? 1 : 0;
            c.error_sum += e;
        }
    }

    std::vector<char> removed(map.ips.size(), 0);
    for (const auto &r : map.removed)
        removed.at(r.index) = 1;
    for (std::size_t i = 0; i < map.ips.size(); ++i)
    {
        MetricsCounts &c = by_bs[map.ips[i].bs_id];
        const bool near = facade_distance(map.ips[i].position, facades) <= kFacadeNearThreshold;
        c.ips_total += 1;
        c.ips_removed += removed[i];
        c.ips_within_2m += near ? 1 : 0;
        c.retained_within_2m += (near && !removed[i]) ? 1 : 0;
    }

    MetricsReport report;
    for (const auto &[id, c] : by_bs)
    {
        report.per_bs.push_back({id, c});
        report.total += c;
    }
    return report;
}

} // namespace isac
