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

#include <map>
#include <span>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <vector>

#include "isac/dbscan.hpp"
#include "isac/hull.hpp"
#include "isac/posmap.hpp"

namespace isac
{

// Raised when an IP cannot be traced back to its BS or UE snapshot.
struct ProvenanceError : std::logic_error
{
    using std::logic_error::logic_error;
};

// Positions needed to rebuild the BS-IP and UE-IP segments of every pooled IP.
struct FusionContext
{
    std::map<int, Vec3> bs_positions; // by BS id
    // UE position each BS used for its snapshot, by (BS id, UE id, time step).
    std::map<std::tuple<int, int, int>, Vec3> ue_positions;

    const Vec3 &bs_position(int bs_id) const;
    const Vec3 &ue_position(int bs_id, int ue_id, int time_step) const;
};

enum class RemovalReason
{
    dbscan_outlier,
    occluded
};

enum class OccludedSegment
{
    none,
    bs_side,
    ue_side
};

std::string_view to_string(RemovalReason r);
std::string_view to_string(OccludedSegment s);
RemovalReason removal_reason_from_string(std::string_view s);
OccludedSegment occluded_segment_from_string(std::string_view s);

struct RemovedIp
{
    int index = -1; // position in the pool
    RemovalReason reason = RemovalReason::dbscan_outlier;
    int hull_label = -1; // occluding hull, -1 for outliers
    OccludedSegment segment = OccludedSegment::none;

    bool operator==(const RemovedIp &) const = default;
};

struct LandmarkMap
{
    std::vector<IpEstimate> ips;     // the pooled input
    std::vector<int> initial_labels; // first clustering, per pool entry (-1 = outlier)
    std::vector<Hull> initial_hulls; // hulls used for the occlusion test
    std::vector<int> retained;       // pool indices, ascending
    std::vector<int> final_labels;   // per retained entry, from re-clustering (-1 = outlier)
    std::vector<Hull> hulls;         // final landmark hulls
    std::vector<RemovedIp> removed;  // ascending pool index

    bool operator==(const LandmarkMap &) const = default;
};

Clustering cluster_ips(std::span<const IpEstimate> pool, const DbscanParams &params);

// One hull per cluster, labelled with the cluster index. Hull vertex ids refer to `points`.
std::vector<Hull> build_hulls(std::span<const Vec3> points, const Clustering &clustering);

// Removes DBSCAN outliers and every clustered IP whose BS-IP or UE-IP segment meets the hull
// of a different cluster, then re-clusters and re-hulls the survivors with the same parameters.
// Hulls are tested in label order, the BS-side segment before the UE-side one.
LandmarkMap prune_occluded(std::span<const IpEstimate> pool, const Clustering &clustering, std::vector<Hull> hulls,
                           const FusionContext &context, const DbscanParams &params);

// cluster_ips + build_hulls + prune_occluded.
LandmarkMap build_landmark_map(std::span<const IpEstimate> pool, const FusionContext &context,
                               const DbscanParams &params);

} // namespace isac
