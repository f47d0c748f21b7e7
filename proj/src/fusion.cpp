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

#include "isac/fusion.hpp"

#include <string>

namespace isac
{

namespace
{

std::vector<Vec3> positions_of(std::span<const IpEstimate> pool)
{
    std::vector<Vec3> pts;
    pts.reserve(pool.size());
    for (const auto &ip : pool)
        pts.push_back(ip.position);
    return pts;
}

} // namespace

const Vec3 &FusionContext::bs_position(int bs_id) const
{
    const auto it = bs_positions.find(bs_id);
    if (it == bs_positions.end())
        throw ProvenanceError("IP refers to unknown BS " + std::to_string(bs_id));
    return it->second;
}

const Vec3 &FusionContext::ue_position(int bs_id, int ue_id, int time_step) const
{
    const auto it = ue_positions.find({bs_id, ue_id, time_step});
    if (it == ue_positions.end())
        throw ProvenanceError("IP refers to unknown snapshot (BS " + std::to_string(bs_id) + ", UE " +
                              std::to_string(ue_id) + ", step " + std::to_string(time_step) + ")");
    return it->second;
}

std::string_view to_string(RemovalReason r)
{
    return r == RemovalReason::occluded ? "occluded" : "dbscan_outlier";
}

std::string_view to_string(OccludedSegment s)
{
    switch (s)
    {
    case OccludedSegment::bs_side:
        return "bs_side";
    case OccludedSegment::ue_side:
        return "ue_side";
    default:
        return "none";
    }
}

RemovalReason removal_reason_from_string(std::string_view s)
{
    if (s == "occluded")
        return RemovalReason::occluded;
    if (s == "dbscan_outlier")
        return RemovalReason::dbscan_outlier;
    throw std::invalid_argument("unknown removal reason '" + std::string(s) + "'");
}

OccludedSegment occluded_segment_from_string(std::string_view s)
{
    for (auto v : {OccludedSegment::none, OccludedSegment::bs_side, OccludedSegment::ue_side})
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument("unknown segment '" + std::string(s) + "'");
}

Clustering cluster_ips(std::span<const IpEstimate> pool, const DbscanParams &params)
{
    const auto pts = positions_of(pool);
    return cluster_points(pts, params);
}

std::vector<Hull> build_hulls(std::span<const Vec3> points, const Clustering &clustering)
{
    std::vector<Hull> hulls;
    hulls.reserve(clustering.clusters.size());
    for (int c = 0; c < clustering.cluster_count(); ++c)
    {
        const auto &members = clustering.clusters[c];
        std::vector<Vec3> pts;
        pts.reserve(members.size());
        for (int i : members)
            pts.push_back(points[i]);
        Hull h = convex_hull(pts);
        h.label = c;
        for (int &id : h.vertex_ids)
            id = members[id];
        hulls.push_back(std::move(h));
    }
    return hulls;
}

LandmarkMap prune_occluded(std::span<const IpEstimate> pool, const Clustering &clustering, std::vector<Hull> hulls,
                           const FusionContext &context, const DbscanParams &params)
{
    if (clustering.labels.size() != pool.size())
        throw std::invalid_argument("clustering does not match the IP pool");

    LandmarkMap map;
    map.ips.assign(pool.begin(), pool.end());
    map.initial_labels = clustering.labels;

    for (std::size_t i = 0; i < pool.size(); ++i)
    {
        const auto &ip = pool[i];
        const int own = clustering.labels[i];
        if (own < 0)
        {
            map.removed.push_back({static_cast<int>(i), RemovalReason::dbscan_outlier, -1, OccludedSegment::none});
            continue;
        }
        const Vec3 &bs = context.bs_position(ip.bs_id);
        const Vec3 &ue = context.ue_position(ip.bs_id, ip.ue_id, ip.time_step);

        RemovedIp hit{static_cast<int>(i), RemovalReason::occluded, -1, OccludedSegment::none};
        for (const auto &h : hulls)
        {
            if (h.label == own)
                continue;
            if (segment_intersects_hull(bs, ip.position, h))
                hit.segment = OccludedSegment::bs_side;
            else if (segment_intersects_hull(ue, ip.position, h))
                hit.segment = OccludedSegment::ue_side;
            if (hit.segment != OccludedSegment::none)
            {
                hit.hull_label = h.label;
                break;
            }
        }
        if (hit.segment != OccludedSegment::none)
            map.removed.push_back(hit);
        else
            map.retained.push_back(static_cast<int>(i));
    }
    map.initial_hulls = std::move(hulls);

    std::vector<Vec3> kept;
    kept.reserve(map.retained.size());
    for (int i : map.retained)
        kept.push_back(pool[i].position);
    const Clustering final_clusters = cluster_points(kept, params);
    map.final_labels = final_clusters.labels;
    map.hulls = build_hulls(kept, final_clusters);
    for (auto &h : map.hulls)
        for (int &id : h.vertex_ids)
            id = map.retained[id];
    return map;
}

LandmarkMap build_landmark_map(std::span<const IpEstimate> pool, const FusionContext &context,
                               const DbscanParams &params)
{
    params.validate();
    // Resolve provenance up front so a broken pool fails before any work is done.
    for (const auto &ip : pool)
    {
        context.bs_position(ip.bs_id);
        context.ue_position(ip.bs_id, ip.ue_id, ip.time_step);
    }
    const auto pts = positions_of(pool);
    const Clustering clustering = cluster_points(pts, params);
    return prune_occluded(pool, clustering, build_hulls(pts, clustering), context, params);
}

} // namespace isac
