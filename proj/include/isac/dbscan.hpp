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

#include <span>
#include <vector>

#include "isac/geometry.hpp"

namespace isac
{

struct DbscanParams
{
    double eps = 3.0; // m
    int min_pts = 5;  // including the point itself

    void validate() const;
};

struct Clustering
{
    std::vector<int> labels;                 // per point, -1 for outliers
    std::vector<std::vector<int>> clusters;  // member indices in ascending order
    std::vector<int> outliers;               // ascending
    std::vector<bool> core;

    int cluster_count() const { return static_cast<int>(clusters.size()); }
};

// Density-based clustering with Euclidean distance and inclusive eps-balls.
//
// Points are scanned in index order. Each unlabelled core point seeds a new cluster that is
// expanded breadth-first through core points, visiting neighbours in ascending index order.
// A border point reachable from several clusters therefore belongs to the cluster whose
// lowest-index core point comes first.
Clustering cluster_points(std::span<const Vec3> points, const DbscanParams &params);

} // namespace isac
