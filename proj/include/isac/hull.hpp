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

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "isac/geometry.hpp"

namespace isac
{

enum class HullKind
{
    solid,  // full 3-D polytope
    planar, // all points within kDegenerateTol of a plane: convex polygon
    linear, // all points within kDegenerateTol of a line: segment
    point   // all points within kDegenerateTol of one point
};

std::string_view to_string(HullKind kind);
HullKind hull_kind_from_string(std::string_view s);

inline constexpr double kDegenerateTol = 1e-6;   // m
inline constexpr double kHullThickness = 0.1;    // m, extrusion applied to degenerate hulls
inline constexpr double kSegmentClearance = 1e-6; // m, trimmed from both segment ends
inline constexpr double kBoundaryTol = 1e-9;      // m, points this close to the boundary count as inside

// Closed half-space {x : normal . x <= offset}.
struct Halfspace
{
    Vec3 normal = Vec3::UnitX();
    double offset = 0.0;

    bool operator==(const Halfspace &) const = default;
};

struct HullFace
{
    std::array<int, 3> v{}; // indices into Hull::vertices, counter-clockwise seen from outside
    Vec3 normal = Vec3::UnitX();
    double offset = 0.0;

    bool operator==(const HullFace &) const = default;
};

struct Hull
{
    int label = -1;
    HullKind kind = HullKind::point;
    std::vector<Vec3> vertices;
    std::vector<int> vertex_ids; // indices of the vertices in the input point list
    std::vector<HullFace> faces; // triangles; planar hulls carry a fan over the polygon
    // Volume used for intersection tests: the faces for solid hulls, the polygon or segment
    // extruded by kHullThickness for degenerate ones.
    std::vector<Halfspace> halfspaces;

    // Largest half-space violation; <= 0 inside the (possibly extruded) hull.
    double signed_distance(const Vec3 &p) const;
    bool contains(const Vec3 &p, double tol = kBoundaryTol) const { return signed_distance(p) <= tol; }

    bool operator==(const Hull &) const = default;
};

// Convex hull by Quickhull, with lower-dimensional hulls for degenerate inputs.
Hull convex_hull(std::span<const Vec3> points);

// True iff the open segment (a, b), trimmed by kSegmentClearance at both ends, meets the
// closed hull volume. Cyrus-Beck clipping against the hull half-spaces, each relaxed by
// kBoundaryTol so that grazing contact survives round-off.
bool segment_intersects_hull(const Vec3 &a, const Vec3 &b, const Hull &hull);

// Top-view outline (x-y) of the hull as a counter-clockwise polygon.
std::vector<Vec2> top_view_outline(const Hull &hull);

// 2-D convex hull (Andrew's monotone chain); returns indices, counter-clockwise.
std::vector<int> convex_hull_2d(std::span<const Vec2> pts, double tol = 0.0);

} // namespace isac
