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

#include "isac/geometry.hpp"

namespace isac
{

struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct BsState
{
    int id = 0;
    Vec3 position = Vec3::Zero();
    EulerAngles orientation;      // radians, each in (-pi, pi]
    double coverage_radius = 70.0; // m
    double fov_half_angle = kPi / 3.0; // rad, azimuth sector served around the array boresight
};

struct UeState
{
    int id = 0;
    int time_step = 0;
    Vec3 position = Vec3::Zero(); // z equals the known UE height
};

// Planar rectangle {corner + s*edge_u + t*edge_v : s, t in [0, 1]} with outward unit normal.
struct Facade
{
    Vec3 corner = Vec3::Zero();
    Vec3 edge_u = Vec3::Zero();
    Vec3 edge_v = Vec3::Zero();
    Vec3 normal = Vec3::UnitX();
    int building = -1;

    double area() const { return edge_u.cross(edge_v).norm(); }
    double plane_offset() const { return normal.dot(corner); }
    double signed_distance(const Vec3 &p) const { return normal.dot(p) - plane_offset(); }
    bool contains(const Vec3 &p, double tol = 1e-9) const;
    Vec3 closest_point(const Vec3 &p) const;
    double distance(const Vec3 &p) const { return (closest_point(p) - p).norm(); }
};

// Axis-aligned building box. `length` is the extent along x, `width` along y.
struct Building
{
    std::string name;
    Vec3 center = Vec3::Zero();
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;

    Vec3 min_corner() const { return center - 0.5 * Vec3(length, width, height); }
    Vec3 max_corner() const { return center + 0.5 * Vec3(length, width, height); }
    double lateral_area() const { return 2.0 * (length + width) * height; }
};

struct Trajectory
{
    int ue_id = 0;
    std::vector<Vec2> waypoints; // horizontal waypoints, m
};

struct ScenarioConfig
{
    std::string name = "scenario";
    std::vector<BsState> base_stations;
    std::vector<Building> buildings;
    std::vector<Trajectory> trajectories;
    double sample_interval = 5.0;  // m
    double ue_height = 1.5;        // m
    double coverage_radius = 70.0; // m, applied to base stations lacking their own value
    int max_bounce = 2;
    int max_paths = 50;
    double reflection_coefficient = 0.5;
    std::uint64_t seed = 1;
};

class Scene
{
  public:
    std::string name;
    std::vector<BsState> base_stations;
    std::vector<Building> buildings;
    std::vector<Facade> facades;
    std::vector<Trajectory> trajectories;
    double sample_interval = 5.0;
    double ue_height = 1.5;
    int max_bounce = 2;
    int max_paths = 50;
    double reflection_coefficient = 0.5;
    std::uint64_t seed = 1;

    const BsState &bs(int id) const;

    // True if the open segment (a, b) passes through the interior of any building.
    bool segment_blocked(const Vec3 &a, const Vec3 &b) const;
};

// A propagation path produced by the image-method oracle. Delay is carried as range in m.
struct TruePath
{
    cdouble gain{0.0, 0.0};
    double delay_range = 0.0; // m
    Aoa aoa;                  // in the BS local frame
    int bounce_order = 0;
    std::vector<Vec3> true_ips;  // ordered from the UE side towards the BS
    std::vector<int> facade_ids; // facade index per bounce
};

// The four vertical faces of an axis-aligned box with outward normals (+x, -x, +y, -y).
std::vector<Facade> box_facades(const Building &b, int building_index);

Scene build_scene(const ScenarioConfig &config);

// Scenario with the reference T-junction geometry: 4 BSs, 3 buildings, 3 UE trajectories.
ScenarioConfig reference_scenario_config();

// Reduced scenario (2 BSs, 1 UE, 10 samples) used for quick runs and the acceptance suite.
ScenarioConfig desk_scenario_config();

double trajectory_length(const Trajectory &t);

// UE states at arc-length-uniform spacing along every trajectory, starting at the first waypoint.
std::vector<UeState> sample_trajectories(const Scene &scene, double interval);
std::vector<UeState> sample_trajectories(const Scene &scene);

// LoS plus all valid specular single/double-bounce paths. Gains follow the free-space
// magnitude lambda / (4 pi r) times reflection_coefficient^order with a uniform random phase.
// Paths arriving from behind the array (local x <= 0) are not received.
std::vector<TruePath> trace_paths(const Scene &scene, const BsState &bs, const UeState &ue, int max_bounce,
                                  double wavelength, std::uint64_t phase_seed);

// True if the UE lies within the BS coverage radius and inside its azimuth sector.
bool in_coverage(const BsState &bs, const Vec3 &ue_position);

} // namespace isac
