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

#include "isac/scene.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace isac
{

namespace
{

constexpr double kFrontTol = 1e-9;    // m, minimum distance in front of a reflecting plane
constexpr double kInteriorTol = 1e-7; // m, boxes are shrunk by this much for blocking tests

bool angle_in_range(double a)
{
    return a > -kPi && a <= kPi;
}

// Slab test of the segment a + s (b - a), s in [s0, s1], against an axis-aligned box.
bool segment_hits_box(const Vec3 &a, const Vec3 &b, double s0, double s1, const Vec3 &lo, const Vec3 &hi)
{
    const Vec3 d = b - a;
    for (int k = 0; k < 3; ++k)
    {
        if (std::abs(d[k]) < 1e-300)
        {
            if (a[k] < lo[k] || a[k] > hi[k])
                return false;
            continue;
        }
        double t0 = (lo[k] - a[k]) / d[k];
        double t1 = (hi[k] - a[k]) / d[k];
        if (t0 > t1)
            std::swap(t0, t1);
        s0 = std::max(s0, t0);
        s1 = std::min(s1, t1);
        if (s0 > s1)
            return false;
    }
    return true;
}

bool boxes_overlap(const Building &a, const Building &b)
{
    const Vec3 alo = a.min_corner(), ahi = a.max_corner();
    const Vec3 blo = b.min_corner(), bhi = b.max_corner();
    for (int k = 0; k < 3; ++k)
        if (ahi[k] <= blo[k] + kInteriorTol || bhi[k] <= alo[k] + kInteriorTol)
            return false;
    return true;
}

bool strictly_inside(const Building &b, const Vec3 &p)
{
    const Vec3 lo = b.min_corner(), hi = b.max_corner();
    for (int k = 0; k < 3; ++k)
        if (p[k] <= lo[k] + kInteriorTol || p[k] >= hi[k] - kInteriorTol)
            return false;
    return true;
}

// Intersection of the segment from `from` to `to` with the plane of f, where `from` lies
// in front of the plane and `to` behind it.
std::optional<Vec3> cross_plane(const Facade &f, const Vec3 &from, const Vec3 &to)
{
    const double df = f.signed_distance(from);
    const double dt = f.signed_distance(to);
    if (df <= kFrontTol || dt >= -kFrontTol)
        return std::nullopt;
    const double t = df / (df - dt);
    return from + t * (to - from);
}

} // namespace

bool Facade::contains(const Vec3 &p, double tol) const
{
    if (std::abs(signed_distance(p)) > tol)
        return false;
    const Vec3 r = p - corner;
    const double lu = edge_u.norm(), lv = edge_v.norm();
    const double su = r.dot(edge_u) / lu;
    const double sv = r.dot(edge_v) / lv;
    return su >= -tol && su <= lu + tol && sv >= -tol && sv <= lv + tol;
}

Vec3 Facade::closest_point(const Vec3 &p) const
{
    const Vec3 r = p - corner;
    const double su = std::clamp(r.dot(edge_u) / edge_u.squaredNorm(), 0.0, 1.0);
    const double sv = std::clamp(r.dot(edge_v) / edge_v.squaredNorm(), 0.0, 1.0);
    return corner + su * edge_u + sv * edge_v;
}

const BsState &Scene::bs(int id) const
{
    for (const auto &b : base_stations)
        if (b.id == id)
            return b;
    throw std::out_of_range("unknown base station id " + std::to_string(id));
}

bool Scene::segment_blocked(const Vec3 &a, const Vec3 &b) const
{
    const double len = (b - a).norm();
    if (len < 2e-6)
        return false;
    const double s0 = 1e-6 / len, s1 = 1.0 - 1e-6 / len;
    const Vec3 shrink = Vec3::Constant(kInteriorTol);
    for (const auto &bld : buildings)
        if (segment_hits_box(a, b, s0, s1, bld.min_corner() + shrink, bld.max_corner() - shrink))
            return true;
    return false;
}

std::vector<Facade> box_facades(const Building &b, int building_index)
{
    const Vec3 lo = b.min_corner(), hi = b.max_corner();
    const Vec3 up(0.0, 0.0, b.height);
    const Vec3 along_x(b.length, 0.0, 0.0), along_y(0.0, b.width, 0.0);

    std::vector<Facade> out;
    out.push_back({Vec3(hi.x(), lo.y(), lo.z()), along_y, up, Vec3::UnitX(), building_index});
    out.push_back({Vec3(lo.x(), lo.y(), lo.z()), along_y, up, -Vec3::UnitX(), building_index});
    out.push_back({Vec3(lo.x(), hi.y(), lo.z()), along_x, up, Vec3::UnitY(), building_index});
    out.push_back({Vec3(lo.x(), lo.y(), lo.z()), along_x, up, -Vec3::UnitY(), building_index});
    return out;
}

Scene build_scene(const ScenarioConfig &config)
{
    if (config.sample_interval <= 0.0)
        throw ConfigError("sample interval must be positive");
    if (config.max_bounce < 0 || config.max_bounce > 2)
        throw ConfigError("max bounce order must be 0, 1 or 2");
    if (config.max_paths < 1)
        throw ConfigError("max paths must be at least 1");

    for (const auto &b : config.buildings)
        if (b.length <= 0.0 || b.width <= 0.0 || b.height <= 0.0)
            throw ConfigError("building '" + b.name + "' has a non-positive dimension");

    for (std::size_t i = 0; i < config.buildings.size(); ++i)
        for (std::size_t j = i + 1; j < config.buildings.size(); ++j)
            if (boxes_overlap(config.buildings[i], config.buildings[j]))
                throw ConfigError("buildings '" + config.buildings[i].name + "' and '" + config.buildings[j].name +
                                  "' overlap");

    Scene scene;
    scene.name = config.name;
    scene.sample_interval = config.sample_interval;
    scene.ue_height = config.ue_height;
    scene.max_bounce = config.max_bounce;
    scene.max_paths = config.max_paths;
    scene.reflection_coefficient = config.reflection_coefficient;
    scene.seed = config.seed;
    scene.buildings = config.buildings;
    scene.trajectories = config.trajectories;

    for (auto bs : config.base_stations)
    {
        if (bs.coverage_radius <= 0.0)
            bs.coverage_radius = config.coverage_radius;
        if (bs.coverage_radius <= 0.0)
            throw ConfigError("coverage radius must be positive");
        if (!(bs.fov_half_angle > 0.0 && bs.fov_half_angle <= kPi / 2.0))
            throw ConfigError("BS " + std::to_string(bs.id) + " field of view must be in (0, 90] degrees");
        if (!angle_in_range(bs.orientation.roll) || !angle_in_range(bs.orientation.pitch) ||
            !angle_in_range(bs.orientation.yaw))
            throw ConfigError("BS " + std::to_string(bs.id) + " orientation outside (-pi, pi]");
        for (const auto &b : scene.buildings)
            if (strictly_inside(b, bs.position))
                throw ConfigError("BS " + std::to_string(bs.id) + " lies inside building '" + b.name + "'");
        for (const auto &other : scene.base_stations)
            if (other.id == bs.id)
                throw ConfigError("duplicate BS id " + std::to_string(bs.id));
        scene.base_stations.push_back(bs);
    }

    for (const auto &t : scene.trajectories)
        if (t.waypoints.empty())
            throw ConfigError("trajectory for UE " + std::to_string(t.ue_id) + " has no waypoints");

    for (std::size_t i = 0; i < scene.buildings.size(); ++i)
    {
        auto f = box_facades(scene.buildings[i], static_cast<int>(i));
        scene.facades.insert(scene.facades.end(), f.begin(), f.end());
    }
    return scene;
}

ScenarioConfig reference_scenario_config()
{
    ScenarioConfig c;
    c.name = "reference";
    constexpr double h = kPi / 2.0;
    c.base_stations = {
        {1, Vec3(0.0, 0.0, 15.0), {0.0, 0.0, -h}, 70.0},
        {2, Vec3(0.0, -70.0, 15.0), {0.0, 0.0, h}, 70.0},
        {3, Vec3(0.0, 70.0, 15.0), {0.0, 0.0, -h}, 70.0},
        {4, Vec3(-70.0, 0.0, 15.0), {0.0, 0.0, 0.0}, 70.0},
    };
    // Building A runs along the N-S street east of the junction; B and C sit in the two
    // western quadrants so the three boxes frame the T-junction without overlapping.
    c.buildings = {
        {"A", Vec3(40.0, 0.0, 15.0), 50.0, 140.0, 30.0},
        {"B", Vec3(-40.0, 40.0, 15.0), 60.0, 60.0, 30.0},
        {"C", Vec3(-40.0, -40.0, 15.0), 60.0, 60.0, 30.0},
    };
    c.trajectories = {
        {1, {Vec2(2.0, -70.0), Vec2(2.0, 70.0)}},
        {2, {Vec2(-70.0, -2.0), Vec2(-2.0, -2.0), Vec2(-2.0, -70.0)}},
        {3, {Vec2(-2.0, 70.0), Vec2(-2.0, 2.0), Vec2(-70.0, 2.0)}},
    };
    c.sample_interval = 5.0;
    c.ue_height = 1.5;
    c.coverage_radius = 70.0;
    c.max_bounce = 2;
    c.max_paths = 50;
    c.seed = 1;
    return c;
}

ScenarioConfig desk_scenario_config()
{
    ScenarioConfig c = reference_scenario_config();
    c.name = "desk";
    c.base_stations = {c.base_stations[0], c.base_stations[1]};
    c.trajectories = {{1, {Vec2(2.0, -60.0), Vec2(2.0, -15.0)}}};
    return c;
}

double trajectory_length(const Trajectory &t)
{
    double len = 0.0;
    for (std::size_t i = 1; i < t.waypoints.size(); ++i)
        len += (t.waypoints[i] - t.waypoints[i - 1]).norm();
    return len;
}

std::vector<UeState> sample_trajectories(const Scene &scene, double interval)
{
    if (interval <= 0.0)
        throw ConfigError("sample interval must be positive");

    std::vector<UeState> out;
    for (const auto &t : scene.trajectories)
    {
        const double total = trajectory_length(t);
        const int n = static_cast<int>(std::floor(total / interval + 1e-9)) + 1;
        std::size_t seg = 0;
        double seg_start = 0.0;
        for (int k = 0; k < n; ++k)
        {
            const double s = k * interval;
            Vec2 p = t.waypoints.front();
            while (seg + 1 < t.waypoints.size())
            {
                const double seg_len = (t.waypoints[seg + 1] - t.waypoints[seg]).norm();
                if (s <= seg_start + seg_len + 1e-9 || seg + 2 == t.waypoints.size())
                {
                    const double f = seg_len > 0.0 ? std::min(1.0, (s - seg_start) / seg_len) : 0.0;
                    p = t.waypoints[seg] + f * (t.waypoints[seg + 1] - t.waypoints[seg]);
                    break;
                }
                seg_start += seg_len;
                ++seg;
            }
            out.push_back({t.ue_id, k, Vec3(p.x(), p.y(), scene.ue_height)});
        }
    }
    return out;
}

std::vector<UeState> sample_trajectories(const Scene &scene)
{
    return sample_trajectories(scene, scene.sample_interval);
}

bool in_coverage(const BsState &bs, const Vec3 &ue_position)
{
    const Vec3 d = ue_position - bs.position;
    if (d.norm() > bs.coverage_radius)
        return false;
    const Vec3 v = global_to_local(bs.orientation) * d;
    return v.x() > 0.0 && std::abs(std::atan2(v.y(), v.x())) <= bs.fov_half_angle;
}

std::vector<TruePath> trace_paths(const Scene &scene, const BsState &bs, const UeState &ue, int max_bounce,
                                  double wavelength, std::uint64_t phase_seed)
{
    if (max_bounce < 0 || max_bounce > 2)
        throw std::invalid_argument("max_bounce must be 0, 1 or 2");
    std::vector<TruePath> paths;
    if (!in_coverage(bs, ue.position))
        return paths;

    const Mat3 to_local = global_to_local(bs.orientation);
    auto arrival = [&](const Vec3 &from) -> std::optional<Aoa> {
        const Vec3 v = to_local * (from - bs.position);
        if (v.x() <= 0.0)
            return std::nullopt;
        return aoa_from_direction(v);
    };

    if (!scene.segment_blocked(ue.position, bs.position))
    {
        if (auto aoa = arrival(ue.position))
            paths.push_back({{}, (ue.position - bs.position).norm(), *aoa, 0, {}, {}});
    }

    const auto &fac = scene.facades;
    if (max_bounce >= 1)
    {
        for (std::size_t i = 0; i < fac.size(); ++i)
        {
            const Facade &f = fac[i];
            if (f.signed_distance(ue.position) <= kFrontTol)
                continue;
            const Vec3 image = mirror_point(ue.position, f.normal, f.plane_offset());
            const auto ip = cross_plane(f, bs.position, image);
            if (!ip || !f.contains(*ip))
                continue;
            if (scene.segment_blocked(ue.position, *ip) || scene.segment_blocked(*ip, bs.position))
                continue;
            const auto aoa = arrival(*ip);
            if (!aoa)
                continue;
            paths.push_back({{}, (image - bs.position).norm(), *aoa, 1, {*ip}, {static_cast<int>(i)}});
        }
    }

    if (max_bounce >= 2)
    {
        for (std::size_t i = 0; i < fac.size(); ++i)
        {
            const Facade &f1 = fac[i];
            if (f1.signed_distance(ue.position) <= kFrontTol)
                continue;
            const Vec3 image1 = mirror_point(ue.position, f1.normal, f1.plane_offset());
            for (std::size_t j = 0; j < fac.size(); ++j)
            {
                if (i == j)
                    continue;
                const Facade &f2 = fac[j];
                const Vec3 image2 = mirror_point(image1, f2.normal, f2.plane_offset());
                const auto p2 = cross_plane(f2, bs.position, image2);
                if (!p2 || !f2.contains(*p2))
                    continue;
                const auto p1 = cross_plane(f1, *p2, image1);
                if (!p1 || !f1.contains(*p1))
                    continue;
                if (f2.signed_distance(*p1) <= kFrontTol)
                    continue;
                if (scene.segment_blocked(ue.position, *p1) || scene.segment_blocked(*p1, *p2) ||
                    scene.segment_blocked(*p2, bs.position))
                    continue;
                const auto aoa = arrival(*p2);
                if (!aoa)
                    continue;
                paths.push_back({{},
                                 (image2 - bs.position).norm(),
                                 *aoa,
                                 2,
                                 {*p1, *p2},
                                 {static_cast<int>(i), static_cast<int>(j)}});
            }
        }
    }

    std::mt19937_64 rng(phase_seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (auto &p : paths)
    {
        const double mag = wavelength / (4.0 * kPi * p.delay_range) *
                           std::pow(scene.reflection_coefficient, p.bounce_order);
        p.gain = std::polar(mag, phase(rng));
    }

    std::stable_sort(paths.begin(), paths.end(),
                     [](const TruePath &a, const TruePath &b) { return std::abs(a.gain) > std::abs(b.gain); });
    if (paths.size() > static_cast<std::size_t>(scene.max_paths))
        paths.resize(scene.max_paths);
    return paths;
}

} // namespace isac
