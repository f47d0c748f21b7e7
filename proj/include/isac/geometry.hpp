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

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace isac
{

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// Orientation of an array as Euler angles in radians, ordered roll, pitch, yaw.
struct EulerAngles
{
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;

    bool operator==(const EulerAngles &) const = default;
};

// Azimuth / elevation pair in radians. Azimuth is measured in the local x-y plane
// from the local x axis (array boresight), elevation from that plane towards +z.
struct Aoa
{
    double az = 0.0;
    double el = 0.0;

    bool operator==(const Aoa &) const = default;
};

// Rotation taking local array coordinates to the global frame:
// Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 local_to_global(const EulerAngles &orientation);

// Rotation taking global coordinates to the local array frame (transpose of the above).
Mat3 global_to_local(const EulerAngles &orientation);

// Unit vector [cos az cos el, sin az cos el, sin el] in the local frame.
Vec3 unit_from_aoa(const Aoa &aoa);

// Inverse of unit_from_aoa; the input does not need to be normalized.
Aoa aoa_from_direction(const Vec3 &local_direction);

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

// Mirror image of a point across the plane {x : n.x = offset}, with n unit length.
Vec3 mirror_point(const Vec3 &p, const Vec3 &unit_normal, double offset);

// Deterministic 64 bit mixer used to derive independent RNG streams from structured keys.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t d = 0);

} // namespace isac
