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

#include "isac/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace isac
{

Mat3 local_to_global(const EulerAngles &o)
{
    const double cr = std::cos(o.roll), sr = std::sin(o.roll);
    const double cp = std::cos(o.pitch), sp = std::sin(o.pitch);
    const double cy = std::cos(o.yaw), sy = std::sin(o.yaw);

    Mat3 rx, ry, rz;
    rx << 1.0, 0.0, 0.0,
        0.0, cr, -sr,
        0.0, sr, cr;
    ry << cp, 0.0, sp,
        0.0, 1.0, 0.0,
        -sp, 0.0, cp;
    rz << cy, -sy, 0.0,
        sy, cy, 0.0,
        0.0, 0.0, 1.0;
    return rz * ry * rx;
}

Mat3 global_to_local(const EulerAngles &orientation)
{
    return local_to_global(orientation).transpose();
}

Vec3 unit_from_aoa(const Aoa &aoa)
{
    const double ce = std::cos(aoa.el);
    return {std::cos(aoa.az) * ce, std::sin(aoa.az) * ce, std::sin(aoa.el)};
}

Aoa aoa_from_direction(const Vec3 &v)
{
    const double n = v.norm();
    const double sz = std::clamp(v.z() / n, -1.0, 1.0);
    return {std::atan2(v.y(), v.x()), std::asin(sz)};
}

double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * kPi); // [-pi, pi]
    if (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

Vec3 mirror_point(const Vec3 &p, const Vec3 &n, double offset)
{
    return p - 2.0 * (n.dot(p) - offset) * n;
}

static std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d)
{
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t v : {a, b, c, d})
        h = splitmix64(h ^ splitmix64(v));
    return h;
}

} // namespace isac
