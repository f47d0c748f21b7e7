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
#include <stdexcept>
#include <vector>

#include "isac/chanest.hpp"
#include "isac/scene.hpp"

namespace isac
{

// Measurement z = (delay_range [m], azimuth [rad], elevation [rad]) with covariance R.
struct LosMeasurement
{
    Eigen::Vector3d z = Eigen::Vector3d::Zero();
    Mat3 covariance = Mat3::Identity();
};

struct MeasurementSigmas
{
    double delay_range = 0.3;        // m
    double az = 0.3 * kPi / 180.0;   // rad
    double el = 0.3 * kPi / 180.0;   // rad

    Mat3 covariance() const;
};

struct UePositionEstimate
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0; // known height
    bool converged = false;
    double objective = 0.0;
    int iterations = 0;

    Vec3 position() const { return {x, y, z}; }
};

struct IpEstimate
{
    Vec3 position = Vec3::Zero();
    int bs_id = -1;
    int ue_id = -1;
    int time_step = -1;
    int path_index = -1;
    double alpha = 0.0; // distance from the BS along the bearing, m

    bool operator==(const IpEstimate &) const = default;
};

struct NoLosError : std::runtime_error
{
    NoLosError() : std::runtime_error("no estimated paths; snapshot skipped for positioning") {}
};

struct InfeasiblePathError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct LosSelection
{
    EstimatedPath los;
    std::vector<EstimatedPath> nlos;
    std::vector<int> nlos_indices; // positions in the input list
};

// Shortest path is taken as LoS; ties go to the lowest index.
LosSelection select_los(std::span<const EstimatedPath> paths);

// (range, az, el) of the UE as seen from the BS array.
Eigen::Vector3d measurement_of(const Vec3 &ue_position, const BsState &bs);

// Global-frame unit vector for an arrival direction: R(psi)^T [cos az cos el, sin az cos el, sin el].
Vec3 bearing_vector(const Aoa &aoa, const EulerAngles &orientation);

struct LocateOptions
{
    int max_iterations = 20000;
    double gradient_tol = 1e-9;
};

// Weighted least-squares UE fix in the known-height plane by gradient descent with
// backtracking, started from the direct back-projection of the measurement.
UePositionEstimate locate_ue(const LosMeasurement &z, const BsState &bs, double known_height,
                             const LocateOptions &options = {}, std::vector<double> *objective_trace = nullptr);

// Intersection of the bearing half-line from the BS with the ellipsoid {x : |x-UE| + |x-BS| = r}:
// alpha = (r^2 - |d|^2) / (2 (r - u.d)),  d = UE - BS.
IpEstimate estimate_ip(double delay_range, const Aoa &aoa, const Vec3 &ue_position, const BsState &bs);

} // namespace isac
