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

#include "isac/posmap.hpp"

#include <cmath>

namespace isac
{

namespace
{

struct Linearization
{
    Eigen::Vector3d h;
    Eigen::Matrix<double, 3, 2> jac; // d h / d (x, y)
};

Linearization linearize(const Vec2 &xy, double height, const BsState &bs, const Mat3 &to_local)
{
    const Vec3 v = to_local * (Vec3(xy.x(), xy.y(), height) - bs.position);
    const double rho2 = v.squaredNorm(), rho = std::sqrt(rho2);
    const double s2 = v.x() * v.x() + v.y() * v.y(), s = std::sqrt(s2);

    Linearization lin;
    lin.h << rho, std::atan2(v.y(), v.x()), std::atan2(v.z(), s);

    Eigen::Matrix3d dh_dv;
    dh_dv.row(0) = v.transpose() / rho;
    dh_dv.row(1) << -v.y() / s2, v.x() / s2, 0.0;
    dh_dv.row(2) << -v.z() * v.x() / (rho2 * s), -v.z() * v.y() / (rho2 * s), s / rho2;
    lin.jac = dh_dv * to_local.leftCols<2>();
    return lin;
}

Eigen::Vector3d residual(const Eigen::Vector3d &z, const Eigen::Vector3d &h)
{
    return {z[0] - h[0], wrap_angle(z[1] - h[1]), wrap_angle(z[2] - h[2])};
}

} // namespace

Mat3 MeasurementSigmas::covariance() const
{
    return Eigen::Vector3d(delay_range * delay_range, az * az, el * el).asDiagonal();
}

LosSelection select_los(std::span<const EstimatedPath> paths)
{
    if (paths.empty())
        throw NoLosError();
    std::size_t best = 0;
    for (std::size_t i = 1; i < paths.size(); ++i)
        if (paths[i].delay_range < paths[best].delay_range)
            best = i;

    LosSelection sel;
    sel.los = paths[best];
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (i != best)
        {
            sel.nlos.push_back(paths[i]);
            sel.nlos_indices.push_back(static_cast<int>(i));
        }
    return sel;
}

Eigen::Vector3d measurement_of(const Vec3 &ue_position, const BsState &bs)
{
    const Vec3 v = global_to_local(bs.orientation) * (ue_position - bs.position);
    const Aoa a = aoa_from_direction(v);
    return {v.norm(), a.az, a.el};
}

Vec3 bearing_vector(const Aoa &aoa, const EulerAngles &orientation)
{
    return local_to_global(orientation) * unit_from_aoa(aoa);
}

UePositionEstimate locate_ue(const LosMeasurement &m, const BsState &bs, double known_height,
                             const LocateOptions &options, std::vector<double> *trace)
{
    const Eigen::LLT<Mat3> llt(m.covariance);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("measurement covariance is not positive definite");
    const Mat3 info = llt.solve(Mat3::Identity());
    const Mat3 to_local = global_to_local(bs.orientation);

    auto objective = [&](const Vec2 &xy, Eigen::Vector2d *grad) {
        const Linearization lin = linearize(xy, known_height, bs, to_local);
        const Eigen::Vector3d r = residual(m.z, lin.h);
        if (grad)
            *grad = -2.0 * lin.jac.transpose() * (info * r);
        return r.dot(info * r);
    };

    // Back-projection of (range, bearing) onto the known-height plane.
    const double range = m.z[0];
    const Vec3 u = bearing_vector({m.z[1], m.z[2]}, bs.orientation);
    Vec2 dir(u.x(), u.y());
    if (dir.norm() < 1e-12)
        dir = Vec2(1.0, 0.0);
    dir.normalize();
    const double dz = known_height - bs.position.z();
    const double horizontal = range > std::abs(dz) ? std::sqrt(range * range - dz * dz)
                                                   : range * std::cos(m.z[2]);
    Vec2 xy = bs.position.head<2>() + horizontal * dir;

    UePositionEstimate est;
    Eigen::Vector2d g;
    double f = objective(xy, &g);
    if (trace)
        trace->push_back(f);

    Vec2 prev_xy = xy;
    Eigen::Vector2d prev_g = g;
    bool have_prev = false;
    int it = 0;
    for (; it < options.max_iterations; ++it)
    {
        const double gn = g.norm();
        if (gn < options.gradient_tol)
        {
            est.converged = true;
            break;
        }

        double step = 1.0 / gn; // first move of about one metre
        if (have_prev)
        {
            const Eigen::Vector2d s = xy - prev_xy, y = g - prev_g;
            const double sy = s.dot(y);
            if (sy > 0.0)
                step = s.squaredNorm() / sy;
        }

        bool moved = false;
        for (int k = 0; k < 80; ++k, step *= 0.5)
        {
            const Vec2 trial = xy - step * g;
            Eigen::Vector2d g_trial;
            const double f_trial = objective(trial, &g_trial);
            if (f_trial <= f - 1e-4 * step * gn * gn)
            {
                prev_xy = xy;
                prev_g = g;
                xy = trial;
                g = g_trial;
                f = f_trial;
                moved = true;
                break;
            }
        }
        if (trace)
            trace->push_back(f);
        if (!moved)
        {
            // No representable decrease left: we are at the floating-point floor of the minimum.
            est.converged = g.norm() < 1e-6;
            break;
        }
        have_prev = true;
    }

    est.x = xy.x();
    est.y = xy.y();
    est.z = known_height;
    est.objective = f;
    est.iterations = it;
    return est;
}

IpEstimate estimate_ip(double r, const Aoa &aoa, const Vec3 &ue, const BsState &bs)
{
    const Vec3 u = bearing_vector(aoa, bs.orientation);
    const Vec3 d = ue - bs.position;
    const double dn = d.norm();
    if (r <= dn)
        throw InfeasiblePathError("path range does not exceed the BS-UE distance");
    const double denom = r - u.dot(d);
    if (denom <= 0.0)
        throw InfeasiblePathError("bearing is inconsistent with the path range");
    const double alpha = (r * r - dn * dn) / (2.0 * denom);
    if (alpha <= 0.0)
        throw InfeasiblePathError("interaction point lies behind the BS");

    IpEstimate ip;
    ip.position = bs.position + alpha * u;
    ip.alpha = alpha;
    ip.bs_id = bs.id;

    const double ellipse_err = std::abs((ip.position - ue).norm() + alpha - r);
    const double ray_err = std::abs((ip.position - bs.position).dot(u) - (ip.position - bs.position).norm());
    if (ellipse_err > 1e-6 || ray_err > 1e-6)
        throw InfeasiblePathError("interaction point fails the geometric constraints");
    return ip;
}

} // namespace isac
