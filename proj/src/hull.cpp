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

#include "isac/hull.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace isac
{

namespace
{

std::uint64_t edge_key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

class Quickhull
{
  public:
    Quickhull(std::span<const Vec3> pts, double eps) : pts_(pts), eps_(eps) {}

    Hull run()
    {
        initial_simplex();
        std::vector<int> work;
        for (int f = 0; f < static_cast<int>(faces_.size()); ++f)
            work.push_back(f);
        while (!work.empty())
        {
            const int f = work.back();
            work.pop_back();
            if (!faces_[f].alive || faces_[f].outside.empty())
                continue;
            expand(f, work);
        }
        return collect();
    }

  private:
    struct Face
    {
        int a, b, c;
        Vec3 n;
        double off;
        std::vector<int> outside;
        bool alive = true;
    };

    double dist(const Face &f, int p) const { return f.n.dot(pts_[p]) - f.off; }

    int add_face(int a, int b, int c)
    {
        Face f{a, b, c, Vec3::Zero(), 0.0, {}, true};
        f.n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
        const double len = f.n.norm();
        if (len > 0.0)
            f.n /= len;
        f.off = f.n.dot(pts_[a]);
        const int id = static_cast<int>(faces_.size());
        faces_.push_back(std::move(f));
        edges_[edge_key(a, b)] = id;
        edges_[edge_key(b, c)] = id;
        edges_[edge_key(c, a)] = id;
        return id;
    }

    void kill(int id)
    {
        Face &f = faces_[id];
        f.alive = false;
        for (auto [x, y] : {std::pair{f.a, f.b}, std::pair{f.b, f.c}, std::pair{f.c, f.a}})
        {
            auto it = edges_.find(edge_key(x, y));
            if (it != edges_.end() && it->second == id)
                edges_.erase(it);
        }
    }

    void initial_simplex()
    {
        const int n = static_cast<int>(pts_.size());
        int i0 = 0, i1 = 0;
        double best_extent = -1.0;
        for (int k = 0; k < 3; ++k)
        {
            int lo = 0, hi = 0;
            for (int i = 1; i < n; ++i)
            {
                if (pts_[i][k] < pts_[lo][k])
                    lo = i;
                if (pts_[i][k] > pts_[hi][k])
                    hi = i;
            }
            if (pts_[hi][k] - pts_[lo][k] > best_extent)
            {
                best_extent = pts_[hi][k] - pts_[lo][k];
                i0 = lo;
                i1 = hi;
            }
        }
        const Vec3 dir = (pts_[i1] - pts_[i0]).normalized();
        int i2 = -1;
        double best = -1.0;
        for (int i = 0; i < n; ++i)
        {
            const Vec3 r = pts_[i] - pts_[i0];
            const double d = (r - r.dot(dir) * dir).norm();
            if (d > best)
            {
                best = d;
                i2 = i;
            }
        }
        const Vec3 nrm = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
        int i3 = -1;
        best = -1.0;
        for (int i = 0; i < n; ++i)
        {
            const double d = std::abs(nrm.dot(pts_[i] - pts_[i0]));
            if (d > best)
            {
                best = d;
                i3 = i;
            }
        }
        if (best <= eps_)
            throw std::logic_error("quickhull called on a degenerate point set");

        const std::array<int, 4> s{i0, i1, i2, i3};
        const Vec3 centre = 0.25 * (pts_[i0] + pts_[i1] + pts_[i2] + pts_[i3]);
        for (const auto &t : {std::array{0, 1, 2}, std::array{0, 1, 3}, std::array{0, 2, 3}, std::array{1, 2, 3}})
        {
            int a = s[t[0]], b = s[t[1]], c = s[t[2]];
            const Vec3 nn = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
            if (nn.dot(centre - pts_[a]) > 0.0)
                std::swap(b, c);
            add_face(a, b, c);
        }

        for (int i = 0; i < n; ++i)
        {
            if (i == i0 || i == i1 || i == i2 || i == i3)
                continue;
            for (auto &f : faces_)
                if (dist(f, i) > eps_)
                {
                    f.outside.push_back(i);
                    break;
                }
        }
    }

    void expand(int f0, std::vector<int> &work)
    {
        const Face &start = faces_[f0];
        int p = start.outside.front();
        double best = dist(start, p);
        for (int q : start.outside)
            if (const double d = dist(start, q); d > best)
            {
                best = d;
                p = q;
            }

        std::vector<int> visible{f0};
        std::vector<char> mark(faces_.size(), 0);
        mark[f0] = 1;
        std::vector<std::pair<int, int>> horizon;
        for (std::size_t k = 0; k < visible.size(); ++k)
        {
            const Face &g = faces_[visible[k]];
            for (auto [x, y] : {std::pair{g.a, g.b}, std::pair{g.b, g.c}, std::pair{g.c, g.a}})
            {
                const auto it = edges_.find(edge_key(y, x));
                if (it == edges_.end())
                    throw std::logic_error("quickhull mesh is not closed");
                const int h = it->second;
                if (mark[h] == 1)
                    continue;
                if (dist(faces_[h], p) > eps_)
                {
                    mark[h] = 1;
                    visible.push_back(h);
                }
                else
                {
                    horizon.emplace_back(x, y);
                }
            }
        }
        // An edge recorded as horizon may have become interior once its far face turned visible.
        std::erase_if(horizon, [&](const std::pair<int, int> &e) {
            return mark[edges_.at(edge_key(e.second, e.first))] == 1;
        });

        std::vector<int> orphans;
        for (int v : visible)
            for (int q : faces_[v].outside)
                if (q != p)
                    orphans.push_back(q);
        for (int v : visible)
        {
            faces_[v].outside.clear();
            kill(v);
        }

        std::vector<int> created;
        for (auto [x, y] : horizon)
            created.push_back(add_face(x, y, p));

        for (int q : orphans)
        {
            bool placed = false;
            for (int c : created)
                if (dist(faces_[c], q) > eps_)
                {
                    faces_[c].outside.push_back(q);
                    placed = true;
                    break;
                }
            if (placed)
                continue;
            for (int c = 0; c < static_cast<int>(faces_.size()); ++c)
                if (faces_[c].alive && dist(faces_[c], q) > eps_)
                {
                    faces_[c].outside.push_back(q);
                    work.push_back(c);
                    break;
                }
        }
        for (int c : created)
            if (!faces_[c].outside.empty())
                work.push_back(c);
    }

    Hull collect() const
    {
        Hull h;
        h.kind = HullKind::solid;
        std::map<int, int> remap;
        for (const auto &f : faces_)
            if (f.alive)
                for (int v : {f.a, f.b, f.c})
                    remap.emplace(v, 0);
        for (auto &[id, local] : remap)
        {
            local = static_cast<int>(h.vertices.size());
            h.vertices.push_back(pts_[id]);
            h.vertex_ids.push_back(id);
        }
        for (const auto &f : faces_)
            if (f.alive)
            {
                h.faces.push_back({{remap.at(f.a), remap.at(f.b), remap.at(f.c)}, f.n, f.off});
                h.halfspaces.push_back({f.n, f.off});
            }
        return h;
    }

    std::span<const Vec3> pts_;
    double eps_;
    std::vector<Face> faces_;
    std::unordered_map<std::uint64_t, int> edges_;
};

void add_box_halfspaces(Hull &h, const Vec3 &centre, const std::array<Vec3, 3> &axes,
                        const std::array<double, 3> &lo, const std::array<double, 3> &hi)
{
    for (int k = 0; k < 3; ++k)
    {
        h.halfspaces.push_back({axes[k], axes[k].dot(centre) + hi[k]});
        h.halfspaces.push_back({-axes[k], -axes[k].dot(centre) - lo[k]});
    }
}

} // namespace

std::string_view to_string(HullKind kind)
{
    switch (kind)
    {
    case HullKind::solid:
        return "solid";
    case HullKind::planar:
        return "planar";
    case HullKind::linear:
        return "linear";
    case HullKind::point:
        return "point";
    }
    return "point";
}

HullKind hull_kind_from_string(std::string_view s)
{
    for (auto k : {HullKind::solid, HullKind::planar, HullKind::linear, HullKind::point})
        if (to_string(k) == s)
            return k;
    throw std::invalid_argument("unknown hull kind '" + std::string(s) + "'");
}

double Hull::signed_distance(const Vec3 &p) const
{
    double d = -std::numeric_limits<double>::infinity();
    for (const auto &hs : halfspaces)
        d = std::max(d, hs.normal.dot(p) - hs.offset);
    return d;
}

std::vector<int> convex_hull_2d(std::span<const Vec2> pts, double tol)
{
    const int n = static_cast<int>(pts.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (pts[a].x() != pts[b].x())
            return pts[a].x() < pts[b].x();
        if (pts[a].y() != pts[b].y())
            return pts[a].y() < pts[b].y();
        return a < b;
    });
    idx.erase(std::unique(idx.begin(), idx.end(), [&](int a, int b) { return pts[a] == pts[b]; }), idx.end());
    if (idx.size() < 3)
        return idx;

    auto cross = [&](int o, int a, int b) {
        const Vec2 u = pts[a] - pts[o], v = pts[b] - pts[o];
        return u.x() * v.y() - u.y() * v.x();
    };
    std::vector<int> hull(2 * idx.size());
    std::size_t k = 0;
    for (int i : idx)
    {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], i) <= tol)
            --k;
        hull[k++] = i;
    }
    for (std::size_t j = idx.size() - 1, t = k + 1; j-- > 0;)
    {
        const int i = idx[j];
        while (k >= t && cross(hull[k - 2], hull[k - 1], i) <= tol)
            --k;
        hull[k++] = i;
    }
    hull.resize(k - 1);
    return hull;
}

Hull convex_hull(std::span<const Vec3> points)
{
    if (points.empty())
        throw std::invalid_argument("convex hull of an empty point set");

    const int n = static_cast<int>(points.size());
    Vec3 centre = Vec3::Zero();
    for (const auto &p : points)
        centre += p;
    centre /= n;
    Mat3 cov = Mat3::Zero();
    for (const auto &p : points)
        cov += (p - centre) * (p - centre).transpose();
    const Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const Vec3 e_min = es.eigenvectors().col(0);
    const Vec3 e_max = es.eigenvectors().col(2);

    double plane_dev = 0.0, line_dev = 0.0, point_dev = 0.0;
    for (const auto &p : points)
    {
        const Vec3 r = p - centre;
        plane_dev = std::max(plane_dev, std::abs(r.dot(e_min)));
        line_dev = std::max(line_dev, (r - r.dot(e_max) * e_max).norm());
        point_dev = std::max(point_dev, r.norm());
    }

    const double half = 0.5 * kHullThickness;
    Hull h;

    if (point_dev <= kDegenerateTol)
    {
        h.kind = HullKind::point;
        h.vertices = {points[0]};
        h.vertex_ids = {0};
        add_box_halfspaces(h, centre, {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, {-half, -half, -half},
                           {half, half, half});
        return h;
    }

    if (line_dev <= kDegenerateTol)
    {
        int lo = 0, hi = 0;
        for (int i = 1; i < n; ++i)
        {
            const double s = (points[i] - centre).dot(e_max);
            if (s < (points[lo] - centre).dot(e_max))
                lo = i;
            if (s > (points[hi] - centre).dot(e_max))
                hi = i;
        }
        h.kind = HullKind::linear;
        h.vertices = {points[lo], points[hi]};
        h.vertex_ids = {lo, hi};
        const Vec3 side1 = e_max.unitOrthogonal();
        const Vec3 side2 = e_max.cross(side1);
        add_box_halfspaces(h, centre, {e_max, side1, side2},
                           {(points[lo] - centre).dot(e_max), -half, -half},
                           {(points[hi] - centre).dot(e_max), half, half});
        return h;
    }

    if (plane_dev <= kDegenerateTol)
    {
        const Vec3 nrm = e_min;
        const Vec3 b1 = e_max;
        const Vec3 b2 = nrm.cross(b1);
        std::vector<Vec2> flat(n);
        for (int i = 0; i < n; ++i)
            flat[i] = Vec2((points[i] - centre).dot(b1), (points[i] - centre).dot(b2));
        const std::vector<int> loop = convex_hull_2d(flat);

        h.kind = HullKind::planar;
        for (int i : loop)
        {
            h.vertices.push_back(points[i]);
            h.vertex_ids.push_back(i);
        }
        const int m = static_cast<int>(loop.size());
        for (int i = 1; i + 1 < m; ++i)
            h.faces.push_back({{0, i, i + 1}, nrm, nrm.dot(centre)});
        for (int i = 0; i < m; ++i)
        {
            const Vec3 &a = h.vertices[i];
            const Vec3 &b = h.vertices[(i + 1) % m];
            const Vec3 out = (b - a).cross(nrm).normalized();
            h.halfspaces.push_back({out, out.dot(a)});
        }
        h.halfspaces.push_back({nrm, nrm.dot(centre) + half});
        h.halfspaces.push_back({-nrm, -nrm.dot(centre) + half});
        return h;
    }

    double scale = 0.0;
    for (int k = 0; k < 3; ++k)
    {
        double m = 0.0;
        for (const auto &p : points)
            m = std::max(m, std::abs(p[k]));
        scale += m;
    }
    const double eps = 100.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1.0);
    return Quickhull(points, eps).run();
}

bool segment_intersects_hull(const Vec3 &a, const Vec3 &b, const Hull &hull)
{
    const Vec3 d = b - a;
    const double len = d.norm();
    if (len <= 2.0 * kSegmentClearance)
        return false;
    double s0 = kSegmentClearance / len, s1 = 1.0 - kSegmentClearance / len;
    for (const auto &hs : hull.halfspaces)
    {
        const double num = hs.offset + kBoundaryTol - hs.normal.dot(a);
        const double den = hs.normal.dot(d);
        if (std::abs(den) < 1e-300)
        {
            if (num < 0.0)
                return false;
            continue;
        }
        const double s = num / den;
        if (den > 0.0)
            s1 = std::min(s1, s);
        else
            s0 = std::max(s0, s);
        if (s0 > s1)
            return false;
    }
    return true;
}

std::vector<Vec2> top_view_outline(const Hull &hull)
{
    std::vector<Vec2> flat;
    for (const auto &v : hull.vertices)
        flat.emplace_back(v.x(), v.y());
    std::vector<Vec2> out;
    for (int i : convex_hull_2d(flat))
        out.push_back(flat[i]);
    return out;
}

} // namespace isac
