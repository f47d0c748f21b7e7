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

#include "isac/dbscan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <unordered_map>

namespace isac
{

namespace
{

// Uniform grid with cell size eps for radius queries.
class Grid
{
  public:
    Grid(std::span<const Vec3> pts, double cell) : pts_(pts), cell_(cell)
    {
        for (std::size_t i = 0; i < pts.size(); ++i)
            cells_[key(cell_of(pts[i]))].push_back(static_cast<int>(i));
    }

    // Indices within distance r of point i (inclusive), ascending.
    std::vector<int> neighbours(int i, double r) const
    {
        std::vector<int> out;
        const auto c = cell_of(pts_[i]);
        const double r2 = r * r;
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz)
                {
                    auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it == cells_.end())
                        continue;
                    for (int j : it->second)
                        if ((pts_[j] - pts_[i]).squaredNorm() <= r2)
                            out.push_back(j);
                }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    using Cell = std::array<long, 3>;

    Cell cell_of(const Vec3 &p) const
    {
        return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_)),
                static_cast<long>(std::floor(p.z() / cell_))};
    }

    static std::uint64_t key(const Cell &c)
    {
        const auto u = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1FFFFFULL; };
        return u(c[0]) | (u(c[1]) << 21) | (u(c[2]) << 42);
    }

    std::span<const Vec3> pts_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

} // namespace

void DbscanParams::validate() const
{
    if (!(eps > 0.0))
        throw std::invalid_argument("DBSCAN eps must be positive");
    if (min_pts < 1)
        throw std::invalid_argument("DBSCAN min_pts must be at least 1");
}

Clustering cluster_points(std::span<const Vec3> points, const DbscanParams &params)
{
    params.validate();
    const int n = static_cast<int>(points.size());
    Clustering out;
    out.labels.assign(n, -1);
    out.core.assign(n, false);
    if (n == 0)
        return out;

    // Cells are indexed with 21 bits per axis; keep the grid coarse enough for far-flung data.
    double extent = 0.0;
    for (const auto &p : points)
        extent = std::max(extent, p.cwiseAbs().maxCoeff());
    const double cell = std::max(params.eps, extent / 1.0e5);
    const Grid grid(points, cell);

    std::vector<std::vector<int>> nbrs(n);
    for (int i = 0; i < n; ++i)
    {
        nbrs[i] = grid.neighbours(i, params.eps);
        out.core[i] = static_cast<int>(nbrs[i].size()) >= params.min_pts;
    }

    constexpr int kUnassigned = -1;
    for (int i = 0; i < n; ++i)
    {
        if (!out.core[i] || out.labels[i] != kUnassigned)
            continue;
        const int label = out.cluster_count();
        out.clusters.emplace_back();
        std::deque<int> queue{i};
        out.labels[i] = label;
        while (!queue.empty())
        {
            const int p = queue.front();
            queue.pop_front();
            for (int q : nbrs[p])
            {
                if (out.labels[q] != kUnassigned)
                    continue;
                out.labels[q] = label;
                if (out.core[q])
                    queue.push_back(q);
            }
        }
    }

    for (int i = 0; i < n; ++i)
    {
        if (out.labels[i] < 0)
            out.outliers.push_back(i);
        else
            out.clusters[out.labels[i]].push_back(i);
    }
    return out;
}

} // namespace isac
