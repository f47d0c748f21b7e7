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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "isac/fusion.hpp"

#include "oracles.hpp"

using namespace isac;
using Catch::Approx;

namespace
{

std::vector<Vec3> cube_corners(double lo = 0.0, double hi = 1.0)
{
    std::vector<Vec3> c;
    for (int i = 0; i < 8; ++i)
        c.emplace_back(i & 1 ? hi : lo, i & 2 ? hi : lo, i & 4 ? hi : lo);
    return c;
}

// Clustered random pool: a few Gaussian blobs plus uniform clutter.
std::vector<Vec3> random_pool(std::mt19937_64 &rng, int blobs, int per_blob, int clutter)
{
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::normal_distribution<double> n(0.0, 1.2);
    std::vector<Vec3> pts;
    for (int b = 0; b < blobs; ++b)
    {
        const Vec3 c(u(rng), u(rng), 0.2 * u(rng));
        for (int i = 0; i < per_blob; ++i)
            pts.push_back(c + Vec3(n(rng), n(rng), n(rng)));
    }
    for (int i = 0; i < clutter; ++i)
        pts.emplace_back(u(rng), u(rng), 0.2 * u(rng));
    std::shuffle(pts.begin(), pts.end(), rng);
    return pts;
}

// Every undirected edge is shared by exactly two faces that traverse it in opposite directions.
bool watertight(const Hull &h)
{
    std::map<std::pair<int, int>, int> directed;
    for (const auto &f : h.faces)
        for (int e = 0; e < 3; ++e)
            ++directed[{f.v[e], f.v[(e + 1) % 3]}];
    for (const auto &[edge, count] : directed)
    {
        if (count != 1)
            return false;
        const auto rev = directed.find({edge.second, edge.first});
        if (rev == directed.end() || rev->second != 1)
            return false;
    }
    return true;
}

IpEstimate ip_at(const Vec3 &p, int bs = 1, int ue = 0, int t = 0)
{
    IpEstimate ip;
    ip.position = p;
    ip.bs_id = bs;
    ip.ue_id = ue;
    ip.time_step = t;
    return ip;
}

} // namespace

TEST_CASE("density clustering", "[fusion]")
{
    const DbscanParams params{3.0, 5};

    SECTION("empty pool")
    {
        const auto c = cluster_points(std::span<const Vec3>{}, params);
        CHECK(c.labels.empty());
        CHECK(c.cluster_count() == 0);
        CHECK(c.outliers.empty());
    }
    SECTION("a tight group of six forms one cluster")
    {
        const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0.5, 0.5, 0.5}};
        const auto c = cluster_points(pts, params);
        CHECK(c.cluster_count() == 1);
        CHECK(c.clusters[0] == std::vector<int>{0, 1, 2, 3, 4, 5});
        CHECK(c.outliers.empty());
    }
    SECTION("too few neighbours leaves only outliers")
    {
        const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        const auto c = cluster_points(pts, params);
        CHECK(c.cluster_count() == 0);
        CHECK(c.outliers == std::vector<int>{0, 1, 2, 3});
    }
    SECTION("matches a quadratic-time reference")
    {
        for (int seed = 0; seed < 30; ++seed)
        {
            std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
            const auto pts = random_pool(rng, 4, 25, 40);
            const auto c = cluster_points(pts, params);
            const auto ref = oracle::brute_dbscan(pts, params.eps, params.min_pts);
            CHECK(oracle::same_partition(c.labels, ref));
            CHECK(c.labels == ref);

            // Bookkeeping is consistent with the labels.
            std::vector<int> outliers;
            for (int i = 0; i < static_cast<int>(pts.size()); ++i)
                if (c.labels[i] < 0)
                    outliers.push_back(i);
            CHECK(c.outliers == outliers);
            for (int k = 0; k < c.cluster_count(); ++k)
            {
                CHECK(std::is_sorted(c.clusters[k].begin(), c.clusters[k].end()));
                for (int i : c.clusters[k])
                    CHECK(c.labels[i] == k);
            }
        }
    }
    SECTION("a larger radius only merges clusters")
    {
        std::mt19937_64 rng(99);
        const auto pts = random_pool(rng, 5, 20, 60);
        const auto small = cluster_points(pts, {2.0, 5});
        const auto large = cluster_points(pts, {4.0, 5});
        for (int k = 0; k < small.cluster_count(); ++k)
        {
            std::set<int> target;
            for (int i : small.clusters[k])
                if (small.core[i])
                    target.insert(large.labels[i]);
            CHECK(target.size() == 1);
            CHECK(*target.begin() >= 0);
        }
        for (int i : large.outliers)
            CHECK(small.labels[i] < 0);
    }
    SECTION("parameter validation")
    {
        const std::vector<Vec3> pts = {{0, 0, 0}};
        CHECK_THROWS(cluster_points(pts, {0.0, 5}));
        CHECK_THROWS(cluster_points(pts, {-1.0, 5}));
        CHECK_THROWS(cluster_points(pts, {3.0, 0}));
    }
}

TEST_CASE("convex hulls", "[fusion]")
{
    SECTION("tetrahedron")
    {
        const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        const Hull h = convex_hull(pts);
        CHECK(h.kind == HullKind::solid);
        CHECK(h.vertices.size() == 4);
        CHECK(h.faces.size() == 4);
        CHECK(watertight(h));
        CHECK(h.contains(Vec3(0.1, 0.1, 0.1)));
        CHECK_FALSE(h.contains(Vec3(0.5, 0.5, 0.5)));
    }
    SECTION("cube with an interior point")
    {
        auto pts = cube_corners();
        pts.emplace_back(0.5, 0.5, 0.5);
        const Hull h = convex_hull(pts);
        CHECK(h.kind == HullKind::solid);
        CHECK(h.vertices.size() == 8);
        CHECK(h.faces.size() == 12);
        CHECK(std::find(h.vertex_ids.begin(), h.vertex_ids.end(), 8) == h.vertex_ids.end());
        CHECK(watertight(h));
        CHECK(h.signed_distance(Vec3(0.5, 0.5, 0.5)) == Approx(-0.5));
        CHECK(h.signed_distance(Vec3(1.5, 0.5, 0.5)) == Approx(0.5));
    }
    SECTION("random balls match the extreme-point reference")
    {
        for (int seed = 0; seed < 3; ++seed)
        {
            std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 40);
            std::normal_distribution<double> n(0.0, 1.0);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<Vec3> pts;
            for (int i = 0; i < 200; ++i)
            {
                const Vec3 d(n(rng), n(rng), n(rng));
                pts.push_back(5.0 * std::cbrt(u(rng)) * d.normalized());
            }
            const Hull h = convex_hull(pts);
            const std::set<int> ids(h.vertex_ids.begin(), h.vertex_ids.end());
            CHECK(ids == oracle::brute_extreme_points(pts));
            CHECK(watertight(h));
            const int v = static_cast<int>(h.vertices.size()), f = static_cast<int>(h.faces.size());
            CHECK(v - 3 * f / 2 + f == 2);
            for (const auto &p : pts)
                CHECK(h.contains(p));
            for (const auto &face : h.faces)
            {
                CHECK(face.normal.norm() == Approx(1.0));
                const Vec3 e = (h.vertices[face.v[1]] - h.vertices[face.v[0]])
                                   .cross(h.vertices[face.v[2]] - h.vertices[face.v[0]]);
                CHECK(e.dot(face.normal) > 0.0);
            }
        }
    }
    SECTION("degenerate clusters")
    {
        const std::vector<Vec3> one = {{2, 3, 4}, {2, 3, 4}};
        CHECK(convex_hull(one).kind == HullKind::point);

        const std::vector<Vec3> line = {{0, 0, 0}, {1, 1, 0}, {3, 3, 0}, {2, 2, 0}};
        const Hull seg = convex_hull(line);
        CHECK(seg.kind == HullKind::linear);
        const std::set<int> ends(seg.vertex_ids.begin(), seg.vertex_ids.end());
        CHECK(ends == std::set<int>{0, 2});

        const std::vector<Vec3> square = {{0, 0, 0}, {4, 0, 0}, {4, 4, 0}, {0, 4, 0}, {2, 2, 0}, {1, 3, 0}};
        const Hull sq = convex_hull(square);
        CHECK(sq.kind == HullKind::planar);
        CHECK(sq.vertices.size() == 4);
        // Extrusion is split evenly about the plane.
        CHECK(sq.contains(Vec3(2, 2, 0.49 * kHullThickness)));
        CHECK(sq.contains(Vec3(2, 2, -0.49 * kHullThickness)));
        CHECK_FALSE(sq.contains(Vec3(2, 2, 0.51 * kHullThickness)));
        CHECK_FALSE(sq.contains(Vec3(5, 2, 0)));
        CHECK(segment_intersects_hull(Vec3(2, 2, -5), Vec3(2, 2, 5), sq));
        CHECK_FALSE(segment_intersects_hull(Vec3(5, 2, -5), Vec3(5, 2, 5), sq));

        CHECK(seg.contains(Vec3(1.5, 1.5, 0.04)));
        CHECK_FALSE(seg.contains(Vec3(1.5, 1.5, 0.06)));
        CHECK(segment_intersects_hull(Vec3(0, 3, 0), Vec3(3, 0, 0), seg));

        const Hull pt = convex_hull(one);
        CHECK(pt.contains(Vec3(2, 3, 4.04)));
        CHECK_FALSE(pt.contains(Vec3(2, 3, 4.06)));
    }
}

TEST_CASE("segment versus hull intersection", "[fusion]")
{
    const Hull cube = convex_hull(cube_corners());
    CHECK(segment_intersects_hull(Vec3(-1, 0.5, 0.5), Vec3(2, 0.5, 0.5), cube));
    CHECK_FALSE(segment_intersects_hull(Vec3(-1, 2, 0.5), Vec3(2, 2, 0.5), cube));
    CHECK(segment_intersects_hull(Vec3(0.5, 0.5, 0.5), Vec3(2, 0.5, 0.5), cube));
    // Endpoints are excluded: a segment that only reaches the surface does not intersect.
    CHECK_FALSE(segment_intersects_hull(Vec3(-1, 0.5, 0.5), Vec3(0, 0.5, 0.5), cube));
    CHECK_FALSE(segment_intersects_hull(Vec3(1, 1, 1), Vec3(2, 2, 2), cube));
    // Grazing along a face counts as contact.
    CHECK(segment_intersects_hull(Vec3(-1, 0.5, 1.0), Vec3(2, 0.5, 1.0), cube));
    // Degenerate input.
    CHECK_FALSE(segment_intersects_hull(Vec3(0.5, 0.5, 0.5), Vec3(0.5, 0.5, 0.5), cube));

    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<Vec3> blob;
    for (int i = 0; i < 60; ++i)
        blob.emplace_back(n(rng), 0.7 * n(rng), 0.5 * n(rng));
    const Hull hulls[] = {cube, convex_hull(blob)};
    int hits = 0;
    for (int i = 0; i < 1000; ++i)
    {
        const Hull &h = hulls[i % 2];
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
        const bool got = segment_intersects_hull(a, b, h);
        const auto s = oracle::sample_segment(a, b, h, 4000);
        if (s.hit && s.min_violation < -1e-6)
            CHECK(got);
        if (got && !s.hit)
            CHECK(s.min_violation <= 0.5 * s.step + 1e-9);
        if (!got)
            CHECK(s.min_violation > -1e-6);
        hits += got;
    }
    CHECK(hits > 100);
    CHECK(hits < 900);
}

TEST_CASE("occlusion pruning", "[fusion]")
{
    // A wall of IPs in the plane x = 10 with a compact blob behind it, seen from a BS at the origin.
    std::vector<IpEstimate> pool;
    for (int y = -3; y <= 3; ++y)
        for (int z = 0; z <= 6; ++z)
            pool.push_back(ip_at(Vec3(10.0, y, z)));
    const int wall = static_cast<int>(pool.size());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> j(-0.4, 0.4);
    for (int i = 0; i < 8; ++i)
        pool.push_back(ip_at(Vec3(15.0 + j(rng), j(rng), 3.0 + j(rng))));
    pool.push_back(ip_at(Vec3(-20.0, -20.0, 0.0)));
    const int stray = static_cast<int>(pool.size()) - 1;

    FusionContext ctx;
    ctx.bs_positions[1] = Vec3(0, 0, 3);
    ctx.ue_positions[{1, 0, 0}] = Vec3(0, 2, 3);
    const DbscanParams params{1.5, 4};

    const LandmarkMap map = build_landmark_map(pool, ctx, params);
    REQUIRE(map.initial_hulls.size() == 2);
    CHECK(map.initial_hulls[0].kind == HullKind::planar);

    std::set<int> removed_ids;
    for (const auto &r : map.removed)
    {
        removed_ids.insert(r.index);
        if (r.index == stray)
        {
            CHECK(r.reason == RemovalReason::dbscan_outlier);
            CHECK(r.hull_label == -1);
            CHECK(r.segment == OccludedSegment::none);
        }
        else
        {
            CHECK(r.index >= wall);
            CHECK(r.reason == RemovalReason::occluded);
            CHECK(r.hull_label == 0);
            CHECK(r.segment == OccludedSegment::bs_side);
        }
    }
    CHECK(removed_ids.size() == 9);
    // Wall IPs touch their own hull but are never tested against it.
    for (int i = 0; i < wall; ++i)
        CHECK(std::binary_search(map.retained.begin(), map.retained.end(), i));

    // Removed and retained partition the pool.
    std::set<int> all(map.retained.begin(), map.retained.end());
    CHECK(all.size() == map.retained.size());
    for (int i : removed_ids)
        CHECK(all.insert(i).second);
    CHECK(all.size() == pool.size());
    CHECK(std::is_sorted(map.retained.begin(), map.retained.end()));
    CHECK(map.final_labels.size() == map.retained.size());
    REQUIRE(map.hulls.size() == 1);
    for (int id : map.hulls[0].vertex_ids)
        CHECK(id < wall);

    CHECK(build_landmark_map(pool, ctx, params) == map);

    SECTION("the UE-side segment is also tested")
    {
        FusionContext ue_ctx = ctx;
        ue_ctx.bs_positions[1] = Vec3(15, 10, 3);
        ue_ctx.ue_positions[{1, 0, 0}] = Vec3(0, 0, 3);
        const auto m = build_landmark_map(pool, ue_ctx, params);
        int ue_side = 0;
        for (const auto &r : m.removed)
            ue_side += r.segment == OccludedSegment::ue_side;
        CHECK(ue_side > 0);
    }
    SECTION("unknown provenance is rejected")
    {
        auto bad = pool;
        bad.push_back(ip_at(Vec3(1, 1, 1), 9));
        CHECK_THROWS_AS(build_landmark_map(bad, ctx, params), ProvenanceError);
        auto bad_ue = pool;
        bad_ue.push_back(ip_at(Vec3(1, 1, 1), 1, 4, 2));
        CHECK_THROWS_AS(build_landmark_map(bad_ue, ctx, params), ProvenanceError);
    }
    SECTION("empty pool")
    {
        const auto m = build_landmark_map(std::span<const IpEstimate>{}, ctx, params);
        CHECK(m.hulls.empty());
        CHECK(m.removed.empty());
        CHECK(m.retained.empty());
    }
    SECTION("label strings round trip")
    {
        for (auto r : {RemovalReason::dbscan_outlier, RemovalReason::occluded})
            CHECK(removal_reason_from_string(to_string(r)) == r);
        for (auto s : {OccludedSegment::none, OccludedSegment::bs_side, OccludedSegment::ue_side})
            CHECK(occluded_segment_from_string(to_string(s)) == s);
        for (auto k : {HullKind::solid, HullKind::planar, HullKind::linear, HullKind::point})
            CHECK(hull_kind_from_string(to_string(k)) == k);
    }
}
