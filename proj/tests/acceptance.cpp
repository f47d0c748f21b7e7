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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "isac/export.hpp"
#include "isac/pipeline.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace isac;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// estimate_ip against bisection on random feasible geometry.
Outcome geometry_oracle()
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> box(-80.0, 80.0), ang(-kPi, kPi), half(-kPi / 2.0, kPi / 2.0),
        excess(0.05, 120.0);
    double worst_oracle = 0.0, worst_constraint = 0.0;
    int emitted = 0;
    for (int i = 0; i < 1000; ++i)
    {
        BsState bs;
        bs.position = Vec3(box(rng), box(rng), 0.25 * box(rng));
        bs.orientation = {ang(rng), half(rng), ang(rng)};
        const Vec3 ue(box(rng), box(rng), 1.5);
        const Aoa aoa{ang(rng), 0.98 * half(rng)};
        const double r = (ue - bs.position).norm() + excess(rng);

        const IpEstimate ip = estimate_ip(r, aoa, ue, bs);
        ++emitted;
        const Vec3 u = oracle::rotation_from_axes(bs.orientation) *
                       Vec3(std::cos(aoa.az) * std::cos(aoa.el), std::sin(aoa.az) * std::cos(aoa.el), std::sin(aoa.el));
        const Vec3 ref = oracle::bisection_ip(r, u, ue, bs.position);
        worst_oracle = std::max(worst_oracle, (ip.position - ref).norm());

        const double ellipse = (ip.position - ue).norm() + (ip.position - bs.position).norm() - r;
        const double alpha = (ip.position - bs.position).dot(u);
        const double ray = (ip.position - bs.position - alpha * u).norm();
        worst_constraint = std::max({worst_constraint, std::abs(ellipse), ray, alpha > 0.0 ? 0.0 : 1.0});
    }
    return {worst_oracle < 1e-9 && worst_constraint < 1e-6,
            std::to_string(emitted) + " instances, max |closed form - bisection| " + fmt("%.2e", worst_oracle) +
                " m, max constraint residual " + fmt("%.2e", worst_constraint) + " m"};
}

// Oracle-mode identity on one scenario; returns the detail string and success.
Outcome noiseless_identity(const ScenarioFile &scenario)
{
    RunConfig cfg;
    cfg.scenario = scenario;
    cfg.oracle = true;
    cfg.thermal_noise = false;
    cfg.seed = scenario.scene.seed;
    const Scene scene = build_scene(scenario.scene);
    const TrialResult r = run_trial(scene, cfg, 0);

    double worst_ue = 0.0, sum_ue = 0.0;
    int fixes = 0;
    for (const auto &f : r.ue_fixes())
    {
        worst_ue = std::max(worst_ue, (f.estimate - f.truth).norm());
        sum_ue += f.horizontal_error();
        ++fixes;
    }

    // Count single-bounce paths independently by re-tracing every covered snapshot.
    int expected_single = 0;
    for (const auto &ue : sample_trajectories(scene))
        for (const auto &bs : scene.base_stations)
            if (in_coverage(bs, ue.position))
                for (const auto &p : trace_paths(scene, bs, ue, scene.max_bounce, scenario.waveform.wavelength(), 0))
                    expected_single += p.bounce_order == 1;

    int single = 0, single_exact = 0;
    for (std::size_t i = 0; i < r.map.ips.size(); ++i)
        if (r.ip_truth[i].bounce_order == 1)
        {
            ++single;
            single_exact += (r.map.ips[i].position - r.ip_truth[i].true_ip).norm() < 1e-6;
        }
    const double mae = fixes > 0 ? sum_ue / fixes : 1e300;
    const bool ok = fixes > 0 && mae < 1e-6 && worst_ue < 1e-6 && single > 0 && single == expected_single &&
                    single_exact == single;
    return {ok, scenario.scene.name + ": " + std::to_string(fixes) + " fixes, MAE " + fmt("%.2e", mae) +
                    " m, single-bounce IPs exact " + std::to_string(single_exact) + "/" + std::to_string(single) +
                    " (traced " + std::to_string(expected_single) + ")"};
}

Outcome noiseless_end_to_end()
{
    const Outcome desk = noiseless_identity(desk_scenario_file());
    const Outcome ref = noiseless_identity(reference_scenario_file());
    return {desk.pass && ref.pass, desk.detail + "; " + ref.detail};
}

// Estimator recovery over seeded random path triples, then the desk full-mode sub-meter rate.
Outcome estimator_recovery()
{
    const ScenarioFile desk = desk_scenario_file();
    const ArrayConfig array = desk.array();
    const WaveformConfig &w = desk.waveform;
    const double amplitude = oracle::amplitude_for_snr(20.0, w);
    oracle::SeparatedPathOptions opts;
    opts.delay_separation = 2.0 * kSpeedOfLight / w.bandwidth();
    opts.angle_separation = 2.0 * (2.0 / array.n_x);

    int good = 0;
    double worst_delay = 0.0, worst_angle = 0.0;
    for (int seed = 1; seed <= 100; ++seed)
    {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        const auto paths = oracle::separated_paths(opts, amplitude, rng);
        const auto y = synthesize_snapshot(paths, array, w, mix_seed(seed, 1));
        ChanestConfig cc;
        cc.sa = desk.sa;
        cc.cpd.seed = mix_seed(seed, 2);
        const ChannelEstimate ce = estimate_channel(y, array, w, cc);
        const auto m = oracle::match_paths(paths, ce.paths);
        if (m.matched)
        {
            worst_delay = std::max(worst_delay, m.delay_rmse);
            worst_angle = std::max(worst_angle, m.angle_rmse);
        }
        good += m.matched && m.delay_rmse < 0.5 && m.angle_rmse < 0.5 * kPi / 180.0;
    }

    RunConfig cfg;
    cfg.scenario = desk;
    cfg.seed = desk.scene.seed;
    cfg.trials = 20;
    const RunResult run = run_pipeline(cfg);
    const double rate = run.metrics.total.submeter_rate().value_or(0.0);
    const double mae = run.metrics.total.mae().value_or(1e300);

    return {good >= 90 && rate >= 0.9,
            std::to_string(good) + "/100 triples within 0.5 m / 0.5 deg (worst matched RMSE " +
                fmt("%.3f", worst_delay) + " m, " + fmt("%.3f", worst_angle * 180.0 / kPi) +
                " deg); desk full mode, 20 trials: sub-meter rate " + fmt("%.3f", rate) + ", MAE " +
                fmt("%.3f", mae) + " m"};
}

Outcome dbscan_oracle()
{
    std::mt19937_64 rng(404);
    int agree = 0, default_params = 0, clusters = 0, outliers = 0;
    for (int pool = 0; pool < 100; ++pool)
    {
        const int n = std::uniform_int_distribution<int>(1, 500)(rng);
        DbscanParams params;
        if (pool % 2 == 1)
        {
            params.eps = std::uniform_real_distribution<double>(0.5, 6.0)(rng);
            params.min_pts = std::uniform_int_distribution<int>(1, 10)(rng);
        }
        default_params += pool % 2 == 0;

        // Gaussian blobs over a uniform background, roughly the texture of an IP pool.
        std::vector<Vec3> pts;
        std::uniform_real_distribution<double> ux(-40.0, 40.0), uz(0.0, 20.0);
        std::normal_distribution<double> g(0.0, 1.5);
        const int blobs = std::uniform_int_distribution<int>(0, 6)(rng);
        std::vector<Vec3> centres;
        for (int b = 0; b < blobs; ++b)
            centres.emplace_back(ux(rng), ux(rng), uz(rng));
        for (int i = 0; i < n; ++i)
        {
            if (!centres.empty() && i % 3 != 0)
            {
                const Vec3 &c = centres[i % centres.size()];
                pts.emplace_back(c.x() + g(rng), c.y() + g(rng), c.z() + g(rng));
            }
            else
                pts.emplace_back(ux(rng), ux(rng), uz(rng));
        }

        const Clustering c = cluster_points(pts, params);
        const auto ref = oracle::brute_dbscan(pts, params.eps, params.min_pts);
        agree += c.labels == ref || oracle::same_partition(c.labels, ref);
        clusters += c.cluster_count();
        outliers += static_cast<int>(c.outliers.size());
    }
    return {agree == 100, std::to_string(agree) + "/100 pools agree (" + std::to_string(default_params) +
                              " with eps 3 m, min_pts 5); " + std::to_string(clusters) + " clusters, " +
                              std::to_string(outliers) + " outliers in total"};
}

Outcome hull_properties()
{
    std::mt19937_64 rng(505);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int contain = 0, idem = 0, extreme = 0;
    double worst = -1e300;
    for (int set = 0; set < 100; ++set)
    {
        const int n = std::uniform_int_distribution<int>(4, 60)(rng);
        const Vec3 scale(std::uniform_real_distribution<double>(0.5, 30.0)(rng),
                         std::uniform_real_distribution<double>(0.5, 30.0)(rng),
                         std::uniform_real_distribution<double>(0.5, 30.0)(rng));
        const Vec3 shift(50.0 * u(rng), 50.0 * u(rng), 10.0 * u(rng));
        std::vector<Vec3> pts;
        while (static_cast<int>(pts.size()) < n)
        {
            Vec3 p;
            switch (set % 4)
            {
            case 0: // ball
                p = Vec3(u(rng), u(rng), u(rng));
                if (p.norm() > 1.0)
                    continue;
                break;
            case 1: // cube
                p = Vec3(u(rng), u(rng), u(rng));
                break;
            case 2: // sphere surface: every point extreme
                p = Vec3(g(rng), g(rng), g(rng)).normalized();
                break;
            default: // Gaussian cloud
                p = Vec3(g(rng), g(rng), g(rng));
            }
            pts.push_back(shift + p.cwiseProduct(scale));
        }

        const Hull h = convex_hull(pts);
        double set_worst = -1e300;
        for (const auto &p : pts)
            set_worst = std::max(set_worst, h.signed_distance(p));
        worst = std::max(worst, set_worst);
        contain += set_worst <= 1e-9 && h.kind == HullKind::solid;

        const Hull again = convex_hull(h.vertices);
        std::set<std::tuple<double, double, double>> a, b;
        for (const auto &v : h.vertices)
            a.insert({v.x(), v.y(), v.z()});
        for (const auto &v : again.vertices)
            b.insert({v.x(), v.y(), v.z()});
        idem += a == b && again.vertices.size() == h.vertices.size();

        const std::set<int> ids(h.vertex_ids.begin(), h.vertex_ids.end());
        extreme += ids == oracle::brute_extreme_points(pts);
    }
    return {contain == 100 && idem == 100 && extreme == 100,
            "containment " + std::to_string(contain) + "/100 (max signed distance " + fmt("%.2e", worst) +
                " m), idempotence " + std::to_string(idem) + "/100, extreme points " + std::to_string(extreme) +
                "/100"};
}

// Constructed canyon with exact oracle measurements, then the removal fraction of the full
// noisy pipeline on the four-BS reference geometry (and, for information, the desk scene).
Outcome pruning_soundness()
{
    RunConfig cfg;
    cfg.scenario = fixture::canyon_scenario();
    cfg.seed = cfg.scenario.scene.seed;
    cfg.oracle = true;
    cfg.occlusion_uses_true_ue = true;
    const Scene scene = build_scene(cfg.scenario.scene);
    const TrialResult r = run_trial(scene, cfg, 0);
    const LandmarkMap &m = r.map;

    std::map<std::tuple<int, int, int>, Vec3> ue;
    for (const auto &s : r.snapshots)
        ue[{s.bs_id, s.ue_id, s.time_step}] = s.ue_truth;
    std::vector<char> removed(m.ips.size(), 0);
    for (const auto &x : m.removed)
        removed[x.index] = 1;

    int crossing = 0, crossing_removed = 0, crossing_multi = 0, clear = 0, clear_removed = 0;
    for (std::size_t i = 0; i < m.ips.size(); ++i)
    {
        const IpEstimate &ip = m.ips[i];
        const Vec3 ends[2] = {scene.bs(ip.bs_id).position, ue.at({ip.bs_id, ip.ue_id, ip.time_step})};
        bool hit = false;
        if (m.initial_labels[i] >= 0)
            for (const auto &h : m.initial_hulls)
            {
                if (h.label == m.initial_labels[i])
                    continue;
                for (const auto &e : ends)
                    hit = hit || oracle::sample_segment(e, ip.position, h, 10000).hit;
            }
        if (hit)
        {
            ++crossing;
            crossing_removed += removed[i];
            crossing_multi += r.ip_truth[i].bounce_order == 2;
        }
        else if (r.ip_truth[i].bounce_order == 1 && (ip.position - r.ip_truth[i].true_ip).norm() < 1e-6)
        {
            ++clear;
            clear_removed += removed[i];
        }
    }
    const bool part1 = crossing > 0 && crossing_removed == crossing && clear > 0 && clear_removed == 0;

    RunConfig full;
    full.scenario = reference_scenario_file();
    full.seed = full.scenario.scene.seed;
    const RunResult ref = run_pipeline(full);
    const double frac = ref.metrics.total.removal_rate().value_or(-1.0);

    RunConfig desk;
    desk.scenario = desk_scenario_file();
    desk.seed = desk.scenario.scene.seed;
    const RunResult dr = run_pipeline(desk);
    const double desk_frac = dr.metrics.total.removal_rate().value_or(-1.0);

    return {part1 && frac >= 0.2 && frac <= 0.7,
            "canyon: crossing IPs removed " + std::to_string(crossing_removed) + "/" + std::to_string(crossing) +
                " (" + std::to_string(crossing_multi) + " double-bounce), clear single-bounce IPs removed " +
                std::to_string(clear_removed) + "/" + std::to_string(clear) +
                "; reference full mode removal fraction " + fmt("%.3f", frac) + " of " +
                std::to_string(ref.metrics.total.ips_total) + " IPs (desk, informational: " +
                fmt("%.3f", desk_frac) + " of " + std::to_string(dr.metrics.total.ips_total) + ")"};
}

std::map<std::string, std::string> read_dir(const std::filesystem::path &dir)
{
    std::map<std::string, std::string> files;
    for (const auto &e : std::filesystem::directory_iterator(dir))
        files[e.path().filename().string()] = read_text_file(e.path().string());
    return files;
}

Outcome reproducibility()
{
    auto run_into = [](const std::filesystem::path &dir, int threads) {
        RunConfig cfg;
        cfg.scenario = desk_scenario_file();
        cfg.seed = 12345;
        cfg.trials = 2;
        cfg.threads = threads;
        const RunResult r = run_pipeline(cfg);
        export_artifacts(r, build_scene(cfg.scenario.scene), cfg, dir.string());
        return read_dir(dir);
    };
    const auto a = run_into(fixture::scratch_dir("repro_a"), 1);
    const auto b = run_into(fixture::scratch_dir("repro_b"), 2);
    int json = 0, identical = 0;
    for (const auto &[name, text] : a)
    {
        if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
            ++json;
        identical += b.count(name) && b.at(name) == text;
    }
    return {json == 2 && identical == static_cast<int>(a.size()) && a.size() == b.size(),
            std::to_string(identical) + "/" + std::to_string(a.size()) + " exported files byte-identical (" +
                std::to_string(json) + " trial JSON files, 1 vs 2 worker threads)"};
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char *name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "geometry oracle equivalence", 1.0, geometry_oracle},
        {2, "noiseless end-to-end identity", 10.0, noiseless_end_to_end},
        {3, "estimator recovery", 300.0, estimator_recovery},
        {4, "DBSCAN oracle equivalence", 30.0, dbscan_oracle},
        {5, "hull properties", 30.0, hull_properties},
        {6, "pruning soundness", 120.0, pruning_soundness},
        {7, "reproducibility", 1e9, reproducibility},
    };

    int failed = 0;
    for (const auto &c : criteria)
    {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try
        {
            o = c.run();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " ["
                  << fmt("%.2f", secs) << " s" << (in_time ? "" : ", over budget") << "]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
