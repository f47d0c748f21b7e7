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

#include "isac/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>
#include <tuple>

namespace isac
{

namespace
{

// Greedy one-to-one association of estimated with true paths, gated at 1 m and 1 degree.
std::vector<int> match_paths(std::span<const EstimatedPath> est, std::span<const TruePath> truth)
{
    constexpr double kRangeGate = 1.0;
    constexpr double kAngleGate = kPi / 180.0;
    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < static_cast<int>(est.size()); ++i)
        for (int j = 0; j < static_cast<int>(truth.size()); ++j)
        {
            const double dr = std::abs(est[i].delay_range - truth[j].delay_range);
            const double da = std::abs(wrap_angle(est[i].aoa.az - truth[j].aoa.az));
            const double de = std::abs(est[i].aoa.el - truth[j].aoa.el);
            if (dr <= kRangeGate && da <= kAngleGate && de <= kAngleGate)
                pairs.emplace_back(dr / kRangeGate + (da + de) / kAngleGate, i, j);
        }
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> match(est.size(), -1);
    std::vector<char> taken(truth.size(), 0);
    for (const auto &[cost, i, j] : pairs)
        if (match[i] < 0 && !taken[j])
        {
            match[i] = j;
            taken[j] = 1;
        }
    return match;
}

} // namespace

void RunConfig::validate() const
{
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    if (threads < 0)
        throw ConfigError("threads must be non-negative");
    scenario.waveform.validate();
    scenario.array().validate();
    if (scenario.sa.aug_x < 0 || scenario.sa.aug_z < 0)
        throw ConfigError("augmentation orders must be non-negative");
    if (scenario.sa.frequency_length(scenario.waveform.num_subcarriers) < 2)
        throw ConfigError("augmentation leaves fewer than 2 frequency samples");
    scenario.dbscan.validate();
    if (!(sigmas.delay_range > 0.0 && sigmas.az > 0.0 && sigmas.el > 0.0))
        throw ConfigError("measurement sigmas must be positive");
    if (cpd.restarts < 1 || cpd.max_iterations < 1)
        throw ConfigError("CPD needs at least one restart and one iteration");
}

std::vector<UeFix> TrialResult::ue_fixes() const
{
    std::vector<UeFix> out;
    for (const auto &s : snapshots)
        if (s.located)
            out.push_back({s.bs_id, s.ue_id, s.time_step, s.ue_estimate, s.ue_truth});
    return out;
}

TrialResult run_trial(const Scene &scene, const RunConfig &config, int trial)
{
    TrialResult out;
    out.trial = trial;
    out.seed = mix_seed(config.seed, static_cast<std::uint64_t>(trial));

    const ArrayConfig array = config.scenario.array();
    const WaveformConfig &waveform = config.scenario.waveform;
    ChanestConfig chanest{config.scenario.sa, config.cpd, config.order_gamma, scene.max_paths};
    const SynthesisOptions synthesis{config.thermal_noise, config.snr_offset_db};

    FusionContext context;
    for (const auto &bs : scene.base_stations)
        context.bs_positions[bs.id] = bs.position;

    std::vector<IpEstimate> pool;
    for (const auto &ue : sample_trajectories(scene))
        for (const auto &bs : scene.base_stations)
        {
            if (!in_coverage(bs, ue.position))
                continue;
            SnapshotRecord rec;
            rec.bs_id = bs.id;
            rec.ue_id = ue.id;
            rec.time_step = ue.time_step;
            rec.ue_truth = ue.position;

            const auto stream = [&](std::uint64_t s) {
                return mix_seed(out.seed, s, static_cast<std::uint64_t>(bs.id), static_cast<std::uint64_t>(ue.id),
                                static_cast<std::uint64_t>(ue.time_step));
            };

            try
            {
                const auto paths = trace_paths(scene, bs, ue, scene.max_bounce, waveform.wavelength(), stream(0));
                rec.true_paths = static_cast<int>(paths.size());

                std::vector<EstimatedPath> est;
                std::vector<int> match;
                if (config.oracle)
                {
                    std::mt19937_64 rng(stream(3));
                    std::normal_distribution<double> normal(0.0, 1.0);
                    for (int i = 0; i < static_cast<int>(paths.size()); ++i)
                    {
                        EstimatedPath e{paths[i].delay_range, paths[i].aoa, paths[i].gain};
                        if (config.oracle_noise)
                        {
                            e.delay_range += config.sigmas.delay_range * normal(rng);
                            e.aoa.az += config.sigmas.az * normal(rng);
                            e.aoa.el += config.sigmas.el * normal(rng);
                        }
                        est.push_back(e);
                        match.push_back(i);
                    }
                }
                else
                {
                    const auto y = synthesize_snapshot(paths, array, waveform, stream(1), synthesis);
                    chanest.cpd.seed = stream(2);
                    const ChannelEstimate ce = estimate_channel(y, array, waveform, chanest);
                    rec.model_order = ce.model_order;
                    est = ce.paths;
                    match = match_paths(est, paths);
                }
                rec.estimated_paths = static_cast<int>(est.size());

                const LosSelection sel = select_los(est);
                const LosMeasurement m{{sel.los.delay_range, sel.los.aoa.az, sel.los.aoa.el},
                                       config.sigmas.covariance()};
                const UePositionEstimate fix = locate_ue(m, bs, scene.ue_height);
                rec.located = true;
                rec.ue_estimate = fix.position();
                context.ue_positions[{bs.id, ue.id, ue.time_step}] =
                    config.occlusion_uses_true_ue ? ue.position : fix.position();

                for (std::size_t k = 0; k < sel.nlos.size(); ++k)
                {
                    const auto &p = sel.nlos[k];
                    try
                    {
                        IpEstimate ip = estimate_ip(p.delay_range, p.aoa, fix.position(), bs);
                        ip.ue_id = ue.id;
                        ip.time_step = ue.time_step;
                        ip.path_index = sel.nlos_indices[k];
                        IpTruth truth;
                        if (const int j = match[ip.path_index]; j >= 0)
                        {
                            truth.true_path = j;
                            truth.bounce_order = paths[j].bounce_order;
                            if (!paths[j].true_ips.empty())
                                truth.true_ip = paths[j].true_ips.front();
                        }
                        pool.push_back(ip);
                        out.ip_truth.push_back(truth);
                        ++rec.ips;
                    }
                    catch (const InfeasiblePathError &)
                    {
                        ++rec.infeasible_ips;
                    }
                }
            }
            catch (const std::exception &e)
            {
                rec.error = e.what();
            }
            out.snapshots.push_back(std::move(rec));
        }

    out.map = build_landmark_map(pool, context, config.scenario.dbscan);
    out.metrics = compute_metrics(out.ue_fixes(), out.map, scene.facades);
    return out;
}

RunResult run_pipeline(const RunConfig &config)
{
    config.validate();
    const Scene scene = build_scene(config.scenario.scene);

    RunResult result;
    result.trials.resize(config.trials);
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int workers = std::min(config.trials, config.threads > 0 ? config.threads : hw);

    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(config.trials);
    auto work = [&] {
        for (int t = next++; t < config.trials; t = next++)
        {
            try
            {
                result.trials[t] = run_trial(scene, config, t);
            }
            catch (...)
            {
                errors[t] = std::current_exception();
            }
        }
    };
    if (workers <= 1)
        work();
    else
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    for (const auto &e : errors)
        if (e)
            std::rethrow_exception(e);

    for (const auto &t : result.trials)
        result.metrics += t.metrics;
    return result;
}

} // namespace isac
