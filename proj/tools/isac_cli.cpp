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

// Command line front end: run the Monte-Carlo pipeline, recompute metrics, redraw plots.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isac/export.hpp"
#include "isac/pipeline.hpp"
#include "isac/scenario.hpp"

namespace
{

isac::ScenarioFile preset(const std::string &name)
{
    if (name == "desk")
        return isac::desk_scenario_file();
    if (name == "reference")
        return isac::reference_scenario_file();
    throw isac::ConfigError("unknown preset '" + name + "' (expected desk or reference)");
}

std::string rate(const std::optional<double> &v)
{
    if (!v)
        return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

void print_summary(const isac::MetricsReport &m, std::ostream &os)
{
    const auto &t = m.total;
    os << "UE fixes           " << t.ue_fixes << "\n"
       << "sub-meter rate     " << rate(t.submeter_rate()) << "\n"
       << "MAE [m]            " << rate(t.mae()) << "\n"
       << "IPs total          " << t.ips_total << "\n"
       << "IPs removed        " << t.ips_removed << " (rate " << rate(t.removal_rate()) << ")\n"
       << "IPs within 2 m     " << t.ips_within_2m << " of " << t.ips_total << "\n";
    for (const auto &b : m.per_bs)
        os << "  BS " << b.bs_id << ": fixes " << b.counts.ue_fixes << ", sub-meter "
           << rate(b.counts.submeter_rate()) << ", MAE " << rate(b.counts.mae()) << ", IPs " << b.counts.ips_total
           << ", removed " << b.counts.ips_removed << "\n";
}

std::vector<std::string> trial_files(const std::string &input)
{
    std::vector<std::string> files;
    if (std::filesystem::is_directory(input))
    {
        for (const auto &e : std::filesystem::directory_iterator(input))
        {
            const auto name = e.path().filename().string();
            if (e.path().extension() == ".json" && name.rfind("trial_", 0) == 0)
                files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
    }
    else
        files.push_back(input);
    if (files.empty())
        throw isac::ExportError("no trial_*.json files in '" + input + "'");
    return files;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Radio localization and landmark mapping simulator"};
    app.require_subcommand(1);

    // run
    auto *run = app.add_subcommand("run", "Run the Monte-Carlo pipeline and export artifacts");
    std::string scenario_path, preset_name = "desk", out_dir = "out";
    int trials = 1, threads = 0;
    std::optional<std::uint64_t> seed;
    bool oracle = false, oracle_noise = false, true_ue = false, no_noise = false;
    std::optional<double> eps, snr_offset;
    std::optional<int> min_pts, aug_x, aug_z;
    run->add_option("--scenario", scenario_path, "Scenario YAML file");
    run->add_option("--preset", preset_name, "Built-in scenario when no file is given (desk, reference)");
    run->add_option("--trials", trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "RNG seed (defaults to the scenario seed)");
    run->add_flag("--oracle", oracle, "Feed true path parameters to positioning (skip synthesis and estimation)");
    run->add_flag("--oracle-noise", oracle_noise, "Perturb oracle parameters with measurement noise");
    run->add_flag("--no-noise", no_noise, "Synthesize without receiver noise");
    run->add_flag("--true-ue-occlusion", true_ue, "Use the true UE position in the occlusion test");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--eps", eps, "DBSCAN radius [m]");
    run->add_option("--min-pts", min_pts, "DBSCAN minimum neighbourhood size");
    run->add_option("--aug-x", aug_x, "Horizontal spatial augmentation order");
    run->add_option("--aug-z", aug_z, "Vertical spatial augmentation order");
    run->add_option("--snr-offset-db", snr_offset, "Offset added to the transmit power [dB]");
    run->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

    // metrics
    auto *metrics = app.add_subcommand("metrics", "Recompute metrics from exported trial JSON");
    std::string metrics_in, metrics_out;
    metrics->add_option("input", metrics_in, "Trial JSON file or output directory")->required();
    metrics->add_option("--out", metrics_out, "CSV file (default: stdout)");

    // plot
    auto *plot = app.add_subcommand("plot", "Regenerate the top-view SVG from a trial JSON");
    std::string plot_in, plot_out;
    plot->add_option("input", plot_in, "Trial JSON file")->required();
    plot->add_option("--out", plot_out, "SVG file (default: input with .svg extension)");

    // scenario
    auto *scen = app.add_subcommand("scenario", "Write a built-in scenario as YAML");
    std::string scen_name = "desk", scen_out;
    scen->add_option("preset", scen_name, "desk or reference");
    scen->add_option("--out", scen_out, "YAML file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            isac::RunConfig cfg;
            cfg.scenario = scenario_path.empty() ? preset(preset_name) : isac::load_scenario(scenario_path);
            cfg.trials = trials;
            cfg.seed = seed.value_or(cfg.scenario.scene.seed);
            cfg.oracle = oracle;
            cfg.oracle_noise = oracle_noise;
            cfg.thermal_noise = !no_noise;
            cfg.occlusion_uses_true_ue = true_ue;
            cfg.threads = threads;
            if (eps)
                cfg.scenario.dbscan.eps = *eps;
            if (min_pts)
                cfg.scenario.dbscan.min_pts = *min_pts;
            if (aug_x)
                cfg.scenario.sa.aug_x = *aug_x;
            if (aug_z)
                cfg.scenario.sa.aug_z = *aug_z;
            if (snr_offset)
                cfg.snr_offset_db = *snr_offset;

            const auto t0 = std::chrono::steady_clock::now();
            const isac::RunResult result = isac::run_pipeline(cfg);
            const isac::Scene scene = isac::build_scene(cfg.scenario.scene);
            isac::export_artifacts(result, scene, cfg, out_dir);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            int failed = 0;
            for (const auto &t : result.trials)
                for (const auto &s : t.snapshots)
                    failed += s.error.empty() ? 0 : 1;
            std::cout << "scenario " << scene.name << ", " << cfg.trials << " trial(s), "
                      << (cfg.oracle ? "oracle" : "full") << " mode, " << secs << " s\n";
            if (failed > 0)
                std::cout << failed << " snapshot(s) failed; see the error fields in the trial JSON\n";
            print_summary(result.metrics, std::cout);
            std::cout << "artifacts written to " << out_dir << "\n";
        }
        else if (*metrics)
        {
            std::vector<std::pair<std::string, isac::MetricsReport>> rows;
            isac::MetricsReport merged;
            for (const auto &file : trial_files(metrics_in))
            {
                const isac::TrialExport t = isac::read_trial_json(file);
                const auto fixes = t.result.ue_fixes();
                const auto m = isac::compute_metrics(fixes, t.result.map, t.facades);
                rows.emplace_back(std::to_string(t.result.trial), m);
                merged += m;
            }
            rows.emplace_back("all", merged);
            const std::string csv = isac::metrics_csv(rows);
            if (metrics_out.empty())
                std::cout << csv;
            else
                isac::write_text_file(metrics_out, csv);
        }
        else if (*plot)
        {
            const isac::TrialExport t = isac::read_trial_json(plot_in);
            if (plot_out.empty())
                plot_out = std::filesystem::path(plot_in).replace_extension(".svg").string();
            isac::write_text_file(plot_out, isac::render_svg(t));
        }
        else if (*scen)
        {
            const std::string yaml = isac::dump_scenario(preset(scen_name));
            if (scen_out.empty())
                std::cout << yaml;
            else
                isac::write_text_file(scen_out, yaml);
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
