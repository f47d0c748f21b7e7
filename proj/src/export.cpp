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

#include "isac/export.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace isac
{

using nlohmann::json;

namespace
{

json vec(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3(const json &j)
{
    if (!j.is_array() || j.size() != 3)
        throw ExportError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json optional_number(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

json counts_to_json(const MetricsCounts &c)
{
    return {{"ue_fixes", c.ue_fixes},
            {"submeter", c.submeter},
            {"error_sum_m", c.error_sum},
            {"submeter_rate", optional_number(c.submeter_rate())},
            {"mae_m", optional_number(c.mae())},
            {"ips_total", c.ips_total},
            {"ips_removed", c.ips_removed},
            {"removal_rate", optional_number(c.removal_rate())},
            {"ips_within_2m", c.ips_within_2m},
            {"retained_within_2m", c.retained_within_2m}};
}

MetricsCounts counts_from_json(const json &j)
{
    MetricsCounts c;
    c.ue_fixes = j.at("ue_fixes").get<int>();
    c.submeter = j.at("submeter").get<int>();
    c.error_sum = j.at("error_sum_m").get<double>();
    c.ips_total = j.at("ips_total").get<int>();
    c.ips_removed = j.at("ips_removed").get<int>();
    c.ips_within_2m = j.at("ips_within_2m").get<int>();
    c.retained_within_2m = j.at("retained_within_2m").get<int>();
    return c;
}

MetricsReport metrics_from_json(const json &j)
{
    MetricsReport m;
    m.total = counts_from_json(j.at("total"));
    for (const auto &b : j.at("per_bs"))
        m.per_bs.push_back({b.at("bs_id").get<int>(), counts_from_json(b.at("counts"))});
    return m;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string csv_number(const std::optional<double> &v)
{
    if (!v)
        return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", *v);
    return buf;
}

} // namespace

json hull_to_json(const Hull &h)
{
    json faces = json::array(), halfspaces = json::array(), vertices = json::array();
    for (const auto &v : h.vertices)
        vertices.push_back(vec(v));
    for (const auto &f : h.faces)
        faces.push_back({{"v", f.v}, {"normal", vec(f.normal)}, {"offset", f.offset}});
    for (const auto &s : h.halfspaces)
        halfspaces.push_back({{"normal", vec(s.normal)}, {"offset", s.offset}});
    return {{"label", h.label},
            {"kind", std::string(to_string(h.kind))},
            {"vertices", vertices},
            {"vertex_ids", h.vertex_ids},
            {"faces", faces},
            {"halfspaces", halfspaces}};
}

Hull hull_from_json(const json &j)
{
    Hull h;
    h.label = j.at("label").get<int>();
    h.kind = hull_kind_from_string(j.at("kind").get<std::string>());
    for (const auto &v : j.at("vertices"))
        h.vertices.push_back(vec3(v));
    h.vertex_ids = j.at("vertex_ids").get<std::vector<int>>();
    for (const auto &f : j.at("faces"))
        h.faces.push_back({f.at("v").get<std::array<int, 3>>(), vec3(f.at("normal")), f.at("offset").get<double>()});
    for (const auto &s : j.at("halfspaces"))
        h.halfspaces.push_back({vec3(s.at("normal")), s.at("offset").get<double>()});
    return h;
}

json landmark_map_to_json(const LandmarkMap &map)
{
    json ips = json::array(), initial = json::array(), hulls = json::array(), removed = json::array();
    for (const auto &ip : map.ips)
        ips.push_back({{"position", vec(ip.position)},
                       {"bs_id", ip.bs_id},
                       {"ue_id", ip.ue_id},
                       {"time_step", ip.time_step},
                       {"path_index", ip.path_index},
                       {"alpha", ip.alpha}});
    for (const auto &h : map.initial_hulls)
        initial.push_back(hull_to_json(h));
    for (const auto &h : map.hulls)
        hulls.push_back(hull_to_json(h));
    for (const auto &r : map.removed)
        removed.push_back({{"index", r.index},
                           {"reason", std::string(to_string(r.reason))},
                           {"hull_label", r.hull_label},
                           {"segment", std::string(to_string(r.segment))}});
    return {{"ips", ips},
            {"initial_labels", map.initial_labels},
            {"initial_hulls", initial},
            {"retained", map.retained},
            {"final_labels", map.final_labels},
            {"hulls", hulls},
            {"removed", removed}};
}

LandmarkMap landmark_map_from_json(const json &j)
{
    LandmarkMap map;
    for (const auto &e : j.at("ips"))
    {
        IpEstimate ip;
        ip.position = vec3(e.at("position"));
        ip.bs_id = e.at("bs_id").get<int>();
        ip.ue_id = e.at("ue_id").get<int>();
        ip.time_step = e.at("time_step").get<int>();
        ip.path_index = e.at("path_index").get<int>();
        ip.alpha = e.at("alpha").get<double>();
        map.ips.push_back(ip);
    }
    map.initial_labels = j.at("initial_labels").get<std::vector<int>>();
    for (const auto &h : j.at("initial_hulls"))
        map.initial_hulls.push_back(hull_from_json(h));
    map.retained = j.at("retained").get<std::vector<int>>();
    map.final_labels = j.at("final_labels").get<std::vector<int>>();
    for (const auto &h : j.at("hulls"))
        map.hulls.push_back(hull_from_json(h));
    for (const auto &r : j.at("removed"))
        map.removed.push_back({r.at("index").get<int>(), removal_reason_from_string(r.at("reason").get<std::string>()),
                               r.at("hull_label").get<int>(),
                               occluded_segment_from_string(r.at("segment").get<std::string>())});
    return map;
}

json metrics_to_json(const MetricsReport &m)
{
    json per_bs = json::array();
    for (const auto &b : m.per_bs)
        per_bs.push_back({{"bs_id", b.bs_id}, {"counts", counts_to_json(b.counts)}});
    return {{"empty", m.empty()}, {"total", counts_to_json(m.total)}, {"per_bs", per_bs}};
}

json trial_to_json(const TrialExport &t)
{
    const TrialResult &r = t.result;
    json facades = json::array(), stations = json::array(), snapshots = json::array(), truth = json::array();
    for (const auto &f : t.facades)
        facades.push_back({{"corner", vec(f.corner)},
                           {"edge_u", vec(f.edge_u)},
                           {"edge_v", vec(f.edge_v)},
                           {"normal", vec(f.normal)},
                           {"building", f.building}});
    for (const auto &bs : t.base_stations)
        stations.push_back({{"id", bs.id},
                            {"position", vec(bs.position)},
                            {"orientation", {bs.orientation.roll, bs.orientation.pitch, bs.orientation.yaw}},
                            {"coverage_radius", bs.coverage_radius},
                            {"fov_half_angle", bs.fov_half_angle}});
    for (const auto &s : r.snapshots)
        snapshots.push_back({{"bs_id", s.bs_id},
                             {"ue_id", s.ue_id},
                             {"time_step", s.time_step},
                             {"ue_truth", vec(s.ue_truth)},
                             {"located", s.located},
                             {"ue_estimate", vec(s.ue_estimate)},
                             {"true_paths", s.true_paths},
                             {"estimated_paths", s.estimated_paths},
                             {"model_order", s.model_order},
                             {"ips", s.ips},
                             {"infeasible_ips", s.infeasible_ips},
                             {"error", s.error}});
    for (const auto &it : r.ip_truth)
        truth.push_back({{"true_path", it.true_path}, {"bounce_order", it.bounce_order}, {"true_ip", vec(it.true_ip)}});

    return {{"schema_version", kSchemaVersion},
            {"scenario", t.scenario},
            {"mode", t.oracle ? "oracle" : "full"},
            {"trial", r.trial},
            {"seed", r.seed},
            {"facades", facades},
            {"base_stations", stations},
            {"snapshots", snapshots},
            {"ip_truth", truth},
            {"map", landmark_map_to_json(r.map)},
            {"metrics", metrics_to_json(r.metrics)}};
}

TrialExport trial_from_json(const json &j)
{
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
        throw ExportError("unsupported schema_version " + std::to_string(version));

    TrialExport t;
    t.scenario = j.at("scenario").get<std::string>();
    t.oracle = j.at("mode").get<std::string>() == "oracle";
    for (const auto &f : j.at("facades"))
        t.facades.push_back({vec3(f.at("corner")), vec3(f.at("edge_u")), vec3(f.at("edge_v")), vec3(f.at("normal")),
                             f.at("building").get<int>()});
    for (const auto &b : j.at("base_stations"))
    {
        BsState bs;
        bs.id = b.at("id").get<int>();
        bs.position = vec3(b.at("position"));
        const auto o = b.at("orientation").get<std::vector<double>>();
        bs.orientation = {o.at(0), o.at(1), o.at(2)};
        bs.coverage_radius = b.at("coverage_radius").get<double>();
        bs.fov_half_angle = b.at("fov_half_angle").get<double>();
        t.base_stations.push_back(bs);
    }
    TrialResult &r = t.result;
    r.trial = j.at("trial").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto &s : j.at("snapshots"))
    {
        SnapshotRecord rec;
        rec.bs_id = s.at("bs_id").get<int>();
        rec.ue_id = s.at("ue_id").get<int>();
        rec.time_step = s.at("time_step").get<int>();
        rec.ue_truth = vec3(s.at("ue_truth"));
        rec.located = s.at("located").get<bool>();
        rec.ue_estimate = vec3(s.at("ue_estimate"));
        rec.true_paths = s.at("true_paths").get<int>();
        rec.estimated_paths = s.at("estimated_paths").get<int>();
        rec.model_order = s.at("model_order").get<int>();
        rec.ips = s.at("ips").get<int>();
        rec.infeasible_ips = s.at("infeasible_ips").get<int>();
        rec.error = s.at("error").get<std::string>();
        r.snapshots.push_back(rec);
    }
    for (const auto &it : j.at("ip_truth"))
        r.ip_truth.push_back(
            {it.at("true_path").get<int>(), it.at("bounce_order").get<int>(), vec3(it.at("true_ip"))});
    r.map = landmark_map_from_json(j.at("map"));
    r.metrics = metrics_from_json(j.at("metrics"));
    return t;
}

TrialExport make_trial_export(const TrialResult &trial, const Scene &scene, const RunConfig &config)
{
    return {scene.name, config.oracle, scene.facades, scene.base_stations, trial};
}

std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>> &rows)
{
    std::ostringstream out;
    out << "trial,scope,ue_fixes,submeter_rate,mae_m,ips_total,ips_removed,removal_rate,ips_within_2m,"
           "retained_within_2m\n";
    auto line = [&](const std::string &trial, const std::string &scope, const MetricsCounts &c) {
        out << trial << ',' << scope << ',' << c.ue_fixes << ',' << csv_number(c.submeter_rate()) << ','
            << csv_number(c.mae()) << ',' << c.ips_total << ',' << c.ips_removed << ','
            << csv_number(c.removal_rate()) << ',' << c.ips_within_2m << ',' << c.retained_within_2m << '\n';
    };
    for (const auto &[trial, m] : rows)
    {
        line(trial, "all", m.total);
        for (const auto &b : m.per_bs)
            line(trial, "bs" + std::to_string(b.bs_id), b.counts);
    }
    return out.str();
}

std::string render_svg(const TrialExport &t)
{
    const TrialResult &r = t.result;
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    auto grow = [&](double x, double y) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const auto &f : t.facades)
    {
        grow(f.corner.x(), f.corner.y());
        grow(f.corner.x() + f.edge_u.x(), f.corner.y() + f.edge_u.y());
    }
    for (const auto &bs : t.base_stations)
        grow(bs.position.x(), bs.position.y());
    for (const auto &s : r.snapshots)
        grow(s.ue_truth.x(), s.ue_truth.y());
    if (!(x0 <= x1))
        x0 = y0 = -1.0, x1 = y1 = 1.0;
    x0 -= 10.0, y0 -= 10.0, x1 += 10.0, y1 += 10.0;

    constexpr double scale = 4.0; // px per m
    const auto px = [&](double x) { return fmt((x - x0) * scale); };
    const auto py = [&](double y) { return fmt((y1 - y) * scale); };

    std::vector<char> removed(r.map.ips.size(), 0);
    for (const auto &rm : r.map.removed)
        if (rm.index >= 0 && rm.index < static_cast<int>(removed.size()))
            removed[rm.index] = 1;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt((x1 - x0) * scale) << "\" height=\""
      << fmt((y1 - y0) * scale) << "\">\n";
    s << "<style>.facade{stroke:#444;stroke-width:2}.hull{fill:#4a90d9;fill-opacity:0.25;stroke:#1f5fa8}"
         ".bs{fill:#000}.ue-true{fill:#2a2}.ue-est{fill:none;stroke:#d22}.ip-true{fill:#888}"
         ".ip-kept{fill:#1f5fa8}.ip-removed{fill:#e80}</style>\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto &f : t.facades)
    {
        const Vec3 a = f.corner, b = f.corner + f.edge_u;
        s << "<line class=\"facade\" x1=\"" << px(a.x()) << "\" y1=\"" << py(a.y()) << "\" x2=\"" << px(b.x())
          << "\" y2=\"" << py(b.y()) << "\"/>\n";
    }
    for (const auto &h : r.map.hulls)
    {
        s << "<polygon class=\"hull\" points=\"";
        bool first = true;
        for (const auto &p : top_view_outline(h))
        {
            s << (first ? "" : " ") << px(p.x()) << ',' << py(p.y());
            first = false;
        }
        s << "\"/>\n";
    }
    for (const auto &it : r.ip_truth)
        if (it.true_path >= 0 && it.bounce_order >= 1)
            s << "<circle class=\"ip-true\" cx=\"" << px(it.true_ip.x()) << "\" cy=\"" << py(it.true_ip.y())
              << "\" r=\"1.5\"/>\n";
    for (std::size_t i = 0; i < r.map.ips.size(); ++i)
    {
        const Vec3 &p = r.map.ips[i].position;
        s << "<circle class=\"" << (removed[i] ? "ip-removed" : "ip-kept") << "\" cx=\"" << px(p.x()) << "\" cy=\""
          << py(p.y()) << "\" r=\"2\"/>\n";
    }
    for (const auto &sn : r.snapshots)
    {
        s << "<circle class=\"ue-true\" cx=\"" << px(sn.ue_truth.x()) << "\" cy=\"" << py(sn.ue_truth.y())
          << "\" r=\"2.5\"/>\n";
        if (sn.located)
            s << "<circle class=\"ue-est\" cx=\"" << px(sn.ue_estimate.x()) << "\" cy=\"" << py(sn.ue_estimate.y())
              << "\" r=\"4\"/>\n";
    }
    for (const auto &bs : t.base_stations)
        s << "<rect class=\"bs\" x=\"" << fmt((bs.position.x() - x0) * scale - 5.0) << "\" y=\""
          << fmt((y1 - bs.position.y()) * scale - 5.0) << "\" width=\"10\" height=\"10\"/>\n";
    s << "</svg>\n";
    return s.str();
}

void write_text_file(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ExportError("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out)
        throw ExportError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ExportError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TrialExport read_trial_json(const std::string &path)
{
    try
    {
        return trial_from_json(json::parse(read_text_file(path)));
    }
    catch (const json::exception &e)
    {
        throw ExportError(path + ": " + e.what());
    }
    catch (const ExportError &e)
    {
        throw ExportError(path + ": " + e.what());
    }
}

void export_artifacts(const RunResult &result, const Scene &scene, const RunConfig &config, const std::string &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ExportError("cannot create output directory '" + dir + "': " + ec.message());

    std::vector<std::pair<std::string, MetricsReport>> rows;
    for (const auto &t : result.trials)
    {
        char stem[32];
        std::snprintf(stem, sizeof(stem), "trial_%03d", t.trial);
        const TrialExport e = make_trial_export(t, scene, config);
        const std::filesystem::path base = std::filesystem::path(dir) / stem;
        write_text_file(base.string() + ".json", trial_to_json(e).dump(2) + "\n");
        write_text_file(base.string() + ".svg", render_svg(e));
        rows.emplace_back(std::to_string(t.trial), t.metrics);
    }
    rows.emplace_back("all", result.metrics);
    write_text_file((std::filesystem::path(dir) / "metrics.csv").string(), metrics_csv(rows));
}

} // namespace isac
