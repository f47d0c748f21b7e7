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

#include "isac/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace isac
{

namespace
{

double deg_to_rad(double deg) { return deg / 180.0 * kPi; }
double rad_to_deg(double rad) { return rad / kPi * 180.0; }

void check_keys(const YAML::Node &node, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!node.IsMap())
        throw ConfigError(where + ": expected a mapping");
    for (const auto &kv : node)
    {
        const auto key = kv.first.as<std::string>();
        bool ok = false;
        for (const char *a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const YAML::Node &node, const char *key, T &value, const std::string &where)
{
    if (!node[key])
        return;
    try
    {
        value = node[key].as<T>();
    }
    catch (const YAML::Exception &e)
    {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <typename T>
T require(const YAML::Node &node, const char *key, const std::string &where)
{
    if (!node[key])
        throw ConfigError(where + ": missing key '" + key + "'");
    T v{};
    read(node, key, v, where);
    return v;
}

Vec3 read_vec3(const YAML::Node &node, const char *key, const std::string &where)
{
    const auto v = require<std::vector<double>>(node, key, where);
    if (v.size() != 3)
        throw ConfigError(where + "." + key + ": expected 3 values");
    return {v[0], v[1], v[2]};
}

void emit_vec(YAML::Emitter &out, std::initializer_list<double> values)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values)
        out << v;
    out << YAML::EndSeq;
}

} // namespace

ScenarioFile desk_scenario_file()
{
    ScenarioFile f;
    f.scene = desk_scenario_config();
    return f;
}

ScenarioFile reference_scenario_file()
{
    ScenarioFile f;
    f.scene = reference_scenario_config();
    // Same 400 MHz band, but twice the subcarrier density: the longest double-bounce paths of
    // this geometry (about 170 m) stay inside the unambiguous range.
    f.waveform.subcarrier_spacing = 1.5625e6;
    f.waveform.num_subcarriers = 256;
    return f;
}

ScenarioFile parse_scenario(const std::string &yaml_text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(yaml_text);
    }
    catch (const YAML::Exception &e)
    {
        throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
    }
    check_keys(root, "scenario",
               {"name", "seed", "sample_interval", "ue_height", "coverage_radius", "max_bounce", "max_paths",
                "reflection_coefficient", "waveform", "array", "augmentation", "dbscan", "base_stations", "buildings",
                "trajectories"});

    ScenarioFile f;
    ScenarioConfig &s = f.scene;
    read(root, "name", s.name, "scenario");
    read(root, "seed", s.seed, "scenario");
    read(root, "sample_interval", s.sample_interval, "scenario");
    read(root, "ue_height", s.ue_height, "scenario");
    read(root, "coverage_radius", s.coverage_radius, "scenario");
    read(root, "max_bounce", s.max_bounce, "scenario");
    read(root, "max_paths", s.max_paths, "scenario");
    read(root, "reflection_coefficient", s.reflection_coefficient, "scenario");

    if (const auto w = root["waveform"])
    {
        check_keys(w, "waveform",
                   {"carrier_freq_hz", "subcarrier_spacing_hz", "num_subcarriers", "num_symbols", "tx_power_dbm",
                    "noise_psd_dbm_hz", "noise_figure_db"});
        read(w, "carrier_freq_hz", f.waveform.carrier_freq, "waveform");
        read(w, "subcarrier_spacing_hz", f.waveform.subcarrier_spacing, "waveform");
        read(w, "num_subcarriers", f.waveform.num_subcarriers, "waveform");
        read(w, "num_symbols", f.waveform.num_symbols, "waveform");
        read(w, "tx_power_dbm", f.waveform.tx_power_dbm, "waveform");
        read(w, "noise_psd_dbm_hz", f.waveform.noise_psd_dbm_hz, "waveform");
        read(w, "noise_figure_db", f.waveform.noise_figure_db, "waveform");
    }
    if (const auto a = root["array"])
    {
        check_keys(a, "array", {"n_x", "n_z"});
        read(a, "n_x", f.array_n_x, "array");
        read(a, "n_z", f.array_n_z, "array");
    }
    if (const auto a = root["augmentation"])
    {
        check_keys(a, "augmentation", {"aug_x", "aug_z"});
        read(a, "aug_x", f.sa.aug_x, "augmentation");
        read(a, "aug_z", f.sa.aug_z, "augmentation");
    }
    if (const auto d = root["dbscan"])
    {
        check_keys(d, "dbscan", {"eps", "min_pts"});
        read(d, "eps", f.dbscan.eps, "dbscan");
        read(d, "min_pts", f.dbscan.min_pts, "dbscan");
    }

    if (const auto list = root["base_stations"])
    {
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const auto n = list[i];
            const std::string where = "base_stations[" + std::to_string(i) + "]";
            check_keys(n, where, {"id", "position", "orientation_deg", "coverage_radius", "fov_half_angle_deg"});
            BsState bs;
            bs.id = require<int>(n, "id", where);
            bs.position = read_vec3(n, "position", where);
            if (n["orientation_deg"])
            {
                const Vec3 o = read_vec3(n, "orientation_deg", where);
                bs.orientation = {deg_to_rad(o[0]), deg_to_rad(o[1]), deg_to_rad(o[2])};
            }
            bs.coverage_radius = s.coverage_radius;
            read(n, "coverage_radius", bs.coverage_radius, where);
            if (n["fov_half_angle_deg"])
                bs.fov_half_angle = deg_to_rad(require<double>(n, "fov_half_angle_deg", where));
            s.base_stations.push_back(bs);
        }
    }
    if (const auto list = root["buildings"])
    {
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const auto n = list[i];
            const std::string where = "buildings[" + std::to_string(i) + "]";
            check_keys(n, where, {"name", "center", "length", "width", "height"});
            Building b;
            b.name = "B" + std::to_string(i);
            read(n, "name", b.name, where);
            b.center = read_vec3(n, "center", where);
            b.length = require<double>(n, "length", where);
            b.width = require<double>(n, "width", where);
            b.height = require<double>(n, "height", where);
            s.buildings.push_back(b);
        }
    }
    if (const auto list = root["trajectories"])
    {
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const auto n = list[i];
            const std::string where = "trajectories[" + std::to_string(i) + "]";
            check_keys(n, where, {"ue_id", "waypoints"});
            Trajectory t;
            t.ue_id = require<int>(n, "ue_id", where);
            const auto pts = require<std::vector<std::vector<double>>>(n, "waypoints", where);
            for (const auto &p : pts)
            {
                if (p.size() != 2)
                    throw ConfigError(where + ".waypoints: expected [x, y] pairs");
                t.waypoints.emplace_back(p[0], p[1]);
            }
            s.trajectories.push_back(t);
        }
    }
    return f;
}

ScenarioFile load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try
    {
        return parse_scenario(ss.str());
    }
    catch (const ConfigError &e)
    {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string dump_scenario(const ScenarioFile &f)
{
    const ScenarioConfig &s = f.scene;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    out << YAML::Key << "sample_interval" << YAML::Value << s.sample_interval;
    out << YAML::Key << "ue_height" << YAML::Value << s.ue_height;
    out << YAML::Key << "coverage_radius" << YAML::Value << s.coverage_radius;
    out << YAML::Key << "max_bounce" << YAML::Value << s.max_bounce;
    out << YAML::Key << "max_paths" << YAML::Value << s.max_paths;
    out << YAML::Key << "reflection_coefficient" << YAML::Value << s.reflection_coefficient;

    out << YAML::Key << "waveform" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "carrier_freq_hz" << YAML::Value << f.waveform.carrier_freq;
    out << YAML::Key << "subcarrier_spacing_hz" << YAML::Value << f.waveform.subcarrier_spacing;
    out << YAML::Key << "num_subcarriers" << YAML::Value << f.waveform.num_subcarriers;
    out << YAML::Key << "num_symbols" << YAML::Value << f.waveform.num_symbols;
    out << YAML::Key << "tx_power_dbm" << YAML::Value << f.waveform.tx_power_dbm;
    out << YAML::Key << "noise_psd_dbm_hz" << YAML::Value << f.waveform.noise_psd_dbm_hz;
    out << YAML::Key << "noise_figure_db" << YAML::Value << f.waveform.noise_figure_db;
    out << YAML::EndMap;

    out << YAML::Key << "array" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "n_x" << YAML::Value << f.array_n_x << YAML::Key << "n_z" << YAML::Value << f.array_n_z;
    out << YAML::EndMap;
    out << YAML::Key << "augmentation" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "aug_x" << YAML::Value << f.sa.aug_x << YAML::Key << "aug_z" << YAML::Value << f.sa.aug_z;
    out << YAML::EndMap;
    out << YAML::Key << "dbscan" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "eps" << YAML::Value << f.dbscan.eps << YAML::Key << "min_pts" << YAML::Value
        << f.dbscan.min_pts;
    out << YAML::EndMap;

    out << YAML::Key << "base_stations" << YAML::Value << YAML::BeginSeq;
    for (const auto &bs : s.base_stations)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << bs.id;
        out << YAML::Key << "position" << YAML::Value;
        emit_vec(out, {bs.position.x(), bs.position.y(), bs.position.z()});
        out << YAML::Key << "orientation_deg" << YAML::Value;
        emit_vec(out, {rad_to_deg(bs.orientation.roll), rad_to_deg(bs.orientation.pitch),
                       rad_to_deg(bs.orientation.yaw)});
        out << YAML::Key << "coverage_radius" << YAML::Value << bs.coverage_radius;
        out << YAML::Key << "fov_half_angle_deg" << YAML::Value << rad_to_deg(bs.fov_half_angle);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "buildings" << YAML::Value << YAML::BeginSeq;
    for (const auto &b : s.buildings)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << b.name;
        out << YAML::Key << "center" << YAML::Value;
        emit_vec(out, {b.center.x(), b.center.y(), b.center.z()});
        out << YAML::Key << "length" << YAML::Value << b.length;
        out << YAML::Key << "width" << YAML::Value << b.width;
        out << YAML::Key << "height" << YAML::Value << b.height;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "trajectories" << YAML::Value << YAML::BeginSeq;
    for (const auto &t : s.trajectories)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "ue_id" << YAML::Value << t.ue_id;
        out << YAML::Key << "waypoints" << YAML::Value << YAML::BeginSeq;
        for (const auto &p : t.waypoints)
            emit_vec(out, {p.x(), p.y()});
        out << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_scenario(const std::string &path, const ScenarioFile &scenario)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write scenario file '" + path + "'");
    out << dump_scenario(scenario);
    if (!out)
        throw ConfigError("failed writing scenario file '" + path + "'");
}

} // namespace isac
