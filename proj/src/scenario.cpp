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

#include "bistatic/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bistatic/errors.hpp"

namespace bistatic {

namespace {

constexpr double kDefaultNodeSigma = 0.01;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, int line) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
        throw ConfigError("expected a number, got '" + s + "'", line);
    return v;
}

std::uint64_t parse_u64(const std::string& text, int line) {
    const std::string s = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("expected a non-negative integer, got '" + s + "'", line);
    return v;
}

int parse_int(const std::string& text, int line) {
    const std::uint64_t v = parse_u64(text, line);
    if (v > 1'000'000) throw ConfigError("integer out of range", line);
    return static_cast<int>(v);
}

bool parse_bool(const std::string& text, int line) {
    const std::string s = trim(text);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("expected true or false, got '" + s + "'", line);
}

NodePosition parse_node(const std::string& text, int line) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_double(item, line));
    if (v.size() != 2 && v.size() != 4)
        throw ConfigError("node needs 'x, y' or 'x, y, sigma_x, sigma_y'", line);
    NodePosition n;
    n.x = v[0];
    n.y = v[1];
    n.sigma_x = v.size() == 4 ? v[2] : 0.0;
    n.sigma_y = v.size() == 4 ? v[3] : 0.0;
    return n;
}

MotionDirection direction_from_string(const std::string& s, int line) {
    if (s == "radial_inward") return MotionDirection::RadialInward;
    if (s == "radial_outward") return MotionDirection::RadialOutward;
    throw ConfigError("unknown motion direction '" + s + "'", line);
}

std::string to_string(MotionDirection d) {
    return d == MotionDirection::RadialInward ? "radial_inward" : "radial_outward";
}

ScenarioConfig make_preset(const std::string& id, double l, double rcs) {
    ScenarioConfig c;
    c.scenario_id = id;
    c.baseline_l = l;
    c.sum_range = 2.0 * l;
    c.rcs_dbsm = rcs;
    c.nodes = {NodePosition{0.0, 0.0, kDefaultNodeSigma, kDefaultNodeSigma},
               NodePosition{l, 0.0, kDefaultNodeSigma, kDefaultNodeSigma}};
    c.radar = RadarParams::preset(100);
    c.motion = MotionConfig{};
    return c;
}

}  // namespace

std::string to_string(Engine e) { return e == Engine::SignalLevel ? "signal_level" : "model_based"; }

Engine engine_from_string(const std::string& s) {
    if (s == "signal_level" || s == "signal") return Engine::SignalLevel;
    if (s == "model_based" || s == "model") return Engine::ModelBased;
    throw ConfigError("unknown engine '" + s + "'");
}

BistaticPair ScenarioConfig::pair(Mode mode) const {
    if (nodes.size() < 2) throw ConfigError("scenario needs at least two nodes");
    return BistaticPair{nodes[0], nodes[1], mode};
}

void ScenarioConfig::validate() const {
    if (nodes.size() < 2) throw ConfigError("scenario needs at least two nodes");
    for (const auto& n : nodes) {
        if (!std::isfinite(n.x) || !std::isfinite(n.y)) throw ConfigError("node coordinates must be finite");
        if (!(n.sigma_x >= 0.0) || !(n.sigma_y >= 0.0)) throw ConfigError("node sigmas must be >= 0");
    }
    if (!(baseline_l > 0.0)) throw ConfigError("baseline_l must be positive");
    const double d = distance(nodes[0].x, nodes[0].y, nodes[1].x, nodes[1].y);
    if (std::abs(d - baseline_l) > 1e-9 * std::max(1.0, baseline_l))
        throw ConfigError("baseline_l does not match the distance between n1 and n2");
    if (!(sum_range > baseline_l)) throw ConfigError("sum_range must exceed baseline_l");
    if (!std::isfinite(rcs_dbsm)) throw ConfigError("rcs_dbsm must be finite");
    radar.validate();
    if (error_override) error_override->validate();
    if (sweep_points < 4) throw ConfigError("sweep points must be >= 4");
    if (trials_per_point < 1) throw ConfigError("trials must be >= 1");
    if (!(exclusion_deg >= 0.0) || exclusion_deg >= 90.0) throw ConfigError("exclusion_deg must be in [0, 90)");
    if (motion) {
        if (!(motion->speed_mps >= 0.0)) throw ConfigError("motion speed must be >= 0");
        if (motion->pulses < 2) throw ConfigError("motion pulses must be >= 2");
    }
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
    auto node_eq = [](const NodePosition& a, const NodePosition& b) {
        return a.x == b.x && a.y == b.y && a.sigma_x == b.sigma_x && a.sigma_y == b.sigma_y;
    };
    auto radar_eq = [](const RadarParams& a, const RadarParams& b) {
        return a.carrier_hz == b.carrier_hz && a.bandwidth_hz == b.bandwidth_hz &&
               a.subcarrier_spacing_hz == b.subcarrier_spacing_hz && a.eirp_dbm == b.eirp_dbm &&
               a.tx_elements == b.tx_elements && a.rx_elements == b.rx_elements &&
               a.noise_figure_db == b.noise_figure_db && a.sample_rate_hz == b.sample_rate_hz &&
               a.reference_temp_k == b.reference_temp_k;
    };
    if (nodes.size() != o.nodes.size()) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!node_eq(nodes[i], o.nodes[i])) return false;
    const bool err_eq = error_override.has_value() == o.error_override.has_value() &&
                        (!error_override || (error_override->sigma_tdoa == o.error_override->sigma_tdoa &&
                                             error_override->sigma_aoa == o.error_override->sigma_aoa));
    return scenario_id == o.scenario_id && baseline_l == o.baseline_l && sum_range == o.sum_range &&
           rcs_dbsm == o.rcs_dbsm && radar_eq(radar, o.radar) && err_eq &&
           sweep_points == o.sweep_points && trials_per_point == o.trials_per_point &&
           exclusion_deg == o.exclusion_deg && model_quantize == o.model_quantize && seed == o.seed &&
           engine == o.engine && motion == o.motion;
}

std::vector<std::string> preset_names() { return {"scenario1", "scenario2", "scenario3"}; }

bool is_preset(const std::string& name) {
    for (const auto& p : preset_names())
        if (p == name) return true;
    return false;
}

ScenarioConfig preset(const std::string& name) {
    if (name == "scenario1") return make_preset(name, 3.0, -20.0);
    if (name == "scenario2") return make_preset(name, 15.0, 0.0);
    if (name == "scenario3") return make_preset(name, 25.0, 0.0);
    throw ConfigError("unknown preset '" + name + "'");
}

ScenarioConfig load_scenario(const std::string& preset_or_path) {
    if (is_preset(preset_or_path)) return preset(preset_or_path);
    std::ifstream in(preset_or_path);
    if (!in) throw ConfigError("cannot open scenario file '" + preset_or_path + "'");
    return parse_scenario(in);
}

ScenarioConfig parse_scenario(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

ScenarioConfig parse_scenario(std::istream& in) {
    ScenarioConfig cfg;
    cfg.radar = RadarParams::preset(100);
    std::string section;
    std::set<std::string> seen;
    std::map<std::string, NodePosition> nodes;
    std::optional<double> sigma_tdoa;
    std::optional<double> sigma_aoa;
    std::optional<MotionConfig> motion;
    std::string raw;
    int line = 0;

    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError("malformed section header", line);
            section = trim(text.substr(1, text.size() - 2));
            if (section != "nodes" && section != "radar" && section != "sweep" && section != "motion")
                throw ConfigError("unknown section [" + section + "]", line);
            if (section == "motion" && !motion) motion = MotionConfig{};
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line);
        if (!seen.insert(section + "." + key).second) throw ConfigError("duplicate key '" + key + "'", line);

        if (section.empty()) {
            if (key == "scenario_id") {
                if (value.empty()) throw ConfigError("scenario_id must not be empty", line);
                cfg.scenario_id = value;
            } else if (key == "baseline_l") cfg.baseline_l = parse_double(value, line);
            else if (key == "sum_range") cfg.sum_range = parse_double(value, line);
            else if (key == "rcs_dbsm") cfg.rcs_dbsm = parse_double(value, line);
            else if (key == "seed") cfg.seed = parse_u64(value, line);
            else if (key == "engine") {
                try {
                    cfg.engine = engine_from_string(value);
                } catch (const ConfigError& e) {
                    throw ConfigError(e.what(), line);
                }
            } else throw ConfigError("unknown key '" + key + "'", line);
        } else if (section == "nodes") {
            if (key.size() < 2 || key[0] != 'n') throw ConfigError("node keys are n1, n2, ...", line);
            const int idx = parse_int(key.substr(1), line);
            if (idx < 1) throw ConfigError("node keys are n1, n2, ...", line);
            nodes[key] = parse_node(value, line);
        } else if (section == "radar") {
            RadarParams& r = cfg.radar;
            if (key == "carrier_hz") r.carrier_hz = parse_double(value, line);
            else if (key == "bandwidth_hz") r.bandwidth_hz = parse_double(value, line);
            else if (key == "subcarrier_spacing_hz") r.subcarrier_spacing_hz = parse_double(value, line);
            else if (key == "eirp_dbm") r.eirp_dbm = parse_double(value, line);
            else if (key == "tx_elements") r.tx_elements = parse_int(value, line);
            else if (key == "rx_elements") r.rx_elements = parse_int(value, line);
            else if (key == "noise_figure_db") r.noise_figure_db = parse_double(value, line);
            else if (key == "sample_rate_hz") r.sample_rate_hz = parse_double(value, line);
            else if (key == "reference_temp_k") r.reference_temp_k = parse_double(value, line);
            else throw ConfigError("unknown key '" + key + "' in [radar]", line);
        } else if (section == "sweep") {
            if (key == "points") cfg.sweep_points = parse_u64(value, line);
            else if (key == "trials") cfg.trials_per_point = parse_u64(value, line);
            else if (key == "exclusion_deg") cfg.exclusion_deg = parse_double(value, line);
            else if (key == "model_quantize") cfg.model_quantize = parse_bool(value, line);
            else if (key == "sigma_tdoa_s") sigma_tdoa = parse_double(value, line);
            else if (key == "sigma_aoa_rad") sigma_aoa = parse_double(value, line);
            else throw ConfigError("unknown key '" + key + "' in [sweep]", line);
        } else {
            if (key == "speed_mps") motion->speed_mps = parse_double(value, line);
            else if (key == "direction") motion->direction = direction_from_string(value, line);
            else if (key == "theta2_deg") motion->theta2_deg = parse_double(value, line);
            else if (key == "pulses") motion->pulses = parse_u64(value, line);
            else throw ConfigError("unknown key '" + key + "' in [motion]", line);
        }
    }

    if (sigma_tdoa.has_value() != sigma_aoa.has_value())
        throw ConfigError("sigma_tdoa_s and sigma_aoa_rad must be given together");
    if (sigma_tdoa) cfg.error_override = MeasurementErrorModel{*sigma_tdoa, *sigma_aoa};
    cfg.motion = motion;

    if (nodes.empty()) {
        cfg.nodes = {NodePosition{0.0, 0.0, kDefaultNodeSigma, kDefaultNodeSigma},
                     NodePosition{cfg.baseline_l, 0.0, kDefaultNodeSigma, kDefaultNodeSigma}};
    } else {
        for (std::size_t i = 1; i <= nodes.size(); ++i) {
            const auto it = nodes.find("n" + std::to_string(i));
            if (it == nodes.end()) throw ConfigError("node keys must be n1..nK without gaps");
            cfg.nodes.push_back(it->second);
        }
    }
    cfg.validate();
    return cfg;
}

void serialize_scenario(std::ostream& os, const ScenarioConfig& cfg) {
    os << "scenario_id = " << cfg.scenario_id << '\n';
    os << "baseline_l = " << fmt_double(cfg.baseline_l) << '\n';
    os << "sum_range = " << fmt_double(cfg.sum_range) << '\n';
    os << "rcs_dbsm = " << fmt_double(cfg.rcs_dbsm) << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "engine = " << to_string(cfg.engine) << '\n';
    os << "\n[nodes]\n";
    for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
        const auto& n = cfg.nodes[i];
        os << 'n' << i + 1 << " = " << fmt_double(n.x) << ", " << fmt_double(n.y) << ", "
           << fmt_double(n.sigma_x) << ", " << fmt_double(n.sigma_y) << '\n';
    }
    const RadarParams& r = cfg.radar;
    os << "\n[radar]\n";
    os << "carrier_hz = " << fmt_double(r.carrier_hz) << '\n';
    os << "bandwidth_hz = " << fmt_double(r.bandwidth_hz) << '\n';
    os << "subcarrier_spacing_hz = " << fmt_double(r.subcarrier_spacing_hz) << '\n';
    os << "eirp_dbm = " << fmt_double(r.eirp_dbm) << '\n';
    os << "tx_elements = " << r.tx_elements << '\n';
    os << "rx_elements = " << r.rx_elements << '\n';
    os << "noise_figure_db = " << fmt_double(r.noise_figure_db) << '\n';
    os << "sample_rate_hz = " << fmt_double(r.sample_rate_hz) << '\n';
    os << "reference_temp_k = " << fmt_double(r.reference_temp_k) << '\n';
    os << "\n[sweep]\n";
    os << "points = " << cfg.sweep_points << '\n';
    os << "trials = " << cfg.trials_per_point << '\n';
    os << "exclusion_deg = " << fmt_double(cfg.exclusion_deg) << '\n';
    os << "model_quantize = " << (cfg.model_quantize ? "true" : "false") << '\n';
    if (cfg.error_override) {
        os << "sigma_tdoa_s = " << fmt_double(cfg.error_override->sigma_tdoa) << '\n';
        os << "sigma_aoa_rad = " << fmt_double(cfg.error_override->sigma_aoa) << '\n';
    }
    if (cfg.motion) {
        os << "\n[motion]\n";
        os << "speed_mps = " << fmt_double(cfg.motion->speed_mps) << '\n';
        os << "direction = " << to_string(cfg.motion->direction) << '\n';
        os << "theta2_deg = " << fmt_double(cfg.motion->theta2_deg) << '\n';
        os << "pulses = " << cfg.motion->pulses << '\n';
    }
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
    std::ostringstream os;
    serialize_scenario(os, cfg);
    return os.str();
}

void apply_bandwidth(ScenarioConfig& cfg, int bandwidth_mhz) {
    const double carrier = cfg.radar.carrier_hz;
    cfg.radar = RadarParams::preset(bandwidth_mhz);
    cfg.radar.carrier_hz = carrier;
}

MeasurementErrorModel tabulated_error_model(const std::string& scenario_id, int bandwidth_mhz) {
    struct Row {
        double tdoa_ns_100, tdoa_ns_400, aoa_deg_100, aoa_deg_400;
    };
    static const std::map<std::string, Row> table{
        {"scenario1", {4.2, 0.17, 0.0, 0.0}},
        {"scenario2", {1.21, 1.21, 0.03, 0.03}},
        {"scenario3", {3.55, 0.02, 0.16, 0.23}},
    };
    const auto it = table.find(scenario_id);
    if (it == table.end()) throw ConfigError("no tabulated error levels for '" + scenario_id + "'");
    if (bandwidth_mhz != 100 && bandwidth_mhz != 400)
        throw ConfigError("tabulated error levels exist for 100 and 400 MHz only");
    const Row& r = it->second;
    const bool wide = bandwidth_mhz == 400;
    return MeasurementErrorModel::from_mean_abs((wide ? r.tdoa_ns_400 : r.tdoa_ns_100) * 1e-9,
                                                deg_to_rad(wide ? r.aoa_deg_400 : r.aoa_deg_100));
}

MeasurementErrorModel effective_error_model(const ScenarioConfig& cfg) {
    if (cfg.error_override) return *cfg.error_override;
    const double bw = cfg.radar.bandwidth_hz;
    int mhz = 0;
    if (bw == 100e6) mhz = 100;
    else if (bw == 400e6) mhz = 400;
    else throw ConfigError("no tabulated error levels for this bandwidth; set sigma_tdoa_s and sigma_aoa_rad");
    return tabulated_error_model(cfg.scenario_id, mhz);
}

}  // namespace bistatic
