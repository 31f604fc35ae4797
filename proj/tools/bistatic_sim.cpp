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

// Command-line front end for the bistatic ISAC experiments.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "bistatic/errors.hpp"
#include "bistatic/experiments.hpp"
#include "bistatic/scenario.hpp"

using namespace bistatic;

namespace {

struct Common {
    std::string scenario = "scenario3";
    std::optional<int> bandwidth_mhz;
    std::optional<std::string> engine;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> points;
    std::optional<std::size_t> trials;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario, "Preset name (scenario1|scenario2|scenario3) or config path")
        ->capture_default_str();
    cmd->add_option("--bandwidth-mhz", c.bandwidth_mhz, "100 or 400");
    cmd->add_option("--engine", c.engine, "signal or model");
    cmd->add_option("--seed", c.seed, "RNG seed");
    cmd->add_option("--out", c.out, "CSV output path (stdout when omitted)");
    cmd->add_option("--points", c.points, "Contour points");
    cmd->add_option("--trials", c.trials, "Trials per point");
    cmd->add_option("--threads", c.threads, "Worker threads, 0 = all cores")->capture_default_str();
}

ScenarioConfig resolve(const Common& c) {
    ScenarioConfig cfg = load_scenario(c.scenario);
    if (c.bandwidth_mhz) apply_bandwidth(cfg, *c.bandwidth_mhz);
    if (c.engine) cfg.engine = engine_from_string(*c.engine);
    if (c.seed) cfg.seed = *c.seed;
    if (c.points) cfg.sweep_points = *c.points;
    if (c.trials) cfg.trials_per_point = *c.trials;
    cfg.validate();
    return cfg;
}

// Writes to the --out file, or stdout.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    fn(os);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bistatic ISAC localisation experiments"};
    app.require_subcommand(1);

    Common sweep_opts, multi_opts, doppler_opts, gdop_opts;
    auto* sweep = app.add_subcommand("sweep", "Iso-range contour sweep, one CSV row per point");
    add_common(sweep, sweep_opts);
    auto* multi = app.add_subcommand("multistatic", "One transmitter, receivers on a circle, fused estimate");
    add_common(multi, multi_opts);
    bool noise_weights = false;
    multi->add_flag("--noise-weights", noise_weights,
                    "Scale each residual by its own sigma instead of a = b = 1");
    auto* doppler = app.add_subcommand("doppler", "Pulse-train velocity experiment");
    add_common(doppler, doppler_opts);
    std::string map_out;
    doppler->add_option("--map-out", map_out, "Range-Doppler map CSV path");
    auto* gdop = app.add_subcommand("gdop-map", "GDOP of both modes over a grid");
    add_common(gdop, gdop_opts);
    std::size_t cells = 81;
    gdop->add_option("--cells", cells, "Grid cells per side")->capture_default_str();
    app.add_subcommand("scenarios", "List built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("scenarios")) {
            for (const auto& name : preset_names()) {
                const ScenarioConfig cfg = preset(name);
                std::cout << name << ": L = " << cfg.baseline_l << " m, sum range = " << cfg.sum_range
                          << " m, rcs = " << cfg.rcs_dbsm << " dBsm, carrier = " << cfg.radar.carrier_hz / 1e9
                          << " GHz\n";
            }
        } else if (app.got_subcommand(sweep)) {
            const ScenarioConfig cfg = resolve(sweep_opts);
            const SweepResult res = run_iso_range_sweep(cfg, sweep_opts.threads);
            emit(sweep_opts.out, [&](std::ostream& os) { write_sweep_csv(os, res); });
        } else if (app.got_subcommand(multi)) {
            const ScenarioConfig cfg = resolve(multi_opts);
            const FusionWeights weights =
                noise_weights ? FusionWeights::noise_normalised(effective_error_model(cfg)) : FusionWeights{};
            const MultistaticResult res = run_multistatic(cfg, multi_opts.threads, weights);
            emit(multi_opts.out, [&](std::ostream& os) { write_multistatic_csv(os, res); });
        } else if (app.got_subcommand(doppler)) {
            const ScenarioConfig cfg = resolve(doppler_opts);
            const DopplerRun run = run_doppler(cfg);
            emit(doppler_opts.out, [&](std::ostream& os) { write_doppler_csv(os, run); });
            if (!map_out.empty()) emit(map_out, [&](std::ostream& os) { write_range_doppler_csv(os, run.map); });
        } else if (app.got_subcommand(gdop)) {
            const ScenarioConfig cfg = resolve(gdop_opts);
            const auto grid = run_gdop_map(cfg, default_grid(cfg, cells), gdop_opts.threads);
            emit(gdop_opts.out, [&](std::ostream& os) { write_gdop_csv(os, grid); });
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
