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

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bistatic/estimation.hpp"
#include "bistatic/scenario.hpp"

namespace bistatic {

/// Runs fn(0..count-1) on `threads` workers (0 = hardware concurrency).
/// The first exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// AoA at N2 of contour point k of n, offset half a step from -180 deg.
double sweep_theta_deg(std::size_t k, std::size_t n);

// --- iso-range sweep --------------------------------------------------------

/// Per contour point. Measured values, errors and localisation errors are
/// trial means (errors absolute); rms_* are root-mean-square localisation
/// errors over trials.
struct SweepRecord {
    std::size_t index = 0;
    double theta2_deg = 0.0;
    double x_m = 0.0;
    double y_m = 0.0;
    double tdoa_true_ns = 0.0;
    double tdoa_meas_ns = 0.0;
    double tdoa_err_ns = 0.0;
    double aoa_true_deg = 0.0;
    double aoa_meas_deg = 0.0;
    double aoa_err_deg = 0.0;
    double err_mode1_m = 0.0;
    double err_mode2_m = 0.0;
    double gdop_mode1_m = 0.0;
    double gdop_mode2_m = 0.0;
    std::string status = "ok";

    double rms_mode1_m = 0.0;
    double rms_mode2_m = 0.0;
};

/// Row counts by status, and per-column means over the non-excluded rows
/// where that column is finite, summed in point order. Status is "ok",
/// "excluded", a failure reason when both modes failed, or the reason
/// prefixed with "mode1_"/"mode2_" when only that mode failed.
struct SweepSummary {
    std::size_t valid_points = 0;
    std::size_t excluded_points = 0;
    std::size_t failed_points = 0;
    double mean_abs_tdoa_err_ns = 0.0;
    double mean_abs_aoa_err_deg = 0.0;
    double mean_err_mode1_m = 0.0;
    double mean_err_mode2_m = 0.0;
    double mean_gdop_mode1_m = 0.0;
    double mean_gdop_mode2_m = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    SweepSummary summary;
};

SweepSummary summarize(const std::vector<SweepRecord>& records);
SweepResult run_iso_range_sweep(const ScenarioConfig& cfg, unsigned threads = 0);
void write_sweep_csv(std::ostream& os, const SweepResult& result);

// --- multistatic ------------------------------------------------------------

struct MultistaticRecord {
    std::size_t index = 0;
    double theta2_deg = 0.0;
    double x_m = 0.0;
    double y_m = 0.0;
    double fused_err_m = 0.0;       // GDOP-weighted fusion, trial mean
    double unweighted_err_m = 0.0;  // w = 1 fusion, trial mean
    std::size_t best_pair = 0;      // lowest predicted GDOP at the target
    double best_pair_err_m = 0.0;
    std::vector<double> pair_err_m;
    double fused_win_fraction = 0.0;  // trials with fused <= best pair
    std::size_t trials = 0;
    std::string status = "ok";
};

struct MultistaticSummary {
    std::size_t valid_points = 0;
    std::size_t excluded_points = 0;
    std::size_t failed_points = 0;
    double mean_fused_err_m = 0.0;
    double mean_unweighted_err_m = 0.0;
    double mean_best_pair_err_m = 0.0;
    double fused_win_fraction = 0.0;  // over all valid trials
};

struct MultistaticResult {
    std::vector<NodePosition> nodes;  // nodes[0] transmits
    std::vector<MultistaticRecord> records;
    MultistaticSummary summary;
};

/// Per-pair a_i and b_i used for every pair of the multistatic loss.
struct FusionWeights {
    double a = 1.0;  // 1/m
    double b = 1.0;
    /// a = 1/(c sigma_tdoa), b = 2 pi / sigma_aoa: each residual in units of
    /// its own standard deviation.
    static FusionWeights noise_normalised(const MeasurementErrorModel& err);
};

/// nodes[0] plus the configured receivers, or three receivers spaced 120 deg
/// on the circle of radius L through nodes[1] when fewer are configured.
std::vector<NodePosition> multistatic_nodes(const ScenarioConfig& cfg);
MultistaticResult run_multistatic(const ScenarioConfig& cfg, unsigned threads = 0,
                                  const FusionWeights& weights = {});
void write_multistatic_csv(std::ostream& os, const MultistaticResult& result);

// --- Doppler ----------------------------------------------------------------

struct DopplerRun {
    TargetState target;
    double bistatic_angle_rad = 0.0;
    double doppler_true_hz = 0.0;
    double doppler_est_hz = 0.0;
    double range_rate_true = 0.0;  // m/s
    double range_rate_est = 0.0;
    double speed_true = 0.0;  // along the configured direction
    double speed_est = 0.0;
    double speed_err = 0.0;
    double aoa_est_deg = 0.0;
    RangeDopplerMap map;
};

/// Always signal level; the motion section sets speed, direction, AoA and
/// pulse count.
DopplerRun run_doppler(const ScenarioConfig& cfg);
void write_doppler_csv(std::ostream& os, const DopplerRun& run);

// --- GDOP map ---------------------------------------------------------------

struct GridSpec {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t nx = 2;
    double y_min = 0.0;
    double y_max = 0.0;
    std::size_t ny = 2;

    double x(std::size_t i) const;
    double y(std::size_t j) const;
    void validate() const;
};

/// Square of half-width sum_range around the baseline midpoint.
GridSpec default_grid(const ScenarioConfig& cfg, std::size_t cells_per_side = 81);

struct GdopCell {
    double x_m = 0.0;
    double y_m = 0.0;
    double gdop_mode1_m = 0.0;
    double gdop_mode2_m = 0.0;
    int best_mode = 0;  // 1, 2, or 0 when both are degenerate
    std::string status = "ok";
};

/// Cells ordered with x varying fastest.
std::vector<GdopCell> run_gdop_map(const ScenarioConfig& cfg, const GridSpec& grid, unsigned threads = 0);
void write_gdop_csv(std::ostream& os, const std::vector<GdopCell>& cells);

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_number(double v);

}  // namespace bistatic
