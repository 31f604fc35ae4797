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

#include <numbers>

#include "bistatic/measurement.hpp"

namespace bistatic {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K, exact
inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

/// Known node location with per-coordinate location-error standard deviation.
struct NodePosition {
    double x = 0.0;
    double y = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
};

struct TargetState {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double rcs_dbsm = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(double ax, double ay, double bx, double by);

/// Two nodes and the direction of transmission between them.
struct BistaticPair {
    NodePosition n1;
    NodePosition n2;
    Mode mode = Mode::Mode1;

    const NodePosition& transmitter() const { return mode == Mode::Mode1 ? n1 : n2; }
    const NodePosition& receiver() const { return mode == Mode::Mode1 ? n2 : n1; }
    double baseline() const;
    BistaticPair with_mode(Mode m) const;
};

struct RadarParams {
    double carrier_hz = 28e9;
    double bandwidth_hz = 100e6;
    double subcarrier_spacing_hz = 120e3;
    double eirp_dbm = 43.0;
    int tx_elements = 8;
    int rx_elements = 16;
    double noise_figure_db = 13.0;
    double sample_rate_hz = 122.88e6;
    double reference_temp_k = 290.0;

    /// 100 MHz <-> 122.88 MHz and 400 MHz <-> 491.52 MHz, 28 GHz carrier.
    static RadarParams preset(int bandwidth_mhz);

    double wavelength() const { return kSpeedOfLight / carrier_hz; }
    /// T_s = T0 * F.
    double system_temperature() const;
    /// k * T_s, W/Hz.
    double noise_density() const;
    void validate() const;
};

// --- forward models -------------------------------------------------------

/// (R1 + R2 - L) / c for the pair's two nodes; never negative.
double true_tdoa(const BistaticPair& pair, const TargetState& target);

/// atan2(x_i - x, y - y_i) in (-pi, pi]; 0 points along +y, +pi/2 along -x.
double true_aoa(const NodePosition& node, const TargetState& target);
double true_aoa(const NodePosition& node, double x, double y);

double bistatic_snr(const RadarParams& params, const BistaticPair& pair,
                    const TargetState& target);

// --- inverse solvers ------------------------------------------------------

/// R2 from TDOA and receiver AoA in the canonical frame where the transmitter
/// lies at AoA = +90 deg as seen from the receiver.
double r2_from_measurements(double tdoa_s, double aoa_rx_rad, double baseline_l);

/// Target position from one bistatic measurement. `meas.mode` must equal
/// `pair.mode`.
Point2 locate_bistatic(const BistaticPair& pair, const Measurement& meas);

/// Point on the iso-range ellipse R1 + R2 = sum_range seen at AoA `theta_rx`
/// from the pair's receiver. Angles within `exclusion_deg` of the
/// transmitter direction or its opposite are refused.
TargetState iso_range_target(const BistaticPair& pair, double sum_range, double theta_rx,
                             double exclusion_deg = 5.0);

/// True when `theta_rx` lies inside the collinearity exclusion band.
bool in_collinear_band(const BistaticPair& pair, double theta_rx, double exclusion_deg);

/// Angle at the target subtended by the two nodes.
double bistatic_angle(const BistaticPair& pair, const TargetState& target);

}  // namespace bistatic
