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

#include "bistatic/geometry.hpp"

#include <cmath>
#include <string>

#include "bistatic/errors.hpp"

namespace bistatic {
namespace {

// Below this a target is considered to sit on a node.
constexpr double kMinRange = 1e-9;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " is not finite");
}

}  // namespace

double wrap_angle(double rad) {
    double w = std::remainder(rad, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

double distance(double ax, double ay, double bx, double by) {
    return std::hypot(ax - bx, ay - by);
}

double BistaticPair::baseline() const { return distance(n1.x, n1.y, n2.x, n2.y); }

BistaticPair BistaticPair::with_mode(Mode m) const {
    BistaticPair p = *this;
    p.mode = m;
    return p;
}

RadarParams RadarParams::preset(int bandwidth_mhz) {
    RadarParams p;
    switch (bandwidth_mhz) {
        case 100:
            p.bandwidth_hz = 100e6;
            p.sample_rate_hz = 122.88e6;
            break;
        case 400:
            p.bandwidth_hz = 400e6;
            p.sample_rate_hz = 491.52e6;
            break;
        default:
            throw ConfigError("unsupported bandwidth " + std::to_string(bandwidth_mhz) +
                              " MHz (expected 100 or 400)");
    }
    return p;
}

double RadarParams::system_temperature() const {
    return reference_temp_k * std::pow(10.0, noise_figure_db / 10.0);
}

double RadarParams::noise_density() const { return kBoltzmann * system_temperature(); }

void RadarParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(carrier_hz, "carrier_hz");
    positive(bandwidth_hz, "bandwidth_hz");
    positive(subcarrier_spacing_hz, "subcarrier_spacing_hz");
    positive(sample_rate_hz, "sample_rate_hz");
    positive(reference_temp_k, "reference_temp_k");
    positive(noise_figure_db, "noise_figure_db");
    if (!std::isfinite(eirp_dbm)) throw ConfigError("eirp_dbm must be finite");
    if (tx_elements < 1 || rx_elements < 1) throw ConfigError("element counts must be >= 1");
    if (sample_rate_hz < bandwidth_hz) throw ConfigError("sample_rate_hz must be >= bandwidth_hz");
}

double true_tdoa(const BistaticPair& pair, const TargetState& target) {
    require_finite(target.x, "target x");
    require_finite(target.y, "target y");
    const double r1 = distance(target.x, target.y, pair.n1.x, pair.n1.y);
    const double r2 = distance(target.x, target.y, pair.n2.x, pair.n2.y);
    if (r1 < kMinRange || r2 < kMinRange) throw DomainError("target coincides with a node");
    const double l = pair.baseline();
    return std::max(0.0, (r1 + r2 - l) / kSpeedOfLight);
}

double true_aoa(const NodePosition& node, double x, double y) {
    const double dx = node.x - x;
    const double dy = y - node.y;
    if (std::hypot(dx, dy) < kMinRange) throw DomainError("target coincides with the node");
    double a = std::atan2(dx, dy);
    if (a <= -kPi) a = kPi;
    return a;
}

double true_aoa(const NodePosition& node, const TargetState& target) {
    return true_aoa(node, target.x, target.y);
}

double bistatic_snr(const RadarParams& params, const BistaticPair& pair,
                    const TargetState& target) {
    const double r1 = distance(target.x, target.y, pair.n1.x, pair.n1.y);
    const double r2 = distance(target.x, target.y, pair.n2.x, pair.n2.y);
    if (r1 < kMinRange || r2 < kMinRange) throw DomainError("target coincides with a node");

    const double eirp_w = std::pow(10.0, (params.eirp_dbm - 30.0) / 10.0);
    const double g_rx = static_cast<double>(params.rx_elements);
    const double lambda = params.wavelength();
    const double rcs = std::pow(10.0, target.rcs_dbsm / 10.0);
    const double four_pi_cubed = std::pow(4.0 * kPi, 3);
    const double rr = r1 * r2;

    const double snr = eirp_w * g_rx * lambda * lambda * rcs /
                       (four_pi_cubed * rr * rr * params.noise_density() * params.bandwidth_hz);
    return 10.0 * std::log10(snr);
}

double r2_from_measurements(double tdoa_s, double aoa_rx_rad, double baseline_l) {
    if (!(tdoa_s >= 0.0)) throw DomainError("negative TDOA");
    if (!(baseline_l > 0.0)) throw DomainError("non-positive baseline");
    const double ct = kSpeedOfLight * tdoa_s;
    const double numerator = ct * ct + 2.0 * ct * baseline_l;
    const double denominator = 2.0 * ((ct + baseline_l) - baseline_l * std::sin(aoa_rx_rad));
    if (numerator == 0.0) return 0.0;
    if (!(denominator > 0.0)) throw DomainError("non-positive range denominator (collinear geometry)");
    return numerator / denominator;
}

namespace {

// AoA measured at the receiver rotated into the frame where the transmitter
// sits at +90 deg.
double canonical_aoa(const BistaticPair& pair, double theta_rx) {
    const NodePosition& rx = pair.receiver();
    const NodePosition& tx = pair.transmitter();
    const double theta_tx = true_aoa(rx, tx.x, tx.y);
    return theta_rx - theta_tx + kPi / 2.0;
}

}  // namespace

Point2 locate_bistatic(const BistaticPair& pair, const Measurement& meas) {
    if (meas.mode != pair.mode) throw std::invalid_argument("measurement mode differs from pair mode");
    const double l = pair.baseline();
    if (!(l > 0.0)) throw DomainError("zero baseline");
    const double r2 = r2_from_measurements(meas.tdoa_s, canonical_aoa(pair, meas.aoa_rad), l);
    const NodePosition& rx = pair.receiver();
    return {rx.x - r2 * std::sin(meas.aoa_rad), rx.y + r2 * std::cos(meas.aoa_rad)};
}

bool in_collinear_band(const BistaticPair& pair, double theta_rx, double exclusion_deg) {
    const NodePosition& rx = pair.receiver();
    const NodePosition& tx = pair.transmitter();
    const double theta_tx = true_aoa(rx, tx.x, tx.y);
    const double band = deg_to_rad(exclusion_deg) + 1e-12;
    const double toward = std::abs(wrap_angle(theta_rx - theta_tx));
    const double away = std::abs(wrap_angle(theta_rx - theta_tx - kPi));
    return toward <= band || away <= band;
}

TargetState iso_range_target(const BistaticPair& pair, double sum_range, double theta_rx,
                             double exclusion_deg) {
    const double l = pair.baseline();
    if (!(l > 0.0)) throw DomainError("zero baseline");
    if (!(sum_range > l)) throw DomainError("sum range must exceed the baseline");
    if (in_collinear_band(pair, theta_rx, exclusion_deg))
        throw ExcludedGeometryError("receiver AoA inside the collinearity exclusion band");

    const double theta = wrap_angle(theta_rx);
    const double s = sum_range;
    const double r = (s * s - l * l) / (2.0 * (s - l * std::sin(canonical_aoa(pair, theta))));
    const NodePosition& rx = pair.receiver();
    TargetState t;
    t.x = rx.x - r * std::sin(theta);
    t.y = rx.y + r * std::cos(theta);
    return t;
}

double bistatic_angle(const BistaticPair& pair, const TargetState& target) {
    const double ax = pair.n1.x - target.x, ay = pair.n1.y - target.y;
    const double bx = pair.n2.x - target.x, by = pair.n2.y - target.y;
    const double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
    if (na < kMinRange || nb < kMinRange) throw DomainError("target coincides with a node");
    const double c = std::clamp((ax * bx + ay * by) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

double MeasurementErrorModel::sigma_from_mean_abs(double mean_abs) {
    return mean_abs * std::sqrt(kPi / 2.0);
}

MeasurementErrorModel MeasurementErrorModel::from_mean_abs(double mean_abs_tdoa_s,
                                                           double mean_abs_aoa_rad) {
    return {sigma_from_mean_abs(mean_abs_tdoa_s), sigma_from_mean_abs(mean_abs_aoa_rad)};
}

void MeasurementErrorModel::validate() const {
    if (!(sigma_tdoa >= 0.0) || !(sigma_aoa >= 0.0))
        throw ConfigError("measurement error sigmas must be >= 0");
}

}  // namespace bistatic
