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

#include "bistatic/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bistatic/errors.hpp"
#include "bistatic/rng.hpp"

namespace bistatic {

void ArrayModel::validate() const {
    if (elements < 1) throw std::invalid_argument("array needs at least one element");
    if (!(spacing_wavelengths > 0.0)) throw std::invalid_argument("element spacing must be positive");
    if (!(element_exponent >= 0.0)) throw std::invalid_argument("element exponent must be >= 0");
}

double element_gain(const ArrayModel& array, double angle) {
    if (array.element_exponent == 0.0) return 1.0;
    return std::pow(std::abs(std::cos(angle - array.boresight)), array.element_exponent);
}

CVector steering_vector(const ArrayModel& array, double angle) {
    array.validate();
    CVector a(static_cast<std::size_t>(array.elements));
    const double step = 2.0 * kPi * array.spacing_wavelengths * std::sin(angle - array.boresight);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::polar(1.0, step * static_cast<double>(k));
    return a;
}

double array_factor_power(const ArrayModel& array, double steer, double angle) {
    const CVector w = steering_vector(array, steer);
    const CVector a = steering_vector(array, angle);
    cd sum{};
    for (std::size_t k = 0; k < w.size(); ++k) sum += std::conj(w[k]) * a[k];
    return std::norm(sum) / static_cast<double>(w.size() * w.size());
}

double facing_boresight(const NodePosition& node, const NodePosition& other, double x, double y) {
    const double toward_other = true_aoa(node, other.x, other.y);
    const double toward_target = true_aoa(node, x, y);
    if (std::abs(wrap_angle(toward_target - toward_other)) <= kPi / 2.0) return toward_other;
    return wrap_angle(toward_other + kPi);
}

BistaticPaths build_paths(const BistaticPair& pair, const TargetState& target,
                          const RadarParams& params, const PathOptions& opts) {
    params.validate();
    const NodePosition& tx = pair.transmitter();
    const NodePosition& rx = pair.receiver();
    const double l = pair.baseline();
    if (!(l > 0.0)) throw DomainError("zero baseline");
    const double r_tx = distance(target.x, target.y, tx.x, tx.y);
    const double r_rx = distance(target.x, target.y, rx.x, rx.y);
    if (r_tx < 1e-9 || r_rx < 1e-9) throw DomainError("target coincides with a node");

    const double lambda = params.wavelength();
    const double eirp_w = std::pow(10.0, (params.eirp_dbm - 30.0) / 10.0);

    BistaticPaths paths;

    // Direct path: Friis with the TX beam on the target, received by one
    // isotropic element.
    double tx_gain = 1.0;
    if (opts.direct_path_gain_db) {
        tx_gain = std::pow(10.0, *opts.direct_path_gain_db / 10.0);
    } else {
        ArrayModel tx_array;
        tx_array.elements = params.tx_elements;
        tx_array.boresight = opts.tx_boresight.value_or(facing_boresight(tx, rx, target.x, target.y));
        tx_gain = array_factor_power(tx_array, true_aoa(tx, target), true_aoa(tx, rx.x, rx.y));
    }
    const double fspl = lambda / (4.0 * kPi * l);
    paths.direct.delay_s = l / kSpeedOfLight;
    paths.direct.amplitude = std::sqrt(eirp_w * tx_gain) * fspl;
    paths.direct.aoa = true_aoa(rx, tx.x, tx.y);
    paths.direct.doppler_hz = 0.0;

    // Echo: per-element power is the radar-equation SNR (which includes the
    // full receive-array gain) spread over the elements.
    const double snr = std::pow(10.0, bistatic_snr(params, pair, target) / 10.0);
    const double noise_in_band = params.noise_density() * params.bandwidth_hz;
    paths.echo.delay_s = (r_tx + r_rx) / kSpeedOfLight;
    paths.echo.amplitude = std::sqrt(snr * noise_in_band / static_cast<double>(params.rx_elements));
    paths.echo.aoa = true_aoa(rx, target);

    const double range_rate = ((target.x - tx.x) / r_tx + (target.x - rx.x) / r_rx) * target.vx +
                              ((target.y - tx.y) / r_tx + (target.y - rx.y) / r_rx) * target.vy;
    paths.echo.doppler_hz = params.carrier_hz / kSpeedOfLight * range_rate;
    return paths;
}

CVector fractional_delay(std::span<const cd> pulse, double delay_samples) {
    const std::size_t n = pulse.size();
    CVector spec = fft(pulse);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = signed_bin(k, n) / static_cast<double>(n);
        spec[k] *= std::polar(1.0, -2.0 * kPi * f * delay_samples);
    }
    return ifft(spec);
}

IqCapture propagate(const IqCapture& tx, std::span<const PathDescriptor> paths,
                    const ArrayModel& rx_array, const RadarParams& params, std::uint64_t seed,
                    const PropagateOptions& opts) {
    rx_array.validate();
    if (tx.elements() != 1) throw std::invalid_argument("propagate expects a single-element transmit capture");
    if (std::abs(tx.sample_rate_hz() - params.sample_rate_hz) > 1e-9 * params.sample_rate_hz)
        throw std::invalid_argument("capture sample rate does not match radar parameters");

    const std::size_t m = static_cast<std::size_t>(rx_array.elements);
    const std::size_t np = tx.pulses();
    const std::size_t ns = tx.samples_per_pulse();
    const double fs = tx.sample_rate_hz();
    const double pri = static_cast<double>(ns) / fs;
    IqCapture out(m, np, ns, fs);

    std::vector<CVector> steering;
    steering.reserve(paths.size());
    for (const auto& path : paths) steering.push_back(steering_vector(rx_array, path.aoa));

    std::vector<CVector> delayed(paths.size());
    for (std::size_t p = 0; p < np; ++p) {
        const auto src = tx.pulse(0, p);
        const bool repeat = p > 0 && std::equal(src.begin(), src.end(), tx.pulse(0, p - 1).begin());
        const double pulse_time = static_cast<double>(opts.first_pulse + p) * pri;

        for (std::size_t i = 0; i < paths.size(); ++i) {
            const PathDescriptor& path = paths[i];
            if (!repeat) delayed[i] = fractional_delay(src, path.delay_s * fs);
            const cd gain = path.amplitude * element_gain(rx_array, path.aoa) *
                            std::polar(1.0, -2.0 * kPi * params.carrier_hz * path.delay_s +
                                                2.0 * kPi * path.doppler_hz * pulse_time);
            for (std::size_t e = 0; e < m; ++e) {
                const cd g = gain * steering[i][e];
                auto dst = out.pulse(e, p);
                for (std::size_t n = 0; n < ns; ++n) dst[n] += g * delayed[i][n];
            }
        }

        if (opts.add_noise) {
            Rng rng(substream(seed, opts.first_pulse + p));
            std::normal_distribution<double> normal(0.0, std::sqrt(params.noise_density() * fs / 2.0));
            for (std::size_t e = 0; e < m; ++e) {
                auto dst = out.pulse(e, p);
                for (std::size_t n = 0; n < ns; ++n) {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    dst[n] += cd(re, im);
                }
            }
        }
    }
    return out;
}

}  // namespace bistatic
