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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "bistatic/channel.hpp"
#include "bistatic/errors.hpp"
#include "bistatic/estimation.hpp"
#include "bistatic/waveform.hpp"

using namespace bistatic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const BistaticPair kPair{{0.0, 0.0}, {25.0, 0.0}, Mode::Mode1};

double mean_power(std::span<const cd> x) {
    double s = 0.0;
    for (const cd& v : x) s += std::norm(v);
    return s / static_cast<double>(x.size());
}

PathDescriptor path(double delay_s, double amplitude, double aoa, double doppler = 0.0) {
    PathDescriptor p;
    p.delay_s = delay_s;
    p.amplitude = amplitude;
    p.aoa = aoa;
    p.doppler_hz = doppler;
    return p;
}

}  // namespace

TEST_CASE("steering vector closed forms", "[channel]") {
    ArrayModel a;
    a.boresight = 0.4;
    for (const cd& v : steering_vector(a, 0.4)) CHECK(std::abs(v - cd(1.0, 0.0)) < 1e-15);
    const CVector s = steering_vector(a, 0.4 + deg_to_rad(30.0));
    REQUIRE(s.size() == 16);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        CHECK_THAT(std::abs(s[k]), WithinAbs(1.0, 1e-15));
        CHECK_THAT(std::arg(s[k + 1] / s[k]), WithinAbs(kPi / 2.0, 1e-12));
    }
    // Coherent conjugate sum at the steering angle equals the element count.
    cd sum{};
    for (const cd& v : s) sum += std::conj(v) * v;
    CHECK_THAT(sum.real(), WithinAbs(16.0, 1e-12));
}

TEST_CASE("array factor and element pattern", "[channel]") {
    ArrayModel a;
    CHECK_THAT(array_factor_power(a, 0.3, 0.3), WithinAbs(1.0, 1e-12));
    // First null of a 16-element half-wavelength array: sin(angle) = 2/16.
    CHECK(array_factor_power(a, 0.0, std::asin(2.0 / 16.0)) < 1e-20);
    CHECK(element_gain(a, 1.2) == 1.0);
    a.element_exponent = 1.0;
    CHECK_THAT(element_gain(a, deg_to_rad(60.0)), WithinAbs(0.5, 1e-12));
    a.element_exponent = -1.0;
    CHECK_THROWS(a.validate());
    a.element_exponent = 0.0;
    a.elements = 0;
    CHECK_THROWS(a.validate());
}

TEST_CASE("facing_boresight points along the baseline", "[channel]") {
    const NodePosition n1{0.0, 0.0}, n2{25.0, 0.0};
    const double toward_n1 = true_aoa(n2, n1.x, n1.y);
    // Target on the N1 side of N2.
    CHECK_THAT(facing_boresight(n2, n1, 10.0, 12.0), WithinAbs(toward_n1, 1e-15));
    // Target behind N2: back panel.
    CHECK_THAT(std::abs(wrap_angle(facing_boresight(n2, n1, 40.0, 12.0) - toward_n1)), WithinAbs(kPi, 1e-12));
}

TEST_CASE("build_paths delays, angles and amplitudes", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    const TargetState t = iso_range_target(kPair, 50.0, deg_to_rad(40.0));
    const BistaticPaths p = build_paths(kPair, t, params);
    CHECK_THAT(p.direct.delay_s, WithinRel(25.0 / kSpeedOfLight, 1e-12));
    CHECK_THAT(p.echo.delay_s, WithinRel(50.0 / kSpeedOfLight, 1e-12));
    CHECK_THAT(p.echo.aoa, WithinAbs(deg_to_rad(40.0), 1e-12));
    CHECK_THAT(p.direct.aoa, WithinAbs(deg_to_rad(90.0), 1e-12));
    CHECK(p.direct.doppler_hz == 0.0);
    CHECK(p.echo.doppler_hz == 0.0);

    // Echo power per element times the element count is the radar-equation
    // SNR over the in-band noise floor.
    const double snr = std::pow(10.0, bistatic_snr(params, kPair, t) / 10.0);
    CHECK_THAT(16.0 * p.echo.amplitude * p.echo.amplitude / (params.noise_density() * params.bandwidth_hz),
               WithinRel(snr, 1e-12));

    // Halving the RCS scales the echo amplitude by sqrt(1/2): -1.5 dB on a
    // 10 log10 scale, -3 dB of power.
    TargetState half = t;
    half.rcs_dbsm -= 10.0 * std::log10(2.0);
    const BistaticPaths q = build_paths(kPair, half, params);
    CHECK_THAT(10.0 * std::log10(q.echo.amplitude / p.echo.amplitude), WithinAbs(-1.505, 1e-3));
    CHECK_THAT(q.echo.amplitude / p.echo.amplitude, WithinRel(std::sqrt(0.5), 1e-12));

    // Direct-path override is Friis with the given TX gain.
    PathOptions opts;
    opts.direct_path_gain_db = 0.0;
    const BistaticPaths r = build_paths(kPair, t, params, opts);
    const double eirp_w = std::pow(10.0, (43.0 - 30.0) / 10.0);
    CHECK_THAT(r.direct.amplitude, WithinRel(std::sqrt(eirp_w) * params.wavelength() / (4.0 * kPi * 25.0), 1e-12));
}

TEST_CASE("build_paths Doppler for a radially inward target", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    TargetState t = iso_range_target(kPair, 50.0, deg_to_rad(60.0));
    // Inward normal of the ellipse: -(u1 + u2), u_i pointing from node i to the target.
    const double r1 = distance(0, 0, t.x, t.y), r2 = distance(25, 0, t.x, t.y);
    const double gx = t.x / r1 + (t.x - 25.0) / r2, gy = t.y / r1 + t.y / r2;
    const double g = std::hypot(gx, gy);
    t.vx = -0.2 * gx / g;
    t.vy = -0.2 * gy / g;
    const double beta = bistatic_angle(kPair, t);
    const double expected = -params.carrier_hz / kSpeedOfLight * 0.2 * 2.0 * std::cos(beta / 2.0);
    CHECK_THAT(build_paths(kPair, t, params).echo.doppler_hz, WithinRel(expected, 1e-12));
    // Finite-difference oracle on R1 + R2.
    const double dt = 1e-6;
    const TargetState later{t.x + t.vx * dt, t.y + t.vy * dt};
    const double rate = (distance(0, 0, later.x, later.y) + distance(25, 0, later.x, later.y) - r1 - r2) / dt;
    CHECK_THAT(build_paths(kPair, t, params).echo.doppler_hz,
               WithinRel(params.carrier_hz / kSpeedOfLight * rate, 1e-6));
}

TEST_CASE("propagate identity path", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    const IqCapture slot = generate_slot(WaveformConfig::for_radar(params));
    ArrayModel one;
    one.elements = 1;
    const PathDescriptor p = path(0.0, 0.37, 0.0);
    PropagateOptions quiet;
    quiet.add_noise = false;
    const IqCapture out = propagate(slot, std::span(&p, 1), one, params, 1, quiet);
    double worst = 0.0;
    for (std::size_t n = 0; n < slot.samples_per_pulse(); ++n)
        worst = std::max(worst, std::abs(out.data()[n] - 0.37 * slot.data()[n]));
    CHECK(worst < 1e-12);
}

TEST_CASE("fractional delay composes", "[channel]") {
    const IqCapture slot = generate_slot(WaveformConfig{});
    const auto x = slot.pulse(0, 0);
    const CVector half = fractional_delay(fractional_delay(x, 0.5), 0.5);
    const CVector whole = fractional_delay(x, 1.0);
    double worst = 0.0, worst_shift = 0.0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(half[i] - whole[i]));
        worst_shift = std::max(worst_shift, std::abs(whole[i] - x[(i + n - 1) % n]));
    }
    CHECK(worst < 1e-9);
    CHECK(worst_shift < 1e-9);
}

TEST_CASE("propagate preserves energy per path", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    const IqCapture slot = generate_slot(WaveformConfig::for_radar(params));
    const double in_power = mean_power(slot.pulse(0, 0));
    ArrayModel array;
    PropagateOptions quiet;
    quiet.add_noise = false;
    const PathDescriptor p = path(37.3 / kSpeedOfLight, 2.5e-3, 0.3);
    const IqCapture out = propagate(slot, std::span(&p, 1), array, params, 1, quiet);
    for (std::size_t e = 0; e < 16; e += 5)
        CHECK_THAT(mean_power(out.pulse(e, 0)), WithinRel(2.5e-3 * 2.5e-3 * in_power, 1e-6));
}

TEST_CASE("propagate noise floor", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    const IqCapture train = pulse_train(generate_slot(WaveformConfig::for_radar(params)), 4);
    ArrayModel array;
    const PathDescriptor p = path(1e-7, 0.0, 0.1);
    const IqCapture out = propagate(train, std::span(&p, 1), array, params, 9);
    const double expected = params.noise_density() * params.sample_rate_hz;
    CHECK(out.data().size() > 980000);
    CHECK_THAT(mean_power(out.data()), WithinRel(expected, 0.02));
}

TEST_CASE("propagate Doppler phase is linear across pulses", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    const IqCapture train = pulse_train(generate_slot(WaveformConfig::for_radar(params)), 8);
    ArrayModel array;
    PropagateOptions quiet;
    quiet.add_noise = false;
    const PathDescriptor p = path(40.0 / kSpeedOfLight, 1.0, -0.2, -34.18);
    const IqCapture out = propagate(train, std::span(&p, 1), array, params, 1, quiet);
    const std::size_t n = 3000;  // any sample inside a symbol
    const double step = 2.0 * kPi * -34.18 * 125e-6;
    for (std::size_t e : {0u, 7u}) {
        for (std::size_t k = 0; k + 1 < 8; ++k) {
            const double d = std::arg(out.pulse(e, k + 1)[n] / out.pulse(e, k)[n]);
            REQUIRE_THAT(d, WithinAbs(step, 1e-9));
        }
    }
    // Propagating the tail separately continues the same phase track.
    PropagateOptions tail = quiet;
    tail.first_pulse = 5;
    const IqCapture part = propagate(pulse_train(generate_slot(WaveformConfig::for_radar(params)), 3),
                                     std::span(&p, 1), array, params, 1, tail);
    CHECK(std::abs(part.pulse(3, 0)[n] - out.pulse(3, 5)[n]) < 1e-12 * std::abs(out.pulse(3, 5)[n]));
}

TEST_CASE("propagate is deterministic in the seed", "[channel]") {
    const RadarParams params = RadarParams::preset(100);
    const IqCapture slot = generate_slot(WaveformConfig::for_radar(params));
    ArrayModel array;
    array.elements = 4;
    const PathDescriptor p = path(1e-7, 1e-3, 0.1);
    CHECK(propagate(slot, std::span(&p, 1), array, params, 5).data() ==
          propagate(slot, std::span(&p, 1), array, params, 5).data());
    CHECK(propagate(slot, std::span(&p, 1), array, params, 5).data() !=
          propagate(slot, std::span(&p, 1), array, params, 6).data());
}

TEST_CASE("propagate rejects mismatched inputs", "[channel]") {
    const RadarParams params = RadarParams::preset(400);
    const IqCapture slot = generate_slot(WaveformConfig{});  // 122.88 MHz
    ArrayModel array;
    const PathDescriptor p = path(0.0, 1.0, 0.0);
    CHECK_THROWS(propagate(slot, std::span(&p, 1), array, params, 1));
    IqCapture two(2, 1, 8, params.sample_rate_hz);
    CHECK_THROWS(propagate(two, std::span(&p, 1), array, params, 1));
}

TEST_CASE("in-band SNR after beamforming matches the radar equation", "[channel][montecarlo]") {
    // The echo is split over the elements so that ideal combining restores the
    // radar-equation SNR, which already carries the receive-array gain.
    const RadarParams params = RadarParams::preset(100);
    const IqCapture slot = generate_slot(WaveformConfig::for_radar(params));
    const TargetState t = iso_range_target(kPair, 50.0, deg_to_rad(30.0));
    const BistaticPaths paths = build_paths(kPair, t, params);
    ArrayModel array;
    array.boresight = facing_boresight(kPair.n2, kPair.n1, t.x, t.y);

    PropagateOptions quiet;
    quiet.add_noise = false;
    const IqCapture clean = propagate(slot, std::span(&paths.echo, 1), array, params, 0, quiet);
    const double signal = mean_power(beamform(clean, array, paths.echo.aoa).data());

    const PathDescriptor silent = path(0.0, 0.0, 0.0);
    double noise = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const IqCapture n = propagate(slot, std::span(&silent, 1), array, params, s + 1);
        noise += mean_power(beamform(n, array, paths.echo.aoa).data());
    }
    noise /= 100.0;
    const double in_band = noise * params.bandwidth_hz / params.sample_rate_hz;
    const double measured_db = 10.0 * std::log10(signal / in_band);
    CHECK_THAT(measured_db, WithinAbs(bistatic_snr(params, kPair, t), 0.5));
}
