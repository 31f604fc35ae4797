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

#include "bistatic/estimation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "bistatic/errors.hpp"
#include "bistatic/rng.hpp"

namespace bistatic {

// --- MUSIC ------------------------------------------------------------------

MusicSpectrum music_spectrum(const IqCapture& capture, const ArrayModel& array,
                             std::size_t n_sources, const MusicOptions& opts) {
    array.validate();
    const auto m = static_cast<std::size_t>(array.elements);
    if (capture.elements() != m) throw std::invalid_argument("capture/array element count mismatch");
    if (capture.elements() < n_sources + 1)
        throw DetectionFailure("MUSIC needs more elements than sources");
    if (opts.snapshot_count < 64) throw DetectionFailure("MUSIC needs at least 64 snapshots");
    if (opts.snapshot_stride == 0) throw std::invalid_argument("snapshot stride must be positive");
    const std::size_t last = opts.snapshot_start + (opts.snapshot_count - 1) * opts.snapshot_stride;
    if (last >= capture.samples_per_pulse()) throw DetectionFailure("snapshot window exceeds the pulse");

    Eigen::MatrixXcd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(opts.snapshot_count));
    for (std::size_t e = 0; e < m; ++e) {
        auto s = capture.pulse(e, 0);
        for (std::size_t i = 0; i < opts.snapshot_count; ++i)
            x(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(i)) =
                s[opts.snapshot_start + i * opts.snapshot_stride];
    }
    // Projector orthogonal to the known interferer, identity otherwise.
    const auto mi = static_cast<Eigen::Index>(m);
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(mi, mi);
    if (opts.null_angle) {
        if (opts.smoothing_subarray > 0)
            throw std::invalid_argument("null projection and spatial smoothing are exclusive");
        const CVector sv = steering_vector(array, *opts.null_angle);
        const Eigen::VectorXcd ad = Eigen::Map<const Eigen::VectorXcd>(sv.data(), mi);
        proj -= ad * ad.adjoint() / static_cast<double>(m);
        x = proj * x;
    }
    Eigen::MatrixXcd r = x * x.adjoint() / static_cast<double>(opts.snapshot_count);

    std::size_t sub = m;
    if (opts.smoothing_subarray > 0) {
        sub = static_cast<std::size_t>(opts.smoothing_subarray);
        if (sub > m || sub < n_sources + 1) throw std::invalid_argument("bad smoothing subarray length");
        const std::size_t count = m - sub + 1;
        const auto ms = static_cast<Eigen::Index>(sub);
        Eigen::MatrixXcd fwd = Eigen::MatrixXcd::Zero(ms, ms);
        for (std::size_t l = 0; l < count; ++l)
            fwd += r.block(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l), ms, ms);
        fwd /= static_cast<double>(count);
        const Eigen::MatrixXcd j = Eigen::MatrixXcd::Identity(ms, ms).rowwise().reverse();
        r = 0.5 * (fwd + j * fwd.conjugate() * j);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    // Eigenvalues ascend; the first sub - n_sources vectors span the noise
    // subspace. With a null projection the interferer direction is one of them.
    const Eigen::MatrixXcd noise =
        eig.eigenvectors().leftCols(static_cast<Eigen::Index>(sub - n_sources));

    ArrayModel sub_array = array;
    sub_array.elements = static_cast<int>(sub);

    MusicSpectrum spec;
    const double limit = deg_to_rad(opts.scan_limit_deg);
    const double step = deg_to_rad(opts.grid_deg);
    const auto points = static_cast<std::size_t>(std::lround(2.0 * limit / step)) + 1;
    spec.angles.reserve(points);
    spec.denominator.reserve(points);
    Eigen::VectorXcd a(static_cast<Eigen::Index>(sub));
    for (std::size_t i = 0; i < points; ++i) {
        const double phi = -limit + static_cast<double>(i) * step;
        const double angle = array.boresight + phi;
        const CVector sv = steering_vector(sub_array, angle);
        for (std::size_t k = 0; k < sub; ++k) a(static_cast<Eigen::Index>(k)) = sv[k];
        double d = 0.0;
        if (opts.null_angle) {
            const Eigen::VectorXcd pa = proj * a;
            const double norm = pa.squaredNorm();
            // Too close to the null for the projected steering to be usable.
            d = norm > 1e-6 * static_cast<double>(sub) ? (noise.adjoint() * pa).squaredNorm() / norm *
                                                             static_cast<double>(sub)
                                                       : static_cast<double>(sub);
        } else {
            d = (noise.adjoint() * a).squaredNorm();
        }
        spec.angles.push_back(angle);
        spec.denominator.push_back(d);
    }
    return spec;
}

std::vector<double> music_aoa(const IqCapture& capture, const ArrayModel& array,
                              std::size_t n_sources, const MusicOptions& opts) {
    const MusicSpectrum spec = music_spectrum(capture, array, n_sources, opts);
    const auto& d = spec.denominator;

    if (opts.reject_edge && !d.empty()) {
        const auto deepest = static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
        if (deepest == 0 || deepest + 1 == d.size()) throw DetectionFailure("source outside the scanned sector");
    }

    std::vector<std::size_t> minima;
    for (std::size_t i = 1; i + 1 < d.size(); ++i)
        if (d[i] < d[i - 1] && d[i] <= d[i + 1]) minima.push_back(i);
    if (minima.size() < n_sources) throw DetectionFailure("MUSIC found too few pseudo-spectrum peaks");
    std::stable_sort(minima.begin(), minima.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    const double step = deg_to_rad(opts.grid_deg);
    std::vector<double> out;
    for (std::size_t s = 0; s < n_sources; ++s) {
        const std::size_t i = minima[s];
        const double curvature = d[i - 1] - 2.0 * d[i] + d[i + 1];
        double offset = curvature > 0.0 ? 0.5 * (d[i - 1] - d[i + 1]) / curvature : 0.0;
        offset = std::clamp(offset, -0.5, 0.5);
        out.push_back(wrap_angle(spec.angles[i] + offset * step));
    }
    return out;
}

// --- beams ------------------------------------------------------------------

IqCapture beamform(const IqCapture& capture, const ArrayModel& array, double angle) {
    if (capture.elements() != static_cast<std::size_t>(array.elements))
        throw std::invalid_argument("capture/array element count mismatch");
    const CVector w = steering_vector(array, angle);
    IqCapture out(1, capture.pulses(), capture.samples_per_pulse(), capture.sample_rate_hz());
    auto dst = out.element(0);
    const double norm = 1.0 / static_cast<double>(w.size());
    for (std::size_t e = 0; e < w.size(); ++e) {
        const cd c = std::conj(w[e]) * norm;
        auto src = capture.element(e);
        for (std::size_t n = 0; n < src.size(); ++n) dst[n] += c * src[n];
    }
    return out;
}

IqCapture beamform_nulled(const IqCapture& capture, const ArrayModel& array, double angle,
                          double null_angle) {
    if (capture.elements() != static_cast<std::size_t>(array.elements))
        throw std::invalid_argument("capture/array element count mismatch");
    const CVector a = steering_vector(array, angle);
    const CVector n = steering_vector(array, null_angle);
    const double m = static_cast<double>(a.size());
    cd nh_a{};
    for (std::size_t e = 0; e < a.size(); ++e) nh_a += std::conj(n[e]) * a[e];
    CVector w(a.size());
    for (std::size_t e = 0; e < a.size(); ++e) w[e] = a[e] - n[e] * nh_a / m;
    cd gain{};
    for (std::size_t e = 0; e < a.size(); ++e) gain += std::conj(w[e]) * a[e];
    if (std::abs(gain) < 1e-9 * m) throw DetectionFailure("look direction coincides with the null");

    IqCapture out(1, capture.pulses(), capture.samples_per_pulse(), capture.sample_rate_hz());
    auto dst = out.element(0);
    for (std::size_t e = 0; e < w.size(); ++e) {
        const cd c = std::conj(w[e]) / gain;
        auto src = capture.element(e);
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] += c * src[k];
    }
    return out;
}

namespace {

cd projection_coefficient(std::span<const cd> y, std::span<const cd> d, double d_energy) {
    cd num{};
    for (std::size_t n = 0; n < y.size(); ++n) num += y[n] * std::conj(d[n]);
    return num / d_energy;
}

void check_compatible(const IqCapture& a, const IqCapture& b) {
    if (a.samples_per_element() != b.samples_per_element() || a.pulses() != b.pulses())
        throw std::invalid_argument("captures differ in length");
    if (a.sample_rate_hz() != b.sample_rate_hz()) throw std::invalid_argument("captures differ in sample rate");
}

}  // namespace

IqCapture cancel_direct_path(const IqCapture& echo_beam, const IqCapture& direct_beam) {
    check_compatible(echo_beam, direct_beam);
    if (echo_beam.elements() != 1 || direct_beam.elements() != 1)
        throw std::invalid_argument("cancel_direct_path expects single-element beams");
    const double d_energy = direct_beam.energy();
    if (!(d_energy > 0.0)) throw std::invalid_argument("direct beam has zero energy");
    IqCapture out = echo_beam;
    auto y = out.element(0);
    auto d = direct_beam.element(0);
    const cd alpha = projection_coefficient(y, d, d_energy);
    for (std::size_t n = 0; n < y.size(); ++n) y[n] -= alpha * d[n];
    return out;
}

IqCapture cancel_direct_path_elements(const IqCapture& capture, const IqCapture& direct_beam) {
    check_compatible(capture, direct_beam);
    if (direct_beam.elements() != 1) throw std::invalid_argument("direct beam must be single-element");
    const double d_energy = direct_beam.energy();
    if (!(d_energy > 0.0)) throw std::invalid_argument("direct beam has zero energy");
    IqCapture out = capture;
    auto d = direct_beam.element(0);
    for (std::size_t e = 0; e < out.elements(); ++e) {
        auto y = out.element(e);
        const cd alpha = projection_coefficient(y, d, d_energy);
        for (std::size_t n = 0; n < y.size(); ++n) y[n] -= alpha * d[n];
    }
    return out;
}

// --- matched filter ---------------------------------------------------------

namespace {

// Correlation of one pulse against the conjugated reference spectrum.
CVector correlate_pulse(std::span<const cd> pulse, const CVector& ref_spec_conj) {
    CVector spec = fft(pulse);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= ref_spec_conj[k];
    return ifft(spec);
}

CVector reference_spectrum_conj(const IqCapture& reference, std::size_t samples_per_pulse) {
    if (reference.samples_per_pulse() != samples_per_pulse)
        throw std::invalid_argument("reference length differs from the pulse length");
    CVector spec = fft(reference.pulse(0, 0));
    for (auto& v : spec) v = std::conj(v);
    return spec;
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

std::vector<double> correlation_power(const IqCapture& beam, const IqCapture& reference) {
    if (beam.elements() != 1) throw std::invalid_argument("correlation expects a single-element beam");
    const std::size_t n = beam.samples_per_pulse();
    const CVector ref = reference_spectrum_conj(reference, n);
    std::vector<double> power(n, 0.0);
    for (std::size_t p = 0; p < beam.pulses(); ++p) {
        const CVector r = correlate_pulse(beam.pulse(0, p), ref);
        for (std::size_t k = 0; k < n; ++k) power[k] += std::norm(r[k]);
    }
    return power;
}

long peak_lag(const std::vector<double>& power) {
    const auto it = std::max_element(power.begin(), power.end());
    const auto k = static_cast<long>(it - power.begin());
    const auto n = static_cast<long>(power.size());
    return k > n / 2 ? k - n : k;
}

double peak_isolation_db(const std::vector<double>& power, std::size_t guard) {
    const std::size_t n = power.size();
    const auto peak = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
    double side = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t d = k > peak ? k - peak : peak - k;
        if (std::min(d, n - d) > guard) side = std::max(side, power[k]);
    }
    if (!(side > 0.0)) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(power[peak] / side);
}

double estimate_tdoa(const IqCapture& direct_beam, const IqCapture& echo_clean,
                     const IqCapture& reference, const TdoaOptions& opts) {
    check_compatible(direct_beam, echo_clean);
    const double threshold = std::pow(10.0, opts.threshold_db / 10.0);

    const std::vector<double> pd = correlation_power(direct_beam, reference);
    const std::vector<double> pe = correlation_power(echo_clean, reference);
    const double peak_d = *std::max_element(pd.begin(), pd.end());
    const double peak_e = *std::max_element(pe.begin(), pe.end());
    if (!(peak_d >= threshold * median(pd))) throw DetectionFailure("direct-path peak below threshold");
    if (!(peak_e >= threshold * median(pe))) throw DetectionFailure("echo peak below threshold");
    if (opts.isolation_db > 0.0) {
        if (peak_isolation_db(pd, opts.guard_lags) < opts.isolation_db)
            throw DetectionFailure("direct-path peak not isolated");
        if (peak_isolation_db(pe, opts.guard_lags) < opts.isolation_db)
            throw DetectionFailure("echo peak not isolated");
    }

    const long lag = peak_lag(pe) - peak_lag(pd);
    if (lag < 0) throw DetectionFailure("echo peak precedes the direct path");
    return static_cast<double>(lag) / direct_beam.sample_rate_hz();
}

// --- range-Doppler ----------------------------------------------------------

RangeDopplerMap range_doppler(const IqCapture& train_echo, const IqCapture& reference,
                              const RangeDopplerOptions& opts) {
    if (train_echo.elements() != 1) throw std::invalid_argument("range_doppler expects a single beam");
    if (train_echo.pulses() < 2) throw std::invalid_argument("range_doppler needs at least two pulses");
    if (opts.pad_factor < 1) throw std::invalid_argument("pad factor must be >= 1");

    const std::size_t ns = train_echo.samples_per_pulse();
    const std::size_t np = train_echo.pulses();
    const std::size_t nd = std::min(opts.max_delay_bins, ns);
    const std::size_t nf = np * opts.pad_factor;
    const double fs = train_echo.sample_rate_hz();
    const double pri = static_cast<double>(ns) / fs;

    const CVector ref = reference_spectrum_conj(reference, ns);
    std::vector<CVector> slow(nd, CVector(nf));
    for (std::size_t p = 0; p < np; ++p) {
        const CVector r = correlate_pulse(train_echo.pulse(0, p), ref);
        for (std::size_t d = 0; d < nd; ++d) slow[d][p] = r[d];
    }

    RangeDopplerMap map;
    map.delay_bins = nd;
    map.doppler_bins = nf;
    map.magnitudes.resize(nd * nf);
    for (std::size_t d = 0; d < nd; ++d) {
        const CVector s = fft(slow[d]);
        for (std::size_t f = 0; f < nf; ++f)
            map.magnitudes[d * nf + f] = std::abs(s[(f + nf / 2) % nf]);
    }
    for (std::size_t d = 0; d < nd; ++d) map.delay_axis.push_back(static_cast<double>(d) / fs);
    for (std::size_t f = 0; f < nf; ++f)
        map.doppler_axis.push_back((static_cast<double>(f) - static_cast<double>(nf / 2)) /
                                   (static_cast<double>(nf) * pri));
    return map;
}

RangeDopplerPeak find_peak(const RangeDopplerMap& map) {
    if (map.magnitudes.empty()) throw DetectionFailure("empty range-Doppler map");
    const auto it = std::max_element(map.magnitudes.begin(), map.magnitudes.end());
    const auto idx = static_cast<std::size_t>(it - map.magnitudes.begin());
    RangeDopplerPeak peak;
    peak.delay_bin = idx / map.doppler_bins;
    peak.doppler_bin = idx % map.doppler_bins;
    peak.delay_s = map.delay_axis[peak.delay_bin];

    const std::size_t nf = map.doppler_bins;
    const std::size_t f = peak.doppler_bin;
    const double left = map.at(peak.delay_bin, (f + nf - 1) % nf);
    const double mid = map.at(peak.delay_bin, f);
    const double right = map.at(peak.delay_bin, (f + 1) % nf);
    const double curvature = left - 2.0 * mid + right;
    double offset = curvature < 0.0 ? 0.5 * (left - right) / curvature : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);
    const double bin_hz = nf > 1 ? map.doppler_axis[1] - map.doppler_axis[0] : 0.0;
    peak.doppler_hz = map.doppler_axis[f] + offset * bin_hz;
    return peak;
}

void write_range_doppler_csv(std::ostream& os, const RangeDopplerMap& map) {
    const auto old = os.precision(17);
    os << "delay_s";
    for (double f : map.doppler_axis) os << ',' << f;
    os << '\n';
    for (std::size_t d = 0; d < map.delay_bins; ++d) {
        os << map.delay_axis[d];
        for (std::size_t f = 0; f < map.doppler_bins; ++f) os << ',' << map.at(d, f);
        os << '\n';
    }
    os.precision(old);
}

double doppler_to_velocity(double doppler_hz, double carrier_hz) {
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier must be positive");
    return kSpeedOfLight * doppler_hz / carrier_hz;
}

// --- model-based surrogate --------------------------------------------------

Measurement model_based_measure(const BistaticPair& pair, const TargetState& target,
                                const RadarParams& params, const MeasurementErrorModel& err,
                                double z_tdoa, double z_aoa, const ModelMeasureOptions& opts) {
    double tdoa = true_tdoa(pair, target);
    if (opts.quantize) tdoa = std::round(tdoa * params.sample_rate_hz) / params.sample_rate_hz;
    Measurement m;
    m.tdoa_s = std::max(0.0, tdoa + err.sigma_tdoa * z_tdoa);
    m.aoa_rad = wrap_angle(true_aoa(pair.receiver(), target) + err.sigma_aoa * z_aoa);
    m.mode = pair.mode;
    return m;
}

Measurement model_based_measure(const BistaticPair& pair, const TargetState& target,
                                const RadarParams& params, const MeasurementErrorModel& err,
                                std::uint64_t seed, const ModelMeasureOptions& opts) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const double z_tdoa = normal(rng);
    const double z_aoa = normal(rng);
    return model_based_measure(pair, target, params, err, z_tdoa, z_aoa, opts);
}

}  // namespace bistatic
