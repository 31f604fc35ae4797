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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bistatic/channel.hpp"
#include "bistatic/measurement.hpp"
#include "bistatic/waveform.hpp"

namespace bistatic {

// --- direction finding ------------------------------------------------------

struct MusicOptions {
    double grid_deg = 0.1;
    /// Snapshots are taken from the first pulse at start + i * stride.
    std::size_t snapshot_start = 0;
    std::size_t snapshot_count = 128;
    std::size_t snapshot_stride = 8;
    /// Forward-backward spatial smoothing subarray length; 0 disables it.
    int smoothing_subarray = 0;
    /// Scan half-width around the array boresight.
    double scan_limit_deg = 90.0;
    /// Known interferer direction projected out of the snapshots and the
    /// steering vectors before the subspace split.
    std::optional<double> null_angle;
    /// Throw DetectionFailure when the deepest spectrum point is a scan
    /// edge, i.e. the source lies outside the scanned sector.
    bool reject_edge = false;
};

/// MUSIC pseudo-spectrum sampled on the scan grid; angles in the AoA frame.
struct MusicSpectrum {
    std::vector<double> angles;
    std::vector<double> denominator;  // ||E_n^H a||^2, pseudo-spectrum is 1/denominator
};

MusicSpectrum music_spectrum(const IqCapture& capture, const ArrayModel& array,
                             std::size_t n_sources, const MusicOptions& opts = {});

/// The `n_sources` strongest pseudo-spectrum peaks, refined by a parabola
/// through the neighbouring grid points, strongest first.
std::vector<double> music_aoa(const IqCapture& capture, const ArrayModel& array,
                              std::size_t n_sources, const MusicOptions& opts = {});

// --- beams and cancellation -------------------------------------------------

/// Conjugate steering-vector sum normalised by the element count.
IqCapture beamform(const IqCapture& capture, const ArrayModel& array, double angle);

/// Unit gain toward `angle` with a zero toward `null_angle`: weights are the
/// steering vector projected orthogonal to the null direction.
IqCapture beamform_nulled(const IqCapture& capture, const ArrayModel& array, double angle,
                          double null_angle);

/// echo - alpha * direct with alpha the least-squares projection coefficient.
IqCapture cancel_direct_path(const IqCapture& echo_beam, const IqCapture& direct_beam);

/// Same projection applied to every element of a multi-element capture.
IqCapture cancel_direct_path_elements(const IqCapture& capture, const IqCapture& direct_beam);

// --- delay estimation -------------------------------------------------------

/// Circular cross-correlation power |sum_n y[n+k] conj(ref[n])|^2 per lag,
/// accumulated over pulses.
std::vector<double> correlation_power(const IqCapture& beam, const IqCapture& reference);

/// Lag of the global correlation maximum, mapped to (-N/2, N/2].
long peak_lag(const std::vector<double>& power);

struct TdoaOptions {
    /// Peak power over the median correlation power.
    double threshold_db = 6.0;
    /// Peak power over the strongest lag outside +-guard_lags of the peak;
    /// rejects noise-only maxima. 0 disables the check.
    double isolation_db = 3.0;
    std::size_t guard_lags = 4;
};

/// Peak power over the strongest lag farther than `guard` lags (circularly)
/// from the global maximum, in dB.
double peak_isolation_db(const std::vector<double>& power, std::size_t guard);

/// Echo peak minus direct peak, in whole samples / sample rate. Throws
/// DetectionFailure when either peak fails the TdoaOptions tests.
double estimate_tdoa(const IqCapture& direct_beam, const IqCapture& echo_clean,
                     const IqCapture& reference, const TdoaOptions& opts = {});

// --- Doppler ----------------------------------------------------------------

/// Magnitudes stored delay-major: magnitudes[d * doppler_bins + f].
struct RangeDopplerMap {
    std::size_t delay_bins = 0;
    std::size_t doppler_bins = 0;
    std::vector<double> magnitudes;
    std::vector<double> delay_axis;    // s
    std::vector<double> doppler_axis;  // Hz

    double at(std::size_t d, std::size_t f) const { return magnitudes[d * doppler_bins + f]; }
};

struct RangeDopplerOptions {
    std::size_t pad_factor = 4;
    std::size_t max_delay_bins = 128;
};

RangeDopplerMap range_doppler(const IqCapture& train_echo, const IqCapture& reference,
                              const RangeDopplerOptions& opts = {});

struct RangeDopplerPeak {
    std::size_t delay_bin = 0;
    std::size_t doppler_bin = 0;
    double delay_s = 0.0;
    double doppler_hz = 0.0;  // parabolic refinement across Doppler bins
};

RangeDopplerPeak find_peak(const RangeDopplerMap& map);

/// Header row: empty cell then the Doppler axis; each row: delay then magnitudes.
void write_range_doppler_csv(std::ostream& os, const RangeDopplerMap& map);

/// Bistatic range rate d(R1 + R2)/dt = c f_D / f0.
double doppler_to_velocity(double doppler_hz, double carrier_hz);

// --- measurement surrogates -------------------------------------------------

struct ModelMeasureOptions {
    /// Round the true TDOA to the sample grid before adding noise. False
    /// models an unlimited sample rate.
    bool quantize = true;
};

/// Truth plus Gaussian errors. Deterministic in `seed`.
Measurement model_based_measure(const BistaticPair& pair, const TargetState& target,
                                const RadarParams& params, const MeasurementErrorModel& err,
                                std::uint64_t seed, const ModelMeasureOptions& opts = {});

/// As model_based_measure with caller-supplied standard normal draws.
Measurement model_based_measure(const BistaticPair& pair, const TargetState& target,
                                const RadarParams& params, const MeasurementErrorModel& err,
                                double z_tdoa, double z_aoa, const ModelMeasureOptions& opts);

}  // namespace bistatic
