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
#include <optional>
#include <span>

#include "bistatic/geometry.hpp"
#include "bistatic/waveform.hpp"

namespace bistatic {

/// Uniform linear array. `boresight` is the direction of the array normal in
/// the AoA convention; the element axis is perpendicular to it.
struct ArrayModel {
    int elements = 16;
    double spacing_wavelengths = 0.5;
    double boresight = 0.0;
    /// Element amplitude pattern |cos(angle - boresight)|^q; 0 is isotropic.
    double element_exponent = 0.0;

    void validate() const;
};

/// Element k carries exp(j 2 pi k d sin(angle - boresight)).
CVector steering_vector(const ArrayModel& array, double angle);

/// Common element amplitude gain toward `angle`.
double element_gain(const ArrayModel& array, double angle);

/// Normalised array-factor power toward `angle` with the beam steered at
/// `steer`; 1 at the steering direction.
double array_factor_power(const ArrayModel& array, double steer, double angle);

/// Boresight of a panel at `node` pointing along the baseline: toward `other`
/// when (x, y) lies within 90 deg of that direction, else away from it
/// (back-to-back panel pair).
double facing_boresight(const NodePosition& node, const NodePosition& other, double x, double y);

struct PathDescriptor {
    double delay_s = 0.0;
    double amplitude = 0.0;  // per receive element, sqrt(W)
    double aoa = 0.0;        // at the receive array
    double doppler_hz = 0.0;
};

struct BistaticPaths {
    PathDescriptor direct;
    PathDescriptor echo;
};

struct PathOptions {
    /// Transmit array boresight; defaults to the panel facing the target.
    std::optional<double> tx_boresight;
    /// Overrides the transmit array-factor gain toward the receiver.
    std::optional<double> direct_path_gain_db;
};

/// Direct (free space, TX sidelobe toward the RX) and target-echo paths for
/// the pair's current mode. Echo amplitude realises the bistatic radar
/// equation after ideal combining over the receive array.
BistaticPaths build_paths(const BistaticPair& pair, const TargetState& target,
                          const RadarParams& params, const PathOptions& opts = {});

struct PropagateOptions {
    bool add_noise = true;
    /// Pulse index of the first pulse, for Doppler phase continuity when a
    /// train is propagated in pieces.
    std::size_t first_pulse = 0;
};

/// Delayed, scaled, steered copies of the single-element `tx` on every
/// receive element, per-pulse Doppler rotation, plus thermal noise of power
/// k T_s f_s per sample. Deterministic in `seed`.
IqCapture propagate(const IqCapture& tx, std::span<const PathDescriptor> paths,
                    const ArrayModel& rx_array, const RadarParams& params, std::uint64_t seed,
                    const PropagateOptions& opts = {});

/// Cyclic fractional delay of one pulse via a frequency-domain phase ramp.
CVector fractional_delay(std::span<const cd> pulse, double delay_samples);

}  // namespace bistatic
