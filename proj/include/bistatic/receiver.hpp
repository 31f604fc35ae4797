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

#include "bistatic/channel.hpp"
#include "bistatic/estimation.hpp"
#include "bistatic/waveform.hpp"

namespace bistatic {

struct ReceiverOptions {
    bool add_noise = true;
    PathOptions paths;
    TdoaOptions tdoa;
    /// Element amplitude pattern |cos(angle off boresight)|^q; the null along
    /// the array axis blinds the receiver to targets broadside to the baseline.
    double element_exponent = 0.0;
    /// MUSIC scan half-width off boresight; echoes beyond it are reported as
    /// detection failures (the array is ambiguous toward endfire).
    double field_of_view_deg = 75.0;
    double music_grid_deg = 0.1;
    std::size_t music_snapshots = 128;
};

struct SignalLevelResult {
    Measurement measurement;
    double direct_aoa = 0.0;   // beam used for the reference channel
    double echo_snr_db = 0.0;  // radar-equation value after combining
};

struct DopplerResult {
    RangeDopplerMap map;
    RangeDopplerPeak peak;
    double doppler_hz = 0.0;
    double range_rate = 0.0;  // d(R1 + R2)/dt, m/s
    double aoa_rad = 0.0;
};

/// Two-beam bistatic receiver: a beam on the known transmitter bearing and a
/// beam on the echo bearing found by MUSIC, each with a null on the other.
class SignalLevelReceiver {
public:
    explicit SignalLevelReceiver(const RadarParams& params, ReceiverOptions opts = {});

    /// Single-slot TDOA/AoA measurement. Deterministic in `seed`.
    SignalLevelResult measure(const BistaticPair& pair, const TargetState& target,
                              std::uint64_t seed) const;

    /// Pulse train of `pulses` slots through the same front end, then a
    /// range-Doppler map of the cleaned echo beam.
    DopplerResult measure_doppler(const BistaticPair& pair, const TargetState& target,
                                  std::size_t pulses, std::uint64_t seed) const;

    const WaveformConfig& waveform() const { return waveform_; }
    const IqCapture& reference() const { return reference_; }
    const RadarParams& params() const { return params_; }
    ArrayModel receive_array(const BistaticPair& pair, const TargetState& target) const;

private:
    struct FrontEnd {
        IqCapture direct_beam;
        IqCapture echo_clean;
        double direct_aoa = 0.0;
        double aoa = 0.0;
    };
    FrontEnd front_end(const BistaticPair& pair, const TargetState& target, const IqCapture& tx,
                       std::uint64_t seed) const;

    RadarParams params_;
    ReceiverOptions opts_;
    WaveformConfig waveform_;
    IqCapture slot_;
    IqCapture reference_;
};

}  // namespace bistatic
