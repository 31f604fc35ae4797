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

#include "bistatic/receiver.hpp"

#include <array>

namespace bistatic {

SignalLevelReceiver::SignalLevelReceiver(const RadarParams& params, ReceiverOptions opts)
    : params_(params), opts_(opts), waveform_(WaveformConfig::for_radar(params)) {
    params_.validate();
    slot_ = generate_slot(waveform_);
    reference_ = matched_reference(waveform_);
}

ArrayModel SignalLevelReceiver::receive_array(const BistaticPair& pair, const TargetState& target) const {
    ArrayModel array;
    array.elements = params_.rx_elements;
    array.element_exponent = opts_.element_exponent;
    array.boresight = facing_boresight(pair.receiver(), pair.transmitter(), target.x, target.y);
    return array;
}

SignalLevelReceiver::FrontEnd SignalLevelReceiver::front_end(const BistaticPair& pair,
                                                             const TargetState& target,
                                                             const IqCapture& tx,
                                                             std::uint64_t seed) const {
    const BistaticPaths paths = build_paths(pair, target, params_, opts_.paths);
    const ArrayModel array = receive_array(pair, target);
    const std::array<PathDescriptor, 2> list{paths.direct, paths.echo};
    PropagateOptions popts;
    popts.add_noise = opts_.add_noise;
    const IqCapture capture = propagate(tx, list, array, params_, seed, popts);

    FrontEnd fe;
    fe.direct_aoa = true_aoa(pair.receiver(), pair.transmitter().x, pair.transmitter().y);

    // The transmitter bearing is known, so the direct path is removed
    // spatially before the subspace search.
    MusicOptions mopts;
    mopts.grid_deg = opts_.music_grid_deg;
    mopts.snapshot_count = opts_.music_snapshots;
    mopts.snapshot_stride = std::max<std::size_t>(1, waveform_.fft_size / opts_.music_snapshots);
    mopts.snapshot_start =
        waveform_.symbol_start(waveform_.dmrs_symbol_index) + waveform_.cp_length(waveform_.dmrs_symbol_index);
    mopts.null_angle = fe.direct_aoa;
    mopts.scan_limit_deg = opts_.field_of_view_deg;
    mopts.reject_edge = true;
    fe.aoa = music_aoa(capture, array, 1, mopts).front();

    fe.direct_beam = beamform_nulled(capture, array, fe.direct_aoa, fe.aoa);
    const IqCapture echo_beam = beamform_nulled(capture, array, fe.aoa, fe.direct_aoa);
    fe.echo_clean = cancel_direct_path(echo_beam, fe.direct_beam);
    return fe;
}

SignalLevelResult SignalLevelReceiver::measure(const BistaticPair& pair, const TargetState& target,
                                               std::uint64_t seed) const {
    const FrontEnd fe = front_end(pair, target, slot_, seed);
    SignalLevelResult res;
    res.direct_aoa = fe.direct_aoa;
    res.echo_snr_db = bistatic_snr(params_, pair, target);
    res.measurement.tdoa_s = estimate_tdoa(fe.direct_beam, fe.echo_clean, reference_, opts_.tdoa);
    res.measurement.aoa_rad = fe.aoa;
    res.measurement.snr_db = res.echo_snr_db;
    res.measurement.mode = pair.mode;
    return res;
}

DopplerResult SignalLevelReceiver::measure_doppler(const BistaticPair& pair, const TargetState& target,
                                                   std::size_t pulses, std::uint64_t seed) const {
    const IqCapture train = pulse_train(slot_, pulses);
    const FrontEnd fe = front_end(pair, target, train, seed);
    DopplerResult res;
    res.aoa_rad = fe.aoa;
    res.map = range_doppler(fe.echo_clean, reference_);
    res.peak = find_peak(res.map);
    res.doppler_hz = res.peak.doppler_hz;
    res.range_rate = doppler_to_velocity(res.doppler_hz, params_.carrier_hz);
    return res;
}

}  // namespace bistatic
