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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bistatic/fft.hpp"
#include "bistatic/geometry.hpp"

namespace bistatic {

/// One slot of CP-OFDM with a single comb-2 pilot symbol.
struct WaveformConfig {
    std::size_t fft_size = 1024;
    std::size_t occupied_subcarriers = 792;  // 66 resource blocks
    double subcarrier_spacing_hz = 120e3;
    std::size_t cp_samples = 72;
    std::size_t dmrs_symbol_index = 2;
    std::size_t symbols_per_slot = 14;
    int pilot_comb_offset = 0;
    std::uint64_t seed = 1;       // pilot sequence
    std::uint64_t data_seed = 2;  // payload on the remaining resource elements
    /// Uniform CP on every symbol, slot padded with trailing zeros up to the
    /// nominal slot duration. When false the first symbol carries the
    /// extended CP of a half-subframe boundary and no padding is added.
    bool simple_cp = true;

    /// Waveform scaled from the 100 MHz numerology to the radar's sample rate.
    static WaveformConfig for_radar(const RadarParams& params);

    double sample_rate() const { return static_cast<double>(fft_size) * subcarrier_spacing_hz; }
    std::size_t cp_length(std::size_t symbol) const;
    std::size_t symbol_start(std::size_t symbol) const;  // first CP sample
    std::size_t slot_samples() const;                    // samples per pulse
    double slot_duration() const { return static_cast<double>(slot_samples()) / sample_rate(); }
    bool is_pilot(std::size_t symbol, std::size_t subcarrier) const;
    /// DFT bin carrying occupied subcarrier `j`.
    std::size_t bin_of(std::size_t subcarrier) const;
    void validate() const;
};

/// Complex baseband samples, laid out element-major then pulse then sample.
class IqCapture {
public:
    IqCapture() = default;
    IqCapture(std::size_t elements, std::size_t pulses, std::size_t samples_per_pulse,
              double sample_rate_hz);

    std::size_t elements() const { return elements_; }
    std::size_t pulses() const { return pulses_; }
    std::size_t samples_per_pulse() const { return samples_per_pulse_; }
    double sample_rate_hz() const { return sample_rate_hz_; }
    std::size_t samples_per_element() const { return pulses_ * samples_per_pulse_; }

    std::span<cd> element(std::size_t e);
    std::span<const cd> element(std::size_t e) const;
    std::span<cd> pulse(std::size_t e, std::size_t p);
    std::span<const cd> pulse(std::size_t e, std::size_t p) const;

    std::vector<cd>& data() { return samples_; }
    const std::vector<cd>& data() const { return samples_; }

    double energy() const;
    bool all_finite() const;

private:
    std::vector<cd> samples_;
    std::size_t elements_ = 0;
    std::size_t pulses_ = 0;
    std::size_t samples_per_pulse_ = 0;
    double sample_rate_hz_ = 0.0;
};

/// Resource grid, symbols x occupied subcarriers.
struct ResourceGrid {
    std::size_t symbols = 0;
    std::size_t subcarriers = 0;
    std::vector<cd> values;

    cd& at(std::size_t s, std::size_t k) { return values[s * subcarriers + k]; }
    const cd& at(std::size_t s, std::size_t k) const { return values[s * subcarriers + k]; }
};

/// Grid with seeded QPSK pilots on the comb of the pilot symbol and, when
/// `with_data`, seeded QPSK on every other resource element.
ResourceGrid build_resource_grid(const WaveformConfig& cfg, bool with_data);

/// CP-OFDM modulation of a grid into one pulse. Unit average power per
/// sample when every occupied resource element has unit power.
IqCapture modulate(const ResourceGrid& grid, const WaveformConfig& cfg);

/// Removes CP and transforms every symbol of the first pulse of element 0.
ResourceGrid demodulate(const IqCapture& slot, const WaveformConfig& cfg);

IqCapture generate_slot(const WaveformConfig& cfg);

/// Pilots only; every non-pilot resource element is zero.
IqCapture matched_reference(const WaveformConfig& cfg);

IqCapture pulse_train(const IqCapture& slot, std::size_t count);

/// Interleaved little-endian float32 I/Q plus a `<path>.meta` text sidecar.
void write_iq_dump(const std::string& path, const IqCapture& capture);
IqCapture read_iq_dump(const std::string& path);

}  // namespace bistatic
