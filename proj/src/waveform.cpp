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

#include "bistatic/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bistatic/errors.hpp"
#include "bistatic/rng.hpp"

namespace bistatic {

// --- WaveformConfig -------------------------------------------------------

WaveformConfig WaveformConfig::for_radar(const RadarParams& params) {
    WaveformConfig cfg;
    const double ratio = params.sample_rate_hz / (1024.0 * params.subcarrier_spacing_hz);
    const auto scale = static_cast<std::size_t>(std::lround(ratio));
    if (scale < 1 || std::abs(ratio - static_cast<double>(scale)) > 1e-9)
        throw ConfigError("sample rate must be an integer multiple of 1024 x subcarrier spacing");
    cfg.fft_size = 1024 * scale;
    cfg.occupied_subcarriers = 792 * scale;
    cfg.cp_samples = 72 * scale;
    cfg.subcarrier_spacing_hz = params.subcarrier_spacing_hz;
    return cfg;
}

std::size_t WaveformConfig::cp_length(std::size_t symbol) const {
    if (!simple_cp && symbol == 0) {
        // 16 extra samples per 2048-point FFT at every numerology.
        return cp_samples + static_cast<std::size_t>(std::lround(16.0 * static_cast<double>(fft_size) / 2048.0));
    }
    return cp_samples;
}

std::size_t WaveformConfig::symbol_start(std::size_t symbol) const {
    std::size_t start = 0;
    for (std::size_t s = 0; s < symbol; ++s) start += cp_length(s) + fft_size;
    return start;
}

std::size_t WaveformConfig::slot_samples() const {
    const std::size_t used = symbol_start(symbols_per_slot);
    if (!simple_cp) return used;
    const double nominal = sample_rate() * 1e-3 * 15e3 / subcarrier_spacing_hz;
    return std::max(used, static_cast<std::size_t>(std::lround(nominal)));
}

bool WaveformConfig::is_pilot(std::size_t symbol, std::size_t subcarrier) const {
    return symbol == dmrs_symbol_index &&
           static_cast<int>(subcarrier % 2) == pilot_comb_offset;
}

std::size_t WaveformConfig::bin_of(std::size_t subcarrier) const {
    const auto k = static_cast<long long>(subcarrier) - static_cast<long long>(occupied_subcarriers / 2);
    const auto n = static_cast<long long>(fft_size);
    return static_cast<std::size_t>(((k % n) + n) % n);
}

void WaveformConfig::validate() const {
    if (fft_size < 2) throw ConfigError("fft_size must be >= 2");
    if (occupied_subcarriers < 2 || occupied_subcarriers > fft_size)
        throw ConfigError("occupied_subcarriers must be in [2, fft_size]");
    if (occupied_subcarriers % 2 != 0) throw ConfigError("occupied_subcarriers must be even");
    if (symbols_per_slot < 1) throw ConfigError("symbols_per_slot must be >= 1");
    if (dmrs_symbol_index >= symbols_per_slot) throw ConfigError("dmrs_symbol_index out of range");
    if (pilot_comb_offset != 0 && pilot_comb_offset != 1)
        throw ConfigError("pilot_comb_offset must be 0 or 1");
    if (cp_samples >= fft_size) throw ConfigError("cp_samples must be < fft_size");
    if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier spacing must be positive");
}

// --- IqCapture ------------------------------------------------------------

IqCapture::IqCapture(std::size_t elements, std::size_t pulses, std::size_t samples_per_pulse,
                     double sample_rate_hz)
    : samples_(elements * pulses * samples_per_pulse),
      elements_(elements),
      pulses_(pulses),
      samples_per_pulse_(samples_per_pulse),
      sample_rate_hz_(sample_rate_hz) {
    if (elements == 0 || pulses == 0 || samples_per_pulse == 0)
        throw std::invalid_argument("IqCapture dimensions must be positive");
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
}

std::span<cd> IqCapture::element(std::size_t e) {
    return std::span<cd>(samples_).subspan(e * samples_per_element(), samples_per_element());
}

std::span<const cd> IqCapture::element(std::size_t e) const {
    return std::span<const cd>(samples_).subspan(e * samples_per_element(), samples_per_element());
}

std::span<cd> IqCapture::pulse(std::size_t e, std::size_t p) {
    return element(e).subspan(p * samples_per_pulse_, samples_per_pulse_);
}

std::span<const cd> IqCapture::pulse(std::size_t e, std::size_t p) const {
    return element(e).subspan(p * samples_per_pulse_, samples_per_pulse_);
}

double IqCapture::energy() const {
    double e = 0.0;
    for (const auto& v : samples_) e += std::norm(v);
    return e;
}

bool IqCapture::all_finite() const {
    return std::all_of(samples_.begin(), samples_.end(),
                       [](const cd& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

// --- generation -------------------------------------------------------------

namespace {

cd qpsk(Rng& rng) {
    const std::uint64_t bits = rng();
    const double s = 1.0 / std::sqrt(2.0);
    return {(bits & 1U) ? -s : s, (bits & 2U) ? -s : s};
}

}  // namespace

ResourceGrid build_resource_grid(const WaveformConfig& cfg, bool with_data) {
    cfg.validate();
    ResourceGrid grid;
    grid.symbols = cfg.symbols_per_slot;
    grid.subcarriers = cfg.occupied_subcarriers;
    grid.values.assign(grid.symbols * grid.subcarriers, cd{});

    // Separate streams so the pilots do not depend on the payload.
    Rng pilot_rng(substream(cfg.seed, 0x70696C6FULL));
    Rng data_rng(substream(cfg.data_seed, 0x64617461ULL));
    for (std::size_t s = 0; s < grid.symbols; ++s) {
        for (std::size_t k = 0; k < grid.subcarriers; ++k) {
            if (cfg.is_pilot(s, k)) {
                grid.at(s, k) = qpsk(pilot_rng);
            } else {
                const cd d = qpsk(data_rng);
                if (with_data) grid.at(s, k) = d;
            }
        }
    }
    return grid;
}

IqCapture modulate(const ResourceGrid& grid, const WaveformConfig& cfg) {
    cfg.validate();
    if (grid.symbols != cfg.symbols_per_slot || grid.subcarriers != cfg.occupied_subcarriers)
        throw std::invalid_argument("resource grid does not match the waveform config");

    const std::size_t n = cfg.fft_size;
    IqCapture out(1, 1, cfg.slot_samples(), cfg.sample_rate());
    auto samples = out.pulse(0, 0);
    const double scale = static_cast<double>(n) / std::sqrt(static_cast<double>(grid.subcarriers));

    CVector bins(n);
    for (std::size_t s = 0; s < grid.symbols; ++s) {
        std::fill(bins.begin(), bins.end(), cd{});
        for (std::size_t k = 0; k < grid.subcarriers; ++k) bins[cfg.bin_of(k)] = grid.at(s, k);
        CVector body = ifft(bins);
        for (auto& v : body) v *= scale;

        const std::size_t cp = cfg.cp_length(s);
        const std::size_t start = cfg.symbol_start(s);
        for (std::size_t i = 0; i < cp; ++i) samples[start + i] = body[n - cp + i];
        std::copy(body.begin(), body.end(), samples.begin() + static_cast<std::ptrdiff_t>(start + cp));
    }
    return out;
}

ResourceGrid demodulate(const IqCapture& slot, const WaveformConfig& cfg) {
    cfg.validate();
    if (slot.samples_per_pulse() < cfg.symbol_start(cfg.symbols_per_slot))
        throw std::invalid_argument("capture shorter than one slot");
    ResourceGrid grid;
    grid.symbols = cfg.symbols_per_slot;
    grid.subcarriers = cfg.occupied_subcarriers;
    grid.values.assign(grid.symbols * grid.subcarriers, cd{});

    const std::size_t n = cfg.fft_size;
    const double scale = std::sqrt(static_cast<double>(grid.subcarriers)) / static_cast<double>(n);
    auto samples = slot.pulse(0, 0);
    for (std::size_t s = 0; s < grid.symbols; ++s) {
        const std::size_t begin = cfg.symbol_start(s) + cfg.cp_length(s);
        CVector bins = fft(samples.subspan(begin, n));
        for (std::size_t k = 0; k < grid.subcarriers; ++k) grid.at(s, k) = bins[cfg.bin_of(k)] * scale;
    }
    return grid;
}

IqCapture generate_slot(const WaveformConfig& cfg) {
    return modulate(build_resource_grid(cfg, true), cfg);
}

IqCapture matched_reference(const WaveformConfig& cfg) {
    return modulate(build_resource_grid(cfg, false), cfg);
}

IqCapture pulse_train(const IqCapture& slot, std::size_t count) {
    if (count < 1) throw std::invalid_argument("pulse count must be >= 1");
    if (slot.pulses() != 1) throw std::invalid_argument("pulse_train expects a single-pulse capture");
    IqCapture out(slot.elements(), count, slot.samples_per_pulse(), slot.sample_rate_hz());
    for (std::size_t e = 0; e < slot.elements(); ++e) {
        auto src = slot.pulse(e, 0);
        for (std::size_t p = 0; p < count; ++p) std::copy(src.begin(), src.end(), out.pulse(e, p).begin());
    }
    return out;
}

// --- raw dump ---------------------------------------------------------------

namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xFFU) << 24) | ((v & 0xFF00U) << 8) | ((v >> 8) & 0xFF00U) | (v >> 24);
    }
    return v;
}

}  // namespace

void write_iq_dump(const std::string& path, const IqCapture& capture) {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + path);
    for (const auto& v : capture.data()) {
        for (float f : {static_cast<float>(v.real()), static_cast<float>(v.imag())}) {
            const std::uint32_t word = to_little_endian(std::bit_cast<std::uint32_t>(f));
            bin.write(reinterpret_cast<const char*>(&word), sizeof word);
        }
    }
    std::ofstream meta(path + ".meta");
    if (!meta) throw std::runtime_error("cannot open " + path + ".meta");
    meta.precision(17);
    meta << "format = cf32_le\n"
         << "layout = element,pulse,sample\n"
         << "sample_rate_hz = " << capture.sample_rate_hz() << "\n"
         << "elements = " << capture.elements() << "\n"
         << "pulses = " << capture.pulses() << "\n"
         << "samples_per_pulse = " << capture.samples_per_pulse() << "\n";
}

IqCapture read_iq_dump(const std::string& path) {
    std::ifstream meta(path + ".meta");
    if (!meta) throw std::runtime_error("cannot open " + path + ".meta");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    for (const char* key : {"sample_rate_hz", "elements", "pulses", "samples_per_pulse"})
        if (!kv.count(key)) throw std::runtime_error(path + ".meta: missing " + key);

    IqCapture cap(std::stoull(kv["elements"]), std::stoull(kv["pulses"]),
                  std::stoull(kv["samples_per_pulse"]), std::stod(kv["sample_rate_hz"]));
    std::ifstream bin(path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + path);
    for (auto& v : cap.data()) {
        std::uint32_t words[2];
        if (!bin.read(reinterpret_cast<char*>(words), sizeof words))
            throw std::runtime_error(path + ": truncated sample data");
        v = cd(std::bit_cast<float>(to_little_endian(words[0])),
               std::bit_cast<float>(to_little_endian(words[1])));
    }
    return cap;
}

}  // namespace bistatic
