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
#include <optional>

namespace bistatic {

/// Mode1: N1 transmits, N2 receives. Mode2: N2 transmits, N1 receives.
enum class Mode { Mode1, Mode2 };

inline Mode other(Mode m) { return m == Mode::Mode1 ? Mode::Mode2 : Mode::Mode1; }
inline int mode_number(Mode m) { return m == Mode::Mode1 ? 1 : 2; }

/// One bistatic observation taken at the receiving node of a pair.
struct Measurement {
    double tdoa_s = 0.0;
    double aoa_rad = 0.0;
    std::optional<double> doppler_hz;
    std::optional<double> snr_db;
    std::size_t pair_index = 0;
    Mode mode = Mode::Mode1;
};

/// One-sigma TDOA and AoA measurement errors.
struct MeasurementErrorModel {
    double sigma_tdoa = 0.0;  // s
    double sigma_aoa = 0.0;   // rad

    /// Gaussian sigma whose half-normal mean |e| equals the given value.
    static double sigma_from_mean_abs(double mean_abs);
    static MeasurementErrorModel from_mean_abs(double mean_abs_tdoa_s, double mean_abs_aoa_rad);

    void validate() const;
};

}  // namespace bistatic
