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

#include <complex>
#include <span>
#include <vector>

namespace bistatic {

using cd = std::complex<double>;
using CVector = std::vector<cd>;

/// Unnormalised forward DFT (exp(-j...)), any length. Thread-safe.
CVector fft(std::span<const cd> in);

/// Inverse DFT scaled by 1/N, so ifft(fft(x)) == x.
CVector ifft(std::span<const cd> in);

/// Signed frequency index of DFT bin k for length n: 0..n/2-1, -n/2..-1.
inline double signed_bin(std::size_t k, std::size_t n) {
    return k < (n + 1) / 2 ? static_cast<double>(k)
                           : static_cast<double>(k) - static_cast<double>(n);
}

}  // namespace bistatic
