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

#include "bistatic/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace bistatic {
namespace {

// FFTW planning is not thread-safe; execution through the new-array API is.
// Plans are cached per (length, direction) and never freed.
class PlanCache {
public:
    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_complex* a = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_complex* b = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(a);
        fftw_free(b);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

CVector transform(std::span<const cd> in, int sign) {
    CVector out(in.size());
    if (in.empty()) return out;
    CVector src(in.begin(), in.end());
    fftw_plan p = cache().get(static_cast<int>(in.size()), sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

CVector fft(std::span<const cd> in) { return transform(in, FFTW_FORWARD); }

CVector ifft(std::span<const cd> in) {
    CVector out = transform(in, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(in.size());
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace bistatic
