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

#include <stdexcept>
#include <string>

namespace bistatic {

/// Degenerate geometry: a target on top of a node, an empty baseline, a
/// non-positive range-solver denominator.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Receiver AoA inside the TX/RX collinearity exclusion band.
class ExcludedGeometryError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Ill-conditioned linear algebra; carries the offending condition estimate.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// A correlation or pseudo-spectrum peak could not be detected.
class DetectionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario file or CLI configuration problem. `line` is 0 when not tied to
/// a source line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace bistatic
