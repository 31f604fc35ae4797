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

#include <Eigen/Dense>

#include "bistatic/geometry.hpp"
#include "bistatic/measurement.hpp"

namespace bistatic {

using Matrix24 = Eigen::Matrix<double, 2, 4>;

/// Linearised error propagation for one (pair, mode, target).
struct GdopReport {
    Eigen::Matrix2d c1;    // d[TDOA, AoA] / d[x, y]
    Matrix24 c2;           // d[TDOA, AoA] / d[x1, y1, x2, y2]
    Eigen::Matrix2d p_dp;  // target position error covariance, m^2
    double gdop = 0.0;     // sqrt(trace(p_dp)), m
    Mode mode = Mode::Mode1;
};

/// Condition number (of the row-equilibrated C1) above which
/// `error_covariance` refuses.
inline constexpr double kMaxConditionC1 = 1e12;

Eigen::Matrix2d jacobian_c1(const BistaticPair& pair, const TargetState& target);

/// Columns ordered (x1, y1, x2, y2) regardless of mode.
Matrix24 jacobian_c2(const BistaticPair& pair, const TargetState& target);

/// P_dp = B {E[dZ dZ^T] + C2 E[dX dX^T] C2^T} B^T with B = (C1^T C1)^-1 C1^T.
Eigen::Matrix2d error_covariance(const Eigen::Matrix2d& c1, const Matrix24& c2,
                                 const MeasurementErrorModel& meas, const BistaticPair& pair);

GdopReport gdop(const BistaticPair& pair, const TargetState& target,
                const MeasurementErrorModel& meas);

/// Mode with the lower GDOP; ties (relative 1e-12) go to Mode1. Throws only
/// when both modes are degenerate.
Mode select_mode(const BistaticPair& pair, const TargetState& target,
                 const MeasurementErrorModel& meas);

}  // namespace bistatic
