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

#include "bistatic/gdop.hpp"

#include <cmath>
#include <limits>

#include "bistatic/errors.hpp"

namespace bistatic {
namespace {

struct Ranges {
    double r1;
    double r2;
    double l;
};

Ranges ranges(const BistaticPair& pair, const TargetState& t) {
    Ranges r{distance(t.x, t.y, pair.n1.x, pair.n1.y), distance(t.x, t.y, pair.n2.x, pair.n2.y),
             pair.baseline()};
    if (r.r1 < 1e-9 || r.r2 < 1e-9) throw DomainError("target coincides with a node");
    if (r.l < 1e-9) throw DomainError("zero baseline");
    return r;
}

// Gradient of the receiver AoA with respect to the target. Equivalent to
// -1/(1+v^2) * 1/(y-y_i) and -v/(1+v^2) * 1/(y-y_i) with v = (x_i-x)/(y-y_i),
// written over R_i^2 so it stays finite where y == y_i.
Eigen::RowVector2d aoa_gradient(const NodePosition& rx, const TargetState& t) {
    const double dx = rx.x - t.x;
    const double dy = t.y - rx.y;
    const double r2 = dx * dx + dy * dy;
    return {-dy / r2, -dx / r2};
}

}  // namespace

Eigen::Matrix2d jacobian_c1(const BistaticPair& pair, const TargetState& target) {
    const Ranges r = ranges(pair, target);
    const double c = kSpeedOfLight;
    Eigen::Matrix2d c1;
    c1(0, 0) = ((target.x - pair.n1.x) / r.r1 + (target.x - pair.n2.x) / r.r2) / c;
    c1(0, 1) = ((target.y - pair.n1.y) / r.r1 + (target.y - pair.n2.y) / r.r2) / c;
    c1.row(1) = aoa_gradient(pair.receiver(), target);
    return c1;
}

Matrix24 jacobian_c2(const BistaticPair& pair, const TargetState& target) {
    const Ranges r = ranges(pair, target);
    const double c = kSpeedOfLight;
    const NodePosition& a = pair.n1;
    const NodePosition& b = pair.n2;

    Matrix24 c2 = Matrix24::Zero();
    c2(0, 0) = ((a.x - target.x) / r.r1 - (a.x - b.x) / r.l) / c;
    c2(0, 1) = ((a.y - target.y) / r.r1 - (a.y - b.y) / r.l) / c;
    c2(0, 2) = ((b.x - target.x) / r.r2 - (b.x - a.x) / r.l) / c;
    c2(0, 3) = ((b.y - target.y) / r.r2 - (b.y - a.y) / r.l) / c;

    // The AoA depends only on the receiving node: d(theta)/d(x_i) = -d(theta)/dx.
    const Eigen::RowVector2d g = aoa_gradient(pair.receiver(), target);
    const int col = pair.mode == Mode::Mode1 ? 2 : 0;
    c2(1, col) = -g(0);
    c2(1, col + 1) = -g(1);
    return c2;
}

Eigen::Matrix2d error_covariance(const Eigen::Matrix2d& c1, const Matrix24& c2,
                                 const MeasurementErrorModel& meas, const BistaticPair& pair) {
    const Eigen::Vector2d row_norm(c1.row(0).norm(), c1.row(1).norm());
    if (!(row_norm.minCoeff() > 0.0))
        throw NumericalError("C1 has a zero row", std::numeric_limits<double>::infinity());
    const Eigen::Matrix2d equilibrated = row_norm.cwiseInverse().asDiagonal() * c1;
    const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix2d>(equilibrated).singularValues();
    const double cond = sv(1) > 0.0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxConditionC1))
        throw NumericalError("C1 is ill-conditioned (cond = " + std::to_string(cond) + ")", cond);

    // (C1^T C1)^-1 C1^T via a QR least-squares solve on the equilibrated
    // rows: the TDOA and AoA rows differ by ~7 orders of magnitude, and
    // forming C1^T C1 directly would square the condition number.
    const Eigen::Matrix2d b =
        equilibrated.colPivHouseholderQr().solve(Eigen::Matrix2d(row_norm.cwiseInverse().asDiagonal()));

    Eigen::Matrix2d ez = Eigen::Matrix2d::Zero();
    ez(0, 0) = meas.sigma_tdoa * meas.sigma_tdoa;
    ez(1, 1) = meas.sigma_aoa * meas.sigma_aoa;

    Eigen::Vector4d ex;
    ex << pair.n1.sigma_x * pair.n1.sigma_x, pair.n1.sigma_y * pair.n1.sigma_y,
        pair.n2.sigma_x * pair.n2.sigma_x, pair.n2.sigma_y * pair.n2.sigma_y;

    const Eigen::Matrix2d inner = ez + c2 * ex.asDiagonal() * c2.transpose();
    const Eigen::Matrix2d p = b * inner * b.transpose();
    return 0.5 * (p + p.transpose());
}

GdopReport gdop(const BistaticPair& pair, const TargetState& target,
                const MeasurementErrorModel& meas) {
    GdopReport rep;
    rep.mode = pair.mode;
    rep.c1 = jacobian_c1(pair, target);
    rep.c2 = jacobian_c2(pair, target);
    rep.p_dp = error_covariance(rep.c1, rep.c2, meas, pair);
    rep.gdop = std::sqrt(std::max(0.0, rep.p_dp.trace()));
    return rep;
}

Mode select_mode(const BistaticPair& pair, const TargetState& target,
                 const MeasurementErrorModel& meas) {
    double g[2];
    bool ok[2];
    for (int i = 0; i < 2; ++i) {
        try {
            g[i] = gdop(pair.with_mode(i == 0 ? Mode::Mode1 : Mode::Mode2), target, meas).gdop;
            ok[i] = true;
        } catch (const DomainError&) {
            ok[i] = false;
        } catch (const NumericalError&) {
            ok[i] = false;
        }
    }
    if (!ok[0] && !ok[1]) throw DomainError("both modes are degenerate");
    if (!ok[0]) return Mode::Mode2;
    if (!ok[1]) return Mode::Mode1;
    const double tol = 1e-12 * std::max(g[0], g[1]);
    return g[1] < g[0] - tol ? Mode::Mode2 : Mode::Mode1;
}

}  // namespace bistatic
