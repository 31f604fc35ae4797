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

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "bistatic/errors.hpp"
#include "bistatic/gdop.hpp"
#include "bistatic/geometry.hpp"

using namespace bistatic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const BistaticPair kPair{{0.0, 0.0, 0.01, 0.01}, {25.0, 0.0, 0.01, 0.01}, Mode::Mode1};

MeasurementErrorModel scenario3_errors() {
    return MeasurementErrorModel::from_mean_abs(3.55e-9, deg_to_rad(0.16));
}

// Target at least 5 deg off the baseline line from both nodes, 1 m from each.
TargetState random_target(std::mt19937_64& rng, const BistaticPair& pair) {
    std::uniform_real_distribution<double> u(-60.0, 60.0);
    for (;;) {
        const TargetState t{u(rng), u(rng)};
        const double l = pair.baseline();
        const double bx = (pair.n2.x - pair.n1.x) / l, by = (pair.n2.y - pair.n1.y) / l;
        bool ok = true;
        for (const NodePosition& n : {pair.n1, pair.n2}) {
            const double dx = t.x - n.x, dy = t.y - n.y, r = std::hypot(dx, dy);
            if (r < 1.0 || std::abs(bx * dy - by * dx) / r < std::sin(deg_to_rad(5.0))) ok = false;
        }
        if (ok) return t;
    }
}

Eigen::Vector2d forward(const BistaticPair& pair, double x, double y) {
    const TargetState t{x, y};
    return {true_tdoa(pair, t), true_aoa(pair.receiver(), t)};
}

double row_rel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

TEST_CASE("sigma_from_mean_abs is the half-normal relation", "[gdop]") {
    CHECK_THAT(MeasurementErrorModel::sigma_from_mean_abs(1.0), WithinRel(std::sqrt(kPi / 2.0), 1e-15));
    // Empirical check of E|z| = sigma sqrt(2/pi).
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, MeasurementErrorModel::sigma_from_mean_abs(2.0));
    double sum = 0.0;
    for (int i = 0; i < 200000; ++i) sum += std::abs(n(rng));
    CHECK_THAT(sum / 200000.0, WithinRel(2.0, 0.01));
}

TEST_CASE("C1 and C2 match central differences", "[gdop][property]") {
    std::mt19937_64 rng(3);
    const double h = 1e-6;
    for (int i = 0; i < 1000; ++i) {
        const BistaticPair pair = kPair.with_mode(i % 2 ? Mode::Mode2 : Mode::Mode1);
        const TargetState t = random_target(rng, pair);
        Eigen::Matrix2d fd;
        fd.col(0) = (forward(pair, t.x + h, t.y) - forward(pair, t.x - h, t.y)) / (2 * h);
        fd.col(1) = (forward(pair, t.x, t.y + h) - forward(pair, t.x, t.y - h)) / (2 * h);
        const Eigen::Matrix2d c1 = jacobian_c1(pair, t);
        REQUIRE(row_rel(fd.row(0), c1.row(0)) < 1e-5);
        REQUIRE(row_rel(fd.row(1), c1.row(1)) < 1e-5);

        Matrix24 fd2;
        for (int c = 0; c < 4; ++c) {
            BistaticPair p = pair, m = pair;
            NodePosition& np = c < 2 ? p.n1 : p.n2;
            NodePosition& nm = c < 2 ? m.n1 : m.n2;
            (c % 2 == 0 ? np.x : np.y) += h;
            (c % 2 == 0 ? nm.x : nm.y) -= h;
            fd2.col(c) = (forward(p, t.x, t.y) - forward(m, t.x, t.y)) / (2 * h);
        }
        const Matrix24 c2 = jacobian_c2(pair, t);
        REQUIRE(row_rel(fd2.row(0), c2.row(0)) < 1e-5);
        REQUIRE(row_rel(fd2.row(1), c2.row(1)) < 1e-5);
    }
}

TEST_CASE("C1 special values", "[gdop]") {
    // Apex of a symmetric ellipse: dT/dx vanishes.
    const TargetState apex{12.5, 20.0};
    CHECK_THAT(jacobian_c1(kPair, apex)(0, 0), WithinAbs(0.0, 1e-20));
    // Far along the perpendicular bisector dT/dy -> 2/c.
    const TargetState far{12.5, 1e7};
    CHECK_THAT(jacobian_c1(kPair, far)(0, 1), WithinRel(2.0 / kSpeedOfLight, 1e-9));
}

TEST_CASE("C2 zero entries for the non-measuring node", "[gdop]") {
    const TargetState t{5.0, 17.0};
    const Matrix24 m1 = jacobian_c2(kPair, t);
    CHECK(m1(1, 0) == 0.0);
    CHECK(m1(1, 1) == 0.0);
    const Matrix24 m2 = jacobian_c2(kPair.with_mode(Mode::Mode2), t);
    CHECK(m2(1, 2) == 0.0);
    CHECK(m2(1, 3) == 0.0);
    // The measuring node's AoA derivative is minus the target derivative.
    const Eigen::Matrix2d c1 = jacobian_c1(kPair, t);
    CHECK_THAT(m1(1, 2), WithinRel(-c1(1, 0), 1e-12));
    CHECK_THAT(m1(1, 3), WithinRel(-c1(1, 1), 1e-12));
}

TEST_CASE("C2 is translation invariant", "[gdop][property]") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> shift(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const TargetState t = random_target(rng, kPair);
        const double dx = shift(rng), dy = shift(rng);
        BistaticPair moved = kPair;
        moved.n1.x += dx;
        moved.n1.y += dy;
        moved.n2.x += dx;
        moved.n2.y += dy;
        const Matrix24 a = jacobian_c2(kPair, t);
        const Matrix24 b = jacobian_c2(moved, TargetState{t.x + dx, t.y + dy});
        REQUIRE((a - b).norm() <= 1e-9 * a.norm());
    }
}

TEST_CASE("degenerate geometry is refused", "[gdop]") {
    CHECK_THROWS_AS(jacobian_c1(kPair, TargetState{0.0, 0.0}), DomainError);
    // Between the nodes the TDOA gradient vanishes and C1 is singular.
    CHECK_THROWS_AS(gdop(kPair, TargetState{12.0, 0.0}, scenario3_errors()), NumericalError);
    // On the extended baseline it is not.
    CHECK_NOTHROW(gdop(kPair, TargetState{40.0, 0.0}, scenario3_errors()));
}

TEST_CASE("error_covariance basic algebra", "[gdop]") {
    const TargetState t{8.0, 14.0};
    const Eigen::Matrix2d c1 = jacobian_c1(kPair, t);
    const Matrix24 c2 = jacobian_c2(kPair, t);
    BistaticPair quiet = kPair;
    quiet.n1.sigma_x = quiet.n1.sigma_y = quiet.n2.sigma_x = quiet.n2.sigma_y = 0.0;
    CHECK(error_covariance(c1, c2, MeasurementErrorModel{}, quiet).norm() == 0.0);
    CHECK(gdop(quiet, t, MeasurementErrorModel{}).gdop == 0.0);

    // Scaling every sigma by s scales P_dp by s^2.
    const MeasurementErrorModel err = scenario3_errors();
    const Eigen::Matrix2d p = error_covariance(c1, c2, err, kPair);
    const double s = 3.0;
    BistaticPair scaled = kPair;
    for (NodePosition* n : {&scaled.n1, &scaled.n2}) {
        n->sigma_x *= s;
        n->sigma_y *= s;
    }
    const Eigen::Matrix2d ps =
        error_covariance(c1, c2, MeasurementErrorModel{s * err.sigma_tdoa, s * err.sigma_aoa}, scaled);
    CHECK((ps - s * s * p).norm() <= 1e-12 * ps.norm());

    // Square C1: the pseudo-inverse form equals the plain inverse.
    Eigen::Matrix4d ex = Eigen::Matrix4d::Identity() * 1e-4;
    const Eigen::Matrix2d ez = Eigen::Vector2d(err.sigma_tdoa * err.sigma_tdoa, err.sigma_aoa * err.sigma_aoa).asDiagonal();
    const Eigen::Matrix2d b = c1.inverse();
    const Eigen::Matrix2d expected = b * (ez + c2 * ex * c2.transpose()) * b.transpose();
    CHECK((p - expected).norm() <= 1e-10 * expected.norm());
}

TEST_CASE("P_dp is symmetric PSD and gdop is its root trace", "[gdop][property]") {
    std::mt19937_64 rng(21);
    const MeasurementErrorModel err = scenario3_errors();
    for (int i = 0; i < 1000; ++i) {
        const BistaticPair pair = kPair.with_mode(i % 2 ? Mode::Mode2 : Mode::Mode1);
        const GdopReport r = gdop(pair, random_target(rng, pair), err);
        REQUIRE(std::abs(r.p_dp(0, 1) - r.p_dp(1, 0)) <= 1e-12 * r.p_dp.norm());
        const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(r.p_dp).eigenvalues();
        REQUIRE(ev.minCoeff() >= -1e-12 * r.p_dp.trace());
        REQUIRE_THAT(r.gdop, WithinRel(std::sqrt(r.p_dp.trace()), 1e-14));
        REQUIRE(r.mode == pair.mode);
    }
}

TEST_CASE("gdop is invariant under translation and rotation", "[gdop][property]") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-50.0, 50.0), ang(-kPi, kPi);
    const MeasurementErrorModel err = scenario3_errors();
    for (int i = 0; i < 300; ++i) {
        const TargetState t = random_target(rng, kPair);
        const double phi = ang(rng), dx = u(rng), dy = u(rng);
        auto move = [&](double x, double y) {
            return std::pair{std::cos(phi) * x - std::sin(phi) * y + dx, std::sin(phi) * x + std::cos(phi) * y + dy};
        };
        BistaticPair moved = kPair;
        std::tie(moved.n1.x, moved.n1.y) = move(kPair.n1.x, kPair.n1.y);
        std::tie(moved.n2.x, moved.n2.y) = move(kPair.n2.x, kPair.n2.y);
        const auto [tx, ty] = move(t.x, t.y);
        for (Mode m : {Mode::Mode1, Mode::Mode2}) {
            REQUIRE_THAT(gdop(moved.with_mode(m), TargetState{tx, ty}, err).gdop,
                         WithinRel(gdop(kPair.with_mode(m), t, err).gdop, 1e-9));
        }
    }
}

TEST_CASE("mode swap symmetry", "[gdop][property]") {
    std::mt19937_64 rng(23);
    const MeasurementErrorModel err = scenario3_errors();
    BistaticPair swapped = kPair;
    std::swap(swapped.n1, swapped.n2);
    for (int i = 0; i < 300; ++i) {
        const TargetState t = random_target(rng, kPair);
        REQUIRE_THAT(gdop(kPair, t, err).gdop,
                     WithinRel(gdop(swapped.with_mode(Mode::Mode2), t, err).gdop, 1e-12));
        // Mirror about the perpendicular bisector with modes swapped.
        const TargetState mirror{25.0 - t.x, t.y};
        REQUIRE_THAT(gdop(kPair, t, err).gdop,
                     WithinRel(gdop(kPair.with_mode(Mode::Mode2), mirror, err).gdop, 1e-9));
    }
}

TEST_CASE("gdop varies along the iso-range contour", "[gdop]") {
    const MeasurementErrorModel err = scenario3_errors();
    double lo = INFINITY, hi = 0.0;
    for (double th = -175.0; th < 180.0; th += 10.0) {
        if (in_collinear_band(kPair, deg_to_rad(th), 5.0)) continue;
        const double g = gdop(kPair, iso_range_target(kPair, 50.0, deg_to_rad(th)), err).gdop;
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    CHECK(hi / lo > 1.1);
}

TEST_CASE("select_mode", "[gdop]") {
    const MeasurementErrorModel err = scenario3_errors();
    // Symmetric apex: tie goes to mode 1.
    CHECK(select_mode(kPair, TargetState{12.5, 21.65}, err) == Mode::Mode1);
    std::mt19937_64 rng(24);
    for (int i = 0; i < 500; ++i) {
        const TargetState t = random_target(rng, kPair);
        const double g1 = gdop(kPair, t, err).gdop;
        const double g2 = gdop(kPair.with_mode(Mode::Mode2), t, err).gdop;
        const Mode m = select_mode(kPair, t, err);
        if (std::abs(g1 - g2) > 1e-9 * g1) REQUIRE(m == (g1 < g2 ? Mode::Mode1 : Mode::Mode2));
    }
    CHECK_THROWS(select_mode(kPair, TargetState{12.0, 0.0}, err));
}

TEST_CASE("P_dp matches Monte-Carlo covariance of locate_bistatic", "[gdop][montecarlo]") {
    // Small errors keep the linearisation exact to well under 10 %.
    const MeasurementErrorModel err{0.1e-9, deg_to_rad(0.05)};
    BistaticPair pair = kPair;
    for (NodePosition* n : {&pair.n1, &pair.n2}) n->sigma_x = n->sigma_y = 1e-3;
    std::mt19937_64 rng(25);
    std::normal_distribution<double> z;

    for (const TargetState& t : {TargetState{5.0, 18.0}, TargetState{30.0, -12.0}, TargetState{-4.0, 9.0}}) {
        for (Mode mode : {Mode::Mode1, Mode::Mode2}) {
            const BistaticPair nominal = pair.with_mode(mode);
            const GdopReport rep = gdop(nominal, t, err);
            const int n = 100000;
            Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
            Eigen::Vector2d mean = Eigen::Vector2d::Zero();
            std::vector<Eigen::Vector2d> samples(n);
            for (int i = 0; i < n; ++i) {
                BistaticPair truth = nominal;
                truth.n1.x += 1e-3 * z(rng);
                truth.n1.y += 1e-3 * z(rng);
                truth.n2.x += 1e-3 * z(rng);
                truth.n2.y += 1e-3 * z(rng);
                Measurement m;
                m.mode = mode;
                m.tdoa_s = true_tdoa(truth, t) + err.sigma_tdoa * z(rng);
                m.aoa_rad = true_aoa(truth.receiver(), t) + err.sigma_aoa * z(rng);
                const Point2 p = locate_bistatic(nominal, m);
                samples[i] = {p.x - t.x, p.y - t.y};
                mean += samples[i];
            }
            mean /= n;
            for (const auto& s : samples) acc += (s - mean) * (s - mean).transpose();
            acc /= n - 1;
            const double scale = std::sqrt(rep.p_dp(0, 0) * rep.p_dp(1, 1));
            for (int r = 0; r < 2; ++r)
                CHECK_THAT(acc(r, r), WithinRel(rep.p_dp(r, r), 0.1));
            // Off-diagonal judged on the diagonal scale: it may be near zero.
            CHECK(std::abs(acc(0, 1) - rep.p_dp(0, 1)) <= 0.1 * scale);
        }
    }
}
