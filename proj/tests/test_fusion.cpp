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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bistatic/errors.hpp"
#include "bistatic/estimation.hpp"
#include "bistatic/fusion.hpp"
#include "bistatic/gdop.hpp"

using namespace bistatic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// One transmitter at the origin serving three receivers.
std::vector<BistaticPair> star_pairs() {
    const NodePosition tx{0.0, 0.0};
    return {BistaticPair{tx, {25.0, 0.0}, Mode::Mode1}, BistaticPair{tx, {12.0, 22.0}, Mode::Mode1},
            BistaticPair{tx, {-15.0, 18.0}, Mode::Mode1}};
}

Measurement exact(const BistaticPair& pair, const TargetState& t, std::size_t index) {
    Measurement m;
    m.tdoa_s = true_tdoa(pair, t);
    m.aoa_rad = true_aoa(pair.receiver(), t);
    m.mode = pair.mode;
    m.pair_index = index;
    return m;
}

FusionProblem exact_problem(const std::vector<BistaticPair>& pairs, const TargetState& t) {
    std::vector<Measurement> ms;
    for (std::size_t i = 0; i < pairs.size(); ++i) ms.push_back(exact(pairs[i], t, i));
    return FusionProblem::unweighted(pairs, ms);
}

TargetState random_target(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> r(6.0, 40.0), phi(-kPi, kPi);
    const double rho = r(rng), a = phi(rng);
    TargetState t;
    t.x = 5.0 + rho * std::cos(a);
    t.y = 8.0 + rho * std::sin(a);
    return t;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("residual Jacobian matches central differences", "[fusion]") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto pairs = star_pairs();
    for (int trial = 0; trial < 200; ++trial) {
        const TargetState t = random_target(rng);
        FusionProblem p = exact_problem(pairs, t);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p.measurements[i].tdoa_s += 1e-9 * noise(rng);
            p.measurements[i].aoa_rad += 0.01 * noise(rng);
            p.a[i] = 0.5 + i;
            p.b[i] = 2.0 + i;
            p.w[i] = 0.3 + 0.4 * i;
        }
        Eigen::MatrixXd j;
        fusion_residuals(t.x, t.y, p, &j);
        const double h = 1e-6;
        const Eigen::VectorXd dx =
            (fusion_residuals(t.x + h, t.y, p) - fusion_residuals(t.x - h, t.y, p)) / (2.0 * h);
        const Eigen::VectorXd dy =
            (fusion_residuals(t.x, t.y + h, p) - fusion_residuals(t.x, t.y - h, p)) / (2.0 * h);
        for (Eigen::Index k = 0; k < j.rows(); ++k) {
            REQUIRE_THAT(j(k, 0), WithinAbs(dx(k), 1e-6 * (1.0 + std::abs(dx(k)))));
            REQUIRE_THAT(j(k, 1), WithinAbs(dy(k), 1e-6 * (1.0 + std::abs(dy(k)))));
        }
    }
}

TEST_CASE("loss against an independent evaluation", "[fusion]") {
    const auto pairs = star_pairs();
    TargetState t;
    t.x = 10.0;
    t.y = 15.0;
    FusionProblem p = exact_problem(pairs, t);
    CHECK(wls_loss(t.x, t.y, p) < 1e-20);

    p.measurements[1].tdoa_s += 2e-9;
    p.measurements[2].aoa_rad += 0.1;
    p.a = {1.0, 0.5, 1.0};
    p.b = {1.0, 1.0, 3.0};
    p.w = {1.0, 2.0, 0.5};
    const double expected = 2.0 * std::pow(0.5 * kSpeedOfLight * 2e-9, 2) + 0.5 * std::pow(3.0 * 0.1 / (2.0 * kPi), 2);
    CHECK_THAT(wls_loss(t.x, t.y, p), WithinRel(expected, 1e-9));

    FusionProblem doubled = p;
    for (double& w : doubled.w) w *= 2.0;
    CHECK_THAT(wls_loss(3.0, -4.0, doubled), WithinRel(2.0 * wls_loss(3.0, -4.0, p), 1e-12));

    // AoA residual wraps: a full turn on the measurement changes nothing.
    FusionProblem turned = p;
    turned.measurements[0].aoa_rad += 2.0 * kPi;
    turned.measurements[2].aoa_rad -= 4.0 * kPi;
    CHECK_THAT(wls_loss(3.0, -4.0, turned), WithinRel(wls_loss(3.0, -4.0, p), 1e-9));
}

TEST_CASE("problem validation", "[fusion]") {
    const auto pairs = star_pairs();
    TargetState t;
    t.x = 10.0;
    t.y = 15.0;
    FusionProblem p = exact_problem(pairs, t);
    CHECK_NOTHROW(p.validate());
    FusionProblem bad = p;
    bad.w.pop_back();
    CHECK_THROWS(bad.validate());
    bad = p;
    bad.a[0] = -1.0;
    CHECK_THROWS(bad.validate());
    bad = p;
    bad.measurements[0].mode = Mode::Mode2;
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(FusionProblem{}.validate());
    CHECK_THROWS_AS(fusion_residuals(0.0, 0.0, p), DomainError);
    SolverOptions o;
    o.max_iterations = 0;
    CHECK_THROWS(o.validate());
}

TEST_CASE("compute_weights", "[fusion]") {
    const MeasurementErrorModel err = MeasurementErrorModel::from_mean_abs(3.55e-9, deg_to_rad(0.3));
    // Two mirror-image pairs are equally good at a point on the mirror axis.
    const NodePosition tx{0.0, 0.0};
    const std::vector<BistaticPair> mirror{BistaticPair{tx, {20.0, 0.0}, Mode::Mode1},
                                           BistaticPair{tx, {-20.0, 0.0}, Mode::Mode1}};
    TargetState t;
    t.y = 30.0;
    const std::vector<double> w = compute_weights(exact_problem(mirror, t), {0.0, 30.0}, err);
    CHECK_THAT(w[0], WithinRel(1.0, 1e-9));
    CHECK_THAT(w[1], WithinRel(1.0, 1e-9));

    // Weights are inversely proportional to GDOP and sum to N.
    const auto pairs = star_pairs();
    t.x = 20.0;
    t.y = -10.0;
    const FusionProblem p = exact_problem(pairs, t);
    const std::vector<double> v = compute_weights(p, {t.x, t.y}, err);
    double sum = 0.0;
    for (double x : v) sum += x;
    CHECK_THAT(sum, WithinRel(3.0, 1e-12));
    const double g0 = gdop(pairs[0], t, err).gdop, g2 = gdop(pairs[2], t, err).gdop;
    CHECK_THAT(v[0] / v[2], WithinRel(g2 / g0, 1e-9));

    // A degenerate pair gets zero weight; all degenerate throws.
    const std::vector<BistaticPair> one{BistaticPair{tx, {20.0, 0.0}, Mode::Mode1}};
    const FusionProblem single = exact_problem(one, t);
    CHECK_THROWS_AS(compute_weights(single, {10.0, 0.0}, err), NumericalError);
    std::vector<BistaticPair> mixed = one;
    mixed.push_back(BistaticPair{tx, {0.0, 20.0}, Mode::Mode1});
    const std::vector<double> m = compute_weights(exact_problem(mixed, t), {10.0, 0.0}, err);
    CHECK(m[0] == 0.0);
    CHECK_THAT(m[1], WithinRel(2.0, 1e-12));
}

TEST_CASE("exact measurements converge to the truth", "[fusion][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> offset(-3.0, 3.0);
    const auto pairs = star_pairs();
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const TargetState t = random_target(rng);
        const FusionProblem p = exact_problem(pairs, t);
        SolverOptions o;
        o.initial_guess = Point2{t.x + offset(rng), t.y + offset(rng)};
        SolveResult r;
        try {
            r = solve_multistatic(p, o);
        } catch (const DomainError&) {
            continue;
        }
        ++checked;
        REQUIRE(r.loss <= r.initial_loss);
        REQUIRE(std::hypot(r.x - t.x, r.y - t.y) < 1e-3);
        // Default start: best single-pair solution, already exact.
        const SolveResult d = solve_multistatic(p);
        REQUIRE(std::hypot(d.x - t.x, d.y - t.y) < 1e-6);
    }
    CHECK(checked > 490);
}

TEST_CASE("one pair reduces to the closed-form bistatic fix", "[fusion][property]") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 1.0);
    const BistaticPair pair = star_pairs()[0];
    const MeasurementErrorModel err{2e-9, deg_to_rad(0.5)};
    const RadarParams params = RadarParams::preset(100);
    ModelMeasureOptions raw;
    raw.quantize = false;
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const TargetState t = random_target(rng);
        if (true_tdoa(pair, t) < 1e-9) continue;
        const Measurement m = model_based_measure(pair, t, params, err, noise(rng), noise(rng), raw);
        Point2 closed;
        try {
            closed = locate_bistatic(pair, m);
        } catch (const DomainError&) {
            continue;
        }
        const SolveResult r = solve_multistatic(FusionProblem::unweighted({pair}, {m}));
        REQUIRE(std::hypot(r.x - closed.x, r.y - closed.y) < 1e-6);
        ++compared;
    }
    CHECK(compared > 250);
}

TEST_CASE("solver loss never exceeds the starting loss", "[fusion][property]") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> guess(-50.0, 50.0);
    const auto pairs = star_pairs();
    for (int trial = 0; trial < 300; ++trial) {
        const TargetState t = random_target(rng);
        FusionProblem p = exact_problem(pairs, t);
        for (auto& m : p.measurements) {
            m.tdoa_s = std::max(0.0, m.tdoa_s + 3e-9 * noise(rng));
            m.aoa_rad += 0.02 * noise(rng);
        }
        SolverOptions o;
        o.initial_guess = Point2{guess(rng), guess(rng)};
        try {
            const SolveResult r = solve_multistatic(p, o);
            REQUIRE(r.loss <= r.initial_loss);
            REQUIRE(std::isfinite(r.loss));
        } catch (const DomainError&) {
        }
    }
}

TEST_CASE("uniform TDOA scaling leaves the TDOA-only argmin in place", "[fusion][property]") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto pairs = star_pairs();
    for (int trial = 0; trial < 100; ++trial) {
        const TargetState t = random_target(rng);
        FusionProblem p = exact_problem(pairs, t);
        for (auto& m : p.measurements) m.tdoa_s = std::max(0.0, m.tdoa_s + 1e-9 * noise(rng));
        p.b.assign(3, 0.0);
        SolverOptions o;
        o.initial_guess = Point2{t.x, t.y};
        const SolveResult r1 = solve_multistatic(p, o);
        for (double& a : p.a) a *= 7.0;
        const SolveResult r7 = solve_multistatic(p, o);
        REQUIRE(std::hypot(r1.x - r7.x, r1.y - r7.y) < 1e-5);
    }
}

TEST_CASE("GDOP weights help when one pair has poor geometry", "[fusion][montecarlo]") {
    const NodePosition tx{0.0, 0.0};
    // The third receiver puts the target almost on its baseline.
    const std::vector<BistaticPair> pairs{BistaticPair{tx, {0.0, 25.0}, Mode::Mode1},
                                          BistaticPair{tx, {-20.0, 5.0}, Mode::Mode1},
                                          BistaticPair{tx, {30.0, 20.5}, Mode::Mode1}};
    const RadarParams params = RadarParams::preset(100);
    const MeasurementErrorModel err = MeasurementErrorModel::from_mean_abs(3.55e-9, deg_to_rad(0.3));
    TargetState t;
    t.x = 15.0;
    t.y = 10.0;
    REQUIRE(gdop(pairs[2], t, err).gdop > 1000.0 * gdop(pairs[0], t, err).gdop);
    ModelMeasureOptions raw;
    raw.quantize = false;
    std::vector<double> weighted, unweighted;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        std::vector<Measurement> ms;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            ms.push_back(model_based_measure(pairs[i], t, params, err, s * 16 + i, raw));
        FusionProblem p = FusionProblem::unweighted(pairs, ms);
        const SolveResult r = solve_multistatic(p);
        unweighted.push_back(std::hypot(r.x - t.x, r.y - t.y));
        p.w = compute_weights(p, {r.x, r.y}, err);
        const SolveResult rw = solve_multistatic(p);
        weighted.push_back(std::hypot(rw.x - t.x, rw.y - t.y));
    }
    CHECK(median(weighted) <= median(unweighted));
}

TEST_CASE("fusing pairs beats a single pair", "[fusion][montecarlo]") {
    const auto pairs = star_pairs();
    const RadarParams params = RadarParams::preset(100);
    const MeasurementErrorModel err = MeasurementErrorModel::from_mean_abs(3.55e-9, deg_to_rad(0.3));
    ModelMeasureOptions raw;
    raw.quantize = false;
    TargetState t;
    t.x = 8.0;
    t.y = 14.0;
    std::vector<double> fused, single;
    for (std::uint64_t s = 0; s < 400; ++s) {
        std::vector<Measurement> ms;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            ms.push_back(model_based_measure(pairs[i], t, params, err, s * 16 + i, raw));
        // Residuals scaled by their own sigma.
        FusionProblem p = FusionProblem::unweighted(pairs, ms);
        p.a.assign(3, 1.0 / (kSpeedOfLight * err.sigma_tdoa));
        p.b.assign(3, 2.0 * kPi / err.sigma_aoa);
        const SolveResult r = solve_multistatic(p);
        fused.push_back(std::hypot(r.x - t.x, r.y - t.y));
        try {
            const Point2 q = locate_bistatic(pairs[0], ms[0]);
            single.push_back(std::hypot(q.x - t.x, q.y - t.y));
        } catch (const DomainError&) {
            single.push_back(1e9);
        }
    }
    CHECK(median(fused) < median(single));
}
