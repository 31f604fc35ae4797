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

#include "bistatic/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bistatic/errors.hpp"
#include "bistatic/gdop.hpp"

namespace bistatic {

FusionProblem FusionProblem::unweighted(std::vector<BistaticPair> pairs,
                                        std::vector<Measurement> measurements) {
    FusionProblem p;
    const std::size_t n = pairs.size();
    p.pairs = std::move(pairs);
    p.measurements = std::move(measurements);
    p.a.assign(n, 1.0);
    p.b.assign(n, 1.0);
    p.w.assign(n, 1.0);
    return p;
}

void FusionProblem::validate() const {
    const std::size_t n = pairs.size();
    if (n == 0) throw std::invalid_argument("fusion problem has no pairs");
    if (measurements.size() != n || a.size() != n || b.size() != n || w.size() != n)
        throw std::invalid_argument("fusion problem lists differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(a[i] >= 0.0) || !(b[i] >= 0.0) || !(w[i] >= 0.0))
            throw std::invalid_argument("fusion weights must be non-negative");
        if (measurements[i].mode != pairs[i].mode)
            throw std::invalid_argument("measurement mode differs from pair mode");
    }
}

void SolverOptions::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(initial_damping > 0.0))
        throw std::invalid_argument("solver tolerances must be positive");
}

Eigen::VectorXd fusion_residuals(double x, double y, const FusionProblem& problem,
                                 Eigen::MatrixXd* jacobian) {
    const std::size_t n = problem.size();
    Eigen::VectorXd r(static_cast<Eigen::Index>(2 * n));
    if (jacobian) jacobian->resize(static_cast<Eigen::Index>(2 * n), 2);
    const double inv_2pi = 1.0 / (2.0 * kPi);

    for (std::size_t i = 0; i < n; ++i) {
        const BistaticPair& pair = problem.pairs[i];
        const NodePosition& tx = pair.transmitter();
        const NodePosition& rx = pair.receiver();
        const double r1 = distance(x, y, tx.x, tx.y);
        const double r2 = distance(x, y, rx.x, rx.y);
        if (r1 < 1e-9 || r2 < 1e-9) throw DomainError("evaluation point coincides with a node");

        const double sw = std::sqrt(problem.w[i]);
        const double ka = sw * problem.a[i];
        const double kb = sw * problem.b[i] * inv_2pi;
        const Measurement& m = problem.measurements[i];

        const double range_sum = r1 + r2 - pair.baseline();
        const double u = rx.x - x;
        const double v = y - rx.y;
        const double theta = std::atan2(u, v);

        const auto row = static_cast<Eigen::Index>(2 * i);
        r(row) = ka * (kSpeedOfLight * m.tdoa_s - range_sum);
        r(row + 1) = kb * wrap_angle(m.aoa_rad - theta);

        if (jacobian) {
            const double r2sq = r2 * r2;
            (*jacobian)(row, 0) = -ka * ((x - tx.x) / r1 + (x - rx.x) / r2);
            (*jacobian)(row, 1) = -ka * ((y - tx.y) / r1 + (y - rx.y) / r2);
            (*jacobian)(row + 1, 0) = kb * v / r2sq;
            (*jacobian)(row + 1, 1) = kb * u / r2sq;
        }
    }
    return r;
}

double wls_loss(double x, double y, const FusionProblem& problem) {
    problem.validate();
    return fusion_residuals(x, y, problem).squaredNorm();
}

std::vector<double> compute_weights(const FusionProblem& problem, const Point2& rough,
                                    const MeasurementErrorModel& err) {
    problem.validate();
    const std::size_t n = problem.size();
    std::vector<double> w(n, 0.0);
    TargetState t;
    t.x = rough.x;
    t.y = rough.y;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const double g = gdop(problem.pairs[i], t, err).gdop;
            if (std::isfinite(g) && g > 0.0) w[i] = 1.0 / g;
        } catch (const DomainError&) {
        } catch (const NumericalError&) {
        }
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sum > 0.0)) throw NumericalError("every pair is degenerate at the rough position", 0.0);
    for (double& v : w) v *= static_cast<double>(n) / sum;
    return w;
}

namespace {

Point2 default_initial_guess(const FusionProblem& problem) {
    std::vector<std::size_t> order(problem.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return problem.w[i] > problem.w[j]; });
    for (std::size_t i : order) {
        if (!(problem.w[i] > 0.0)) break;
        try {
            const Point2 p = locate_bistatic(problem.pairs[i], problem.measurements[i]);
            if (std::isfinite(p.x) && std::isfinite(p.y)) return p;
        } catch (const DomainError&) {
        }
    }
    // Centroid of the distinct node positions.
    Point2 c;
    std::vector<Point2> nodes;
    for (const auto& pair : problem.pairs) {
        for (const NodePosition* nd : {&pair.n1, &pair.n2}) {
            const bool seen = std::any_of(nodes.begin(), nodes.end(),
                                          [&](const Point2& q) { return q.x == nd->x && q.y == nd->y; });
            if (!seen) nodes.push_back({nd->x, nd->y});
        }
    }
    for (const auto& q : nodes) {
        c.x += q.x / static_cast<double>(nodes.size());
        c.y += q.y / static_cast<double>(nodes.size());
    }
    return c;
}

bool try_residuals(double x, double y, const FusionProblem& problem, Eigen::VectorXd& r,
                   Eigen::MatrixXd* j) {
    try {
        r = fusion_residuals(x, y, problem, j);
        return r.allFinite();
    } catch (const DomainError&) {
        return false;
    }
}

}  // namespace

SolveResult solve_multistatic(const FusionProblem& problem, const SolverOptions& opts) {
    problem.validate();
    opts.validate();
    if (std::none_of(problem.w.begin(), problem.w.end(), [](double v) { return v > 0.0; }))
        throw NumericalError("every pair has zero weight", 0.0);

    SolveResult res;
    res.initial_guess = opts.initial_guess.value_or(default_initial_guess(problem));
    double x = res.initial_guess.x;
    double y = res.initial_guess.y;

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    if (!try_residuals(x, y, problem, r, &jac)) {
        // Nudge off a node; the loss is undefined exactly there.
        x += 1e-3;
        y += 1e-3;
        if (!try_residuals(x, y, problem, r, &jac)) throw DomainError("initial guess is degenerate");
    }
    double loss = r.squaredNorm();
    res.initial_loss = loss;
    double lambda = opts.initial_damping;

    for (int it = 0; it < opts.max_iterations; ++it) {
        res.iterations = it + 1;
        const Eigen::Vector2d grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
            res.converged = true;
            break;
        }
        const Eigen::Matrix2d jtj = jac.transpose() * jac;
        bool accepted = false;
        bool small_step = false;
        while (lambda < 1e16) {
            Eigen::Matrix2d a = jtj;
            for (int k = 0; k < 2; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
            const Eigen::Vector2d step = a.ldlt().solve(-grad);
            Eigen::VectorXd r_new;
            Eigen::MatrixXd j_new;
            if (step.allFinite() && try_residuals(x + step(0), y + step(1), problem, r_new, &j_new)) {
                const double loss_new = r_new.squaredNorm();
                if (loss_new <= loss) {
                    x += step(0);
                    y += step(1);
                    r = std::move(r_new);
                    jac = std::move(j_new);
                    small_step = step.norm() < opts.step_tolerance;
                    loss = loss_new;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    accepted = true;
                    break;
                }
            }
            if (step.allFinite() && step.norm() < opts.step_tolerance) break;
            lambda *= 10.0;
        }
        if (!accepted || small_step) {
            // No descent step is left above the step tolerance.
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.y = y;
    res.loss = loss;
    return res;
}

}  // namespace bistatic
