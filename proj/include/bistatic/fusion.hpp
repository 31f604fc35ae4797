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

#include <optional>
#include <vector>

#include "bistatic/geometry.hpp"
#include "bistatic/measurement.hpp"

namespace bistatic {

/// One measurement per pair; a, b, w are per-pair weights of the loss.
struct FusionProblem {
    std::vector<BistaticPair> pairs;
    std::vector<Measurement> measurements;
    std::vector<double> a;  // TDOA weight, 1/m
    std::vector<double> b;  // AoA weight
    std::vector<double> w;  // pair weight

    /// a = b = w = 1 for every pair.
    static FusionProblem unweighted(std::vector<BistaticPair> pairs, std::vector<Measurement> measurements);

    std::size_t size() const { return pairs.size(); }
    void validate() const;
};

struct SolverOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-12;
    double step_tolerance = 1e-9;  // m
    double initial_damping = 1e-3;
    std::optional<Point2> initial_guess;

    void validate() const;
};

struct SolveResult {
    double x = 0.0;
    double y = 0.0;
    int iterations = 0;
    bool converged = false;
    double loss = 0.0;
    double initial_loss = 0.0;
    Point2 initial_guess;
};

/// sum_i w_i [(a_i c (dT_i - f_dT))^2 + (b_i wrap(theta_i - f_theta) / 2pi)^2]
double wls_loss(double x, double y, const FusionProblem& problem);

/// The 2N residuals whose squared norm is wls_loss (TDOA then AoA per pair),
/// and optionally their 2N x 2 Jacobian.
Eigen::VectorXd fusion_residuals(double x, double y, const FusionProblem& problem,
                                 Eigen::MatrixXd* jacobian = nullptr);

/// w_i = 1/gdop_i at `rough`, normalised to sum to N; degenerate pairs get 0.
std::vector<double> compute_weights(const FusionProblem& problem, const Point2& rough,
                                    const MeasurementErrorModel& err);

/// Levenberg-Marquardt on fusion_residuals. Starts from the single-pair
/// solution of the largest-weight pair unless a guess is given, falling back
/// to the node centroid.
SolveResult solve_multistatic(const FusionProblem& problem, const SolverOptions& opts = {});

}  // namespace bistatic
