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

#include "bistatic/experiments.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "bistatic/errors.hpp"
#include "bistatic/fusion.hpp"
#include "bistatic/gdop.hpp"
#include "bistatic/receiver.hpp"
#include "bistatic/rng.hpp"

namespace bistatic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Substream tags for the fourth key of substream().
constexpr std::uint64_t kTagNodes = 100;
constexpr std::uint64_t kTagDoppler = 200;

NodePosition perturbed(const NodePosition& n, Rng& rng) {
    std::normal_distribution<double> normal;
    NodePosition p = n;
    p.x += n.sigma_x * normal(rng);
    p.y += n.sigma_y * normal(rng);
    return p;
}

TargetState target_at(const BistaticPair& pair, const ScenarioConfig& cfg, double theta_deg) {
    TargetState t = iso_range_target(pair, cfg.sum_range, deg_to_rad(theta_deg), cfg.exclusion_deg);
    t.rcs_dbsm = cfg.rcs_dbsm;
    return t;
}

std::string failure_status(const std::exception& e) {
    if (dynamic_cast<const DetectionFailure*>(&e)) return "detection_failure";
    if (dynamic_cast<const NumericalError*>(&e)) return "numerical_error";
    return "degenerate";
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

double sweep_theta_deg(std::size_t k, std::size_t n) {
    return -180.0 + (static_cast<double>(k) + 0.5) * 360.0 / static_cast<double>(n);
}

// --- iso-range sweep --------------------------------------------------------

SweepSummary summarize(const std::vector<SweepRecord>& records) {
    SweepSummary s;
    double* sums[6] = {&s.mean_abs_tdoa_err_ns, &s.mean_abs_aoa_err_deg, &s.mean_err_mode1_m,
                       &s.mean_err_mode2_m,     &s.mean_gdop_mode1_m,    &s.mean_gdop_mode2_m};
    std::size_t counts[6] = {};
    for (const auto& r : records) {
        if (r.status == "excluded") {
            ++s.excluded_points;
            continue;
        }
        if (r.status == "ok") ++s.valid_points;
        else ++s.failed_points;
        const double values[6] = {r.tdoa_err_ns,  r.aoa_err_deg,  r.err_mode1_m,
                                  r.err_mode2_m,  r.gdop_mode1_m, r.gdop_mode2_m};
        for (int i = 0; i < 6; ++i) {
            if (std::isfinite(values[i])) {
                *sums[i] += values[i];
                ++counts[i];
            }
        }
    }
    for (int i = 0; i < 6; ++i) *sums[i] = counts[i] > 0 ? *sums[i] / static_cast<double>(counts[i]) : kNaN;
    return s;
}

SweepResult run_iso_range_sweep(const ScenarioConfig& cfg, unsigned threads) {
    cfg.validate();
    const MeasurementErrorModel err = effective_error_model(cfg);
    const BistaticPair nominal[2] = {cfg.pair(Mode::Mode1), cfg.pair(Mode::Mode2)};
    std::optional<SignalLevelReceiver> receiver;
    if (cfg.engine == Engine::SignalLevel) receiver.emplace(cfg.radar);
    ModelMeasureOptions model_opts;
    model_opts.quantize = cfg.model_quantize;

    SweepResult result;
    result.records.resize(cfg.sweep_points);

    parallel_for(cfg.sweep_points, threads, [&](std::size_t k) {
        SweepRecord& rec = result.records[k];
        rec.index = k;
        rec.theta2_deg = sweep_theta_deg(k, cfg.sweep_points);
        if (in_collinear_band(nominal[0], deg_to_rad(rec.theta2_deg), cfg.exclusion_deg)) {
            rec.status = "excluded";
            rec.x_m = rec.y_m = rec.tdoa_true_ns = rec.tdoa_meas_ns = rec.tdoa_err_ns = kNaN;
            rec.aoa_true_deg = rec.aoa_meas_deg = rec.aoa_err_deg = kNaN;
            rec.err_mode1_m = rec.err_mode2_m = rec.gdop_mode1_m = rec.gdop_mode2_m = kNaN;
            rec.rms_mode1_m = rec.rms_mode2_m = kNaN;
            return;
        }
        const TargetState target = target_at(nominal[0], cfg, rec.theta2_deg);
        rec.x_m = target.x;
        rec.y_m = target.y;
        rec.tdoa_true_ns = true_tdoa(nominal[0], target) * 1e9;
        rec.aoa_true_deg = rad_to_deg(true_aoa(nominal[0].receiver(), target));

        std::string failure[2];
        double* gdop_out[2] = {&rec.gdop_mode1_m, &rec.gdop_mode2_m};
        for (int m = 0; m < 2; ++m) {
            try {
                *gdop_out[m] = gdop(nominal[m], target, err).gdop;
            } catch (const std::exception& e) {
                *gdop_out[m] = kNaN;
                failure[m] = failure_status(e);
            }
        }

        // Each mode is measured and solved independently; a failure in one
        // mode blanks only that mode's columns.
        const double trials = static_cast<double>(cfg.trials_per_point);
        double sum_tdoa = 0.0, sum_tdoa_err = 0.0, sum_aoa = 0.0, sum_aoa_err = 0.0;
        double sum_err[2] = {0.0, 0.0};
        double sum_sq[2] = {0.0, 0.0};
        for (std::size_t t = 0; t < cfg.trials_per_point; ++t) {
            BistaticPair truth = nominal[0];
            if (cfg.engine == Engine::ModelBased) {
                Rng rng(substream(cfg.seed, k, t, kTagNodes));
                truth.n1 = perturbed(nominal[0].n1, rng);
                truth.n2 = perturbed(nominal[0].n2, rng);
            }
            for (int m = 0; m < 2; ++m) {
                if (!failure[m].empty()) continue;
                const Mode mode = m == 0 ? Mode::Mode1 : Mode::Mode2;
                const std::uint64_t s = substream(cfg.seed, k, t, static_cast<std::uint64_t>(m + 1));
                try {
                    Measurement meas;
                    if (receiver) {
                        meas = receiver->measure(nominal[m], target, s).measurement;
                    } else {
                        meas = model_based_measure(truth.with_mode(mode), target, cfg.radar, err, s, model_opts);
                    }
                    const Point2 p = locate_bistatic(nominal[m], meas);
                    const double e = distance(p.x, p.y, target.x, target.y);
                    sum_err[m] += e;
                    sum_sq[m] += e * e;
                    if (m == 0) {
                        sum_tdoa += meas.tdoa_s * 1e9;
                        sum_tdoa_err += std::abs(meas.tdoa_s * 1e9 - rec.tdoa_true_ns);
                        sum_aoa += rad_to_deg(meas.aoa_rad);
                        sum_aoa_err +=
                            std::abs(rad_to_deg(wrap_angle(meas.aoa_rad - deg_to_rad(rec.aoa_true_deg))));
                    }
                } catch (const std::exception& e) {
                    failure[m] = failure_status(e);
                }
            }
        }
        if (failure[0].empty()) {
            rec.tdoa_meas_ns = sum_tdoa / trials;
            rec.tdoa_err_ns = sum_tdoa_err / trials;
            rec.aoa_meas_deg = sum_aoa / trials;
            rec.aoa_err_deg = sum_aoa_err / trials;
            rec.err_mode1_m = sum_err[0] / trials;
            rec.rms_mode1_m = std::sqrt(sum_sq[0] / trials);
        } else {
            rec.tdoa_meas_ns = rec.tdoa_err_ns = rec.aoa_meas_deg = rec.aoa_err_deg = kNaN;
            rec.err_mode1_m = rec.rms_mode1_m = kNaN;
        }
        if (failure[1].empty()) {
            rec.err_mode2_m = sum_err[1] / trials;
            rec.rms_mode2_m = std::sqrt(sum_sq[1] / trials);
        } else {
            rec.err_mode2_m = rec.rms_mode2_m = kNaN;
        }
        if (!failure[0].empty() && !failure[1].empty()) {
            rec.status = failure[0];
        } else if (!failure[0].empty()) {
            rec.status = "mode1_" + failure[0];
        } else if (!failure[1].empty()) {
            rec.status = "mode2_" + failure[1];
        }
    });

    result.summary = summarize(result.records);
    return result;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "theta2_deg,x_m,y_m,tdoa_true_ns,tdoa_meas_ns,tdoa_err_ns,aoa_true_deg,aoa_meas_deg,"
          "aoa_err_deg,err_mode1_m,err_mode2_m,gdop_mode1_m,gdop_mode2_m,status\n";
    for (const auto& r : result.records) {
        for (double v : {r.theta2_deg, r.x_m, r.y_m, r.tdoa_true_ns, r.tdoa_meas_ns, r.tdoa_err_ns,
                         r.aoa_true_deg, r.aoa_meas_deg, r.aoa_err_deg, r.err_mode1_m, r.err_mode2_m,
                         r.gdop_mode1_m, r.gdop_mode2_m})
            os << format_number(v) << ',';
        os << r.status << '\n';
    }
    const SweepSummary& s = result.summary;
    os << "# valid_points = " << s.valid_points << '\n';
    os << "# excluded_points = " << s.excluded_points << '\n';
    os << "# failed_points = " << s.failed_points << '\n';
    os << "# mean_abs_tdoa_err_ns = " << format_number(s.mean_abs_tdoa_err_ns) << '\n';
    os << "# mean_abs_aoa_err_deg = " << format_number(s.mean_abs_aoa_err_deg) << '\n';
    os << "# mean_err_mode1_m = " << format_number(s.mean_err_mode1_m) << '\n';
    os << "# mean_err_mode2_m = " << format_number(s.mean_err_mode2_m) << '\n';
    os << "# mean_gdop_mode1_m = " << format_number(s.mean_gdop_mode1_m) << '\n';
    os << "# mean_gdop_mode2_m = " << format_number(s.mean_gdop_mode2_m) << '\n';
}

// --- multistatic ------------------------------------------------------------

std::vector<NodePosition> multistatic_nodes(const ScenarioConfig& cfg) {
    if (cfg.nodes.size() >= 3) return cfg.nodes;
    const NodePosition& tx = cfg.nodes[0];
    const NodePosition& rx0 = cfg.nodes[1];
    const double r = cfg.baseline_l;
    const double phi0 = std::atan2(rx0.y - tx.y, rx0.x - tx.x);
    std::vector<NodePosition> nodes{tx, rx0};
    for (int k = 1; k < 3; ++k) {
        NodePosition n = rx0;
        const double phi = phi0 + 2.0 * kPi * k / 3.0;
        n.x = tx.x + r * std::cos(phi);
        n.y = tx.y + r * std::sin(phi);
        nodes.push_back(n);
    }
    return nodes;
}

FusionWeights FusionWeights::noise_normalised(const MeasurementErrorModel& err) {
    err.validate();
    if (!(err.sigma_tdoa > 0.0) || !(err.sigma_aoa > 0.0))
        throw std::invalid_argument("noise-normalised weights need positive sigmas");
    return FusionWeights{1.0 / (kSpeedOfLight * err.sigma_tdoa), 2.0 * kPi / err.sigma_aoa};
}

MultistaticResult run_multistatic(const ScenarioConfig& cfg, unsigned threads, const FusionWeights& weights) {
    cfg.validate();
    const MeasurementErrorModel err = effective_error_model(cfg);
    MultistaticResult result;
    result.nodes = multistatic_nodes(cfg);
    const std::size_t n_rx = result.nodes.size() - 1;
    if (n_rx < 2) throw ConfigError("multistatic run needs at least two receivers");

    std::vector<BistaticPair> pairs;
    for (std::size_t i = 1; i <= n_rx; ++i) pairs.push_back(BistaticPair{result.nodes[0], result.nodes[i], Mode::Mode1});

    std::optional<SignalLevelReceiver> receiver;
    if (cfg.engine == Engine::SignalLevel) receiver.emplace(cfg.radar);
    ModelMeasureOptions model_opts;
    model_opts.quantize = cfg.model_quantize;

    result.records.resize(cfg.sweep_points);
    std::vector<std::size_t> wins(cfg.sweep_points, 0);

    parallel_for(cfg.sweep_points, threads, [&](std::size_t k) {
        MultistaticRecord& rec = result.records[k];
        rec.index = k;
        rec.theta2_deg = sweep_theta_deg(k, cfg.sweep_points);
        rec.pair_err_m.assign(n_rx, kNaN);
        if (in_collinear_band(pairs[0], deg_to_rad(rec.theta2_deg), cfg.exclusion_deg)) {
            rec.status = "excluded";
            rec.x_m = rec.y_m = rec.fused_err_m = rec.unweighted_err_m = rec.best_pair_err_m = kNaN;
            rec.fused_win_fraction = kNaN;
            return;
        }
        const TargetState target = target_at(pairs[0], cfg, rec.theta2_deg);
        rec.x_m = target.x;
        rec.y_m = target.y;

        try {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n_rx; ++i) {
                try {
                    const double g = gdop(pairs[i], target, err).gdop;
                    if (g < best) {
                        best = g;
                        rec.best_pair = i;
                    }
                } catch (const DomainError&) {
                } catch (const NumericalError&) {
                }
            }
            if (!std::isfinite(best)) throw DomainError("every pair is degenerate");

            std::vector<double> pair_sum(n_rx, 0.0);
            double fused_sum = 0.0, unweighted_sum = 0.0;
            for (std::size_t t = 0; t < cfg.trials_per_point; ++t) {
                std::vector<NodePosition> truth = result.nodes;
                if (cfg.engine == Engine::ModelBased) {
                    Rng rng(substream(cfg.seed, k, t, kTagNodes));
                    for (auto& n : truth) n = perturbed(n, rng);
                }
                std::vector<Measurement> meas(n_rx);
                std::vector<double> pair_err(n_rx);
                for (std::size_t i = 0; i < n_rx; ++i) {
                    const std::uint64_t s = substream(cfg.seed, k, t, i + 1);
                    if (receiver) {
                        meas[i] = receiver->measure(pairs[i], target, s).measurement;
                    } else {
                        const BistaticPair true_pair{truth[0], truth[i + 1], Mode::Mode1};
                        meas[i] = model_based_measure(true_pair, target, cfg.radar, err, s, model_opts);
                    }
                    meas[i].pair_index = i;
                    try {
                        const Point2 p = locate_bistatic(pairs[i], meas[i]);
                        pair_err[i] = distance(p.x, p.y, target.x, target.y);
                    } catch (const DomainError&) {
                        pair_err[i] = kNaN;
                    }
                    pair_sum[i] += pair_err[i];
                }

                FusionProblem problem = FusionProblem::unweighted(pairs, meas);
                problem.a.assign(n_rx, weights.a);
                problem.b.assign(n_rx, weights.b);
                const SolveResult rough = solve_multistatic(problem);
                unweighted_sum += distance(rough.x, rough.y, target.x, target.y);

                problem.w = compute_weights(problem, Point2{rough.x, rough.y}, err);
                const SolveResult fused = solve_multistatic(problem);
                const double fused_err = distance(fused.x, fused.y, target.x, target.y);
                fused_sum += fused_err;
                if (fused_err <= pair_err[rec.best_pair]) ++wins[k];
            }
            const double trials = static_cast<double>(cfg.trials_per_point);
            rec.trials = cfg.trials_per_point;
            rec.fused_err_m = fused_sum / trials;
            rec.unweighted_err_m = unweighted_sum / trials;
            for (std::size_t i = 0; i < n_rx; ++i) rec.pair_err_m[i] = pair_sum[i] / trials;
            rec.best_pair_err_m = rec.pair_err_m[rec.best_pair];
            rec.fused_win_fraction = static_cast<double>(wins[k]) / trials;
            if (!std::isfinite(rec.best_pair_err_m)) throw DomainError("best pair could not be solved");
        } catch (const std::exception& e) {
            rec.status = failure_status(e);
            rec.fused_err_m = rec.unweighted_err_m = rec.best_pair_err_m = rec.fused_win_fraction = kNaN;
            rec.trials = 0;
            wins[k] = 0;
        }
    });

    MultistaticSummary& s = result.summary;
    std::size_t total_trials = 0, total_wins = 0;
    for (const auto& r : result.records) {
        if (r.status == "ok") {
            ++s.valid_points;
            s.mean_fused_err_m += r.fused_err_m;
            s.mean_unweighted_err_m += r.unweighted_err_m;
            s.mean_best_pair_err_m += r.best_pair_err_m;
            total_trials += r.trials;
            total_wins += wins[r.index];
        } else if (r.status == "excluded") {
            ++s.excluded_points;
        } else {
            ++s.failed_points;
        }
    }
    const double n = s.valid_points > 0 ? static_cast<double>(s.valid_points) : kNaN;
    s.mean_fused_err_m /= n;
    s.mean_unweighted_err_m /= n;
    s.mean_best_pair_err_m /= n;
    s.fused_win_fraction = total_trials > 0 ? static_cast<double>(total_wins) / static_cast<double>(total_trials) : kNaN;
    return result;
}

void write_multistatic_csv(std::ostream& os, const MultistaticResult& result) {
    const std::size_t n_rx = result.nodes.size() - 1;
    os << "theta2_deg,x_m,y_m,fused_err_m,unweighted_err_m,best_pair,best_pair_err_m";
    for (std::size_t i = 0; i < n_rx; ++i) os << ",pair" << i + 1 << "_err_m";
    os << ",fused_win_fraction,status\n";
    for (const auto& r : result.records) {
        os << format_number(r.theta2_deg) << ',' << format_number(r.x_m) << ',' << format_number(r.y_m) << ','
           << format_number(r.fused_err_m) << ',' << format_number(r.unweighted_err_m) << ',' << r.best_pair + 1
           << ',' << format_number(r.best_pair_err_m);
        for (double e : r.pair_err_m) os << ',' << format_number(e);
        os << ',' << format_number(r.fused_win_fraction) << ',' << r.status << '\n';
    }
    const MultistaticSummary& s = result.summary;
    os << "# valid_points = " << s.valid_points << '\n';
    os << "# excluded_points = " << s.excluded_points << '\n';
    os << "# failed_points = " << s.failed_points << '\n';
    os << "# mean_fused_err_m = " << format_number(s.mean_fused_err_m) << '\n';
    os << "# mean_unweighted_err_m = " << format_number(s.mean_unweighted_err_m) << '\n';
    os << "# mean_best_pair_err_m = " << format_number(s.mean_best_pair_err_m) << '\n';
    os << "# fused_win_fraction = " << format_number(s.fused_win_fraction) << '\n';
}

// --- Doppler ----------------------------------------------------------------

DopplerRun run_doppler(const ScenarioConfig& cfg) {
    cfg.validate();
    if (!cfg.motion) throw ConfigError("doppler run needs a [motion] section");
    const MotionConfig& motion = *cfg.motion;
    const BistaticPair pair = cfg.pair(Mode::Mode1);
    const NodePosition& tx = pair.transmitter();
    const NodePosition& rx = pair.receiver();

    DopplerRun run;
    run.target = target_at(pair, cfg, motion.theta2_deg);
    TargetState& t = run.target;
    const double r1 = distance(t.x, t.y, tx.x, tx.y);
    const double r2 = distance(t.x, t.y, rx.x, rx.y);
    const double sx = (t.x - tx.x) / r1 + (t.x - rx.x) / r2;
    const double sy = (t.y - tx.y) / r1 + (t.y - rx.y) / r2;
    const double norm = std::hypot(sx, sy);  // 2 cos(beta / 2)
    const double sign = motion.direction == MotionDirection::RadialInward ? -1.0 : 1.0;
    t.vx = sign * motion.speed_mps * sx / norm;
    t.vy = sign * motion.speed_mps * sy / norm;

    run.bistatic_angle_rad = bistatic_angle(pair, t);
    run.range_rate_true = sx * t.vx + sy * t.vy;
    run.doppler_true_hz = run.range_rate_true * cfg.radar.carrier_hz / kSpeedOfLight;
    run.speed_true = motion.speed_mps;

    const SignalLevelReceiver receiver(cfg.radar);
    DopplerResult res = receiver.measure_doppler(pair, t, motion.pulses, substream(cfg.seed, 0, 0, kTagDoppler));
    run.doppler_est_hz = res.doppler_hz;
    run.range_rate_est = res.range_rate;
    run.aoa_est_deg = rad_to_deg(res.aoa_rad);
    run.speed_est = sign * run.range_rate_est / (2.0 * std::cos(run.bistatic_angle_rad / 2.0));
    run.speed_err = std::abs(run.speed_est - run.speed_true);
    run.map = std::move(res.map);
    return run;
}

void write_doppler_csv(std::ostream& os, const DopplerRun& run) {
    os << "key,value\n";
    auto row = [&](const char* k, double v) { os << k << ',' << format_number(v) << '\n'; };
    row("target_x_m", run.target.x);
    row("target_y_m", run.target.y);
    row("target_vx_mps", run.target.vx);
    row("target_vy_mps", run.target.vy);
    row("bistatic_angle_deg", rad_to_deg(run.bistatic_angle_rad));
    row("aoa_est_deg", run.aoa_est_deg);
    row("doppler_true_hz", run.doppler_true_hz);
    row("doppler_est_hz", run.doppler_est_hz);
    row("range_rate_true_mps", run.range_rate_true);
    row("range_rate_est_mps", run.range_rate_est);
    row("speed_true_mps", run.speed_true);
    row("speed_est_mps", run.speed_est);
    row("speed_err_mps", run.speed_err);
}

// --- GDOP map ---------------------------------------------------------------

double GridSpec::x(std::size_t i) const {
    return x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(nx - 1);
}

double GridSpec::y(std::size_t j) const {
    return y_min + (y_max - y_min) * static_cast<double>(j) / static_cast<double>(ny - 1);
}

void GridSpec::validate() const {
    if (nx < 2 || ny < 2) throw ConfigError("grid needs at least two cells per axis");
    if (!(x_max > x_min) || !(y_max > y_min)) throw ConfigError("grid extents must be increasing");
}

GridSpec default_grid(const ScenarioConfig& cfg, std::size_t cells_per_side) {
    const double mx = 0.5 * (cfg.nodes[0].x + cfg.nodes[1].x);
    const double my = 0.5 * (cfg.nodes[0].y + cfg.nodes[1].y);
    const double h = cfg.sum_range;
    return GridSpec{mx - h, mx + h, cells_per_side, my - h, my + h, cells_per_side};
}

std::vector<GdopCell> run_gdop_map(const ScenarioConfig& cfg, const GridSpec& grid, unsigned threads) {
    cfg.validate();
    grid.validate();
    const MeasurementErrorModel err = effective_error_model(cfg);
    const BistaticPair pair = cfg.pair(Mode::Mode1);
    std::vector<GdopCell> cells(grid.nx * grid.ny);
    parallel_for(grid.ny, threads, [&](std::size_t j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            GdopCell& c = cells[j * grid.nx + i];
            c.x_m = grid.x(i);
            c.y_m = grid.y(j);
            TargetState t;
            t.x = c.x_m;
            t.y = c.y_m;
            t.rcs_dbsm = cfg.rcs_dbsm;
            bool ok[2] = {true, true};
            double* out[2] = {&c.gdop_mode1_m, &c.gdop_mode2_m};
            for (int m = 0; m < 2; ++m) {
                try {
                    *out[m] = gdop(pair.with_mode(m == 0 ? Mode::Mode1 : Mode::Mode2), t, err).gdop;
                } catch (const DomainError&) {
                    ok[m] = false;
                } catch (const NumericalError&) {
                    ok[m] = false;
                }
                if (!ok[m]) *out[m] = kNaN;
            }
            if (!ok[0] && !ok[1]) {
                c.best_mode = 0;
                c.status = "degenerate";
            } else {
                c.best_mode = mode_number(select_mode(pair, t, err));
                if (!ok[0]) c.status = "degenerate_mode1";
                if (!ok[1]) c.status = "degenerate_mode2";
            }
        }
    });
    return cells;
}

void write_gdop_csv(std::ostream& os, const std::vector<GdopCell>& cells) {
    os << "x_m,y_m,gdop_mode1_m,gdop_mode2_m,best_mode,status\n";
    for (const auto& c : cells)
        os << format_number(c.x_m) << ',' << format_number(c.y_m) << ',' << format_number(c.gdop_mode1_m)
           << ',' << format_number(c.gdop_mode2_m) << ',' << c.best_mode << ',' << c.status << '\n';
}

}  // namespace bistatic
