#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "difflms/common.hpp"
#include "difflms/model.hpp"
#include "difflms/rng.hpp"
#include "difflms/rules.hpp"
#include "difflms/strategies.hpp"
#include "difflms/theory.hpp"
#include "difflms/topology.hpp"

namespace difflms {

enum class WeightRuleKind {
    none,              // centralized / standalone strategies
    uniform,
    metropolis,
    hastings,
    adaptive_hastings,
    two_node_optimal,
    explicit_matrix,   // user-supplied combination matrix
};

inline const char* rule_name(WeightRuleKind r) {
    switch (r) {
        case WeightRuleKind::none: return "none";
        case WeightRuleKind::uniform: return "uniform";
        case WeightRuleKind::metropolis: return "metropolis";
        case WeightRuleKind::hastings: return "hastings";
        case WeightRuleKind::adaptive_hastings: return "adaptive-hastings";
        case WeightRuleKind::two_node_optimal: return "two-node-optimal";
        case WeightRuleKind::explicit_matrix: return "explicit";
    }
    return "?";
}

inline WeightRuleKind parse_rule(const std::string& s) {
    if (s == "none" || s.empty()) return WeightRuleKind::none;
    if (s == "uniform") return WeightRuleKind::uniform;
    if (s == "metropolis") return WeightRuleKind::metropolis;
    if (s == "hastings") return WeightRuleKind::hastings;
    if (s == "adaptive-hastings") return WeightRuleKind::adaptive_hastings;
    if (s == "two-node-optimal") return WeightRuleKind::two_node_optimal;
    throw ConfigError("unknown combination rule: " + s);
}

struct ExperimentSpec {
    NetworkModel model;
    Graph graph = Graph::complete(1);
    StrategyKind strategy = StrategyKind::standalone;
    WeightRuleKind rule = WeightRuleKind::none;
    std::optional<CombinationMatrix> combination;  // used by explicit_matrix
    std::optional<Eigen::MatrixXd> p_matrix, q_matrix;  // general_pq only
    int n_iters = 0;
    int n_trials = 0;
    std::uint64_t seed = 0;
    double steady_window_frac = 0.2;
    double adaptive_forget = 0.1;
    int n_threads = 1;
};

// Trial-averaged learning curves plus steady-state summaries. steady_emse is
// the mean of emse_per_iter over the final steady_window_frac of iterations.
struct LearningCurve {
    Eigen::MatrixXd per_node_emse;  // N x n_iters
    Eigen::VectorXd emse_per_iter;  // network = per-node average
    Eigen::VectorXd msd_per_iter;
    Eigen::VectorXd steady_per_node_emse, steady_per_node_msd;
    double steady_emse = 0.0, steady_msd = 0.0;
    double steady_emse_stderr = 0.0, steady_msd_stderr = 0.0;
    double window_frac = 0.2;
    int n_trials_used = 0, n_trials_diverged = 0;
    bool window_converged = true;
    double window_slope_db = 0.0;  // fitted dB drift across the window
};

struct SteadyEstimate {
    double emse = 0.0, msd = 0.0;
    bool converged = true;
    double slope_db = 0.0;
};

namespace detail {

inline int window_length(int n_iters, double frac) {
    if (!(frac > 0.0 && frac <= 1.0))
        throw ConfigError("steady window fraction must lie in (0, 1]");
    const int len = std::max(1, static_cast<int>(std::lround(frac * n_iters)));
    if (len > n_iters) throw ConfigError("steady window longer than the curve");
    return len;
}

// Least-squares slope of y over equally spaced x = 0..n-1.
inline double ls_slope(const std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    if (n < 2) return 0.0;
    const double xbar = (n - 1) / 2.0;
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += (i - xbar) * (y[i] - ybar);
        den += (i - xbar) * (i - xbar);
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace detail

inline SteadyEstimate steady_state(const LearningCurve& curve, double window_frac) {
    const int n = static_cast<int>(curve.emse_per_iter.size());
    const int len = detail::window_length(n, window_frac);
    SteadyEstimate s;
    s.emse = curve.emse_per_iter.tail(len).mean();
    s.msd = curve.msd_per_iter.tail(len).mean();
    std::vector<double> db(len);
    for (int i = 0; i < len; ++i)
        db[i] = to_db(std::max(curve.emse_per_iter(n - len + i), 1e-300));
    s.slope_db = detail::ls_slope(db) * (len - 1);
    s.converged = std::abs(s.slope_db) <= 0.1;
    return s;
}

inline LearningCurve run_experiment(const ExperimentSpec& spec) {
    const NetworkModel& model = spec.model;
    const int n = model.n_nodes;
    const int iters = spec.n_iters;
    if (iters < 1 || spec.n_trials < 1)
        throw ConfigError("run_experiment: n_iters and n_trials must be >= 1");
    if (spec.graph.n_nodes() != n)
        throw ConfigError("run_experiment: graph size must match the model");
    const int win = detail::window_length(iters, spec.steady_window_frac);

    // Theory stability gate (throws when the dominant mode leaves (0,1)).
    const double mode = theory::dominant_mode(model, spec.strategy);
    if (mode >= 1.0)
        throw NumericalError("run_experiment: dominant mode is 1 (no adaptation)");
    if (iters * (1.0 - mode) < 20.0)
        std::fprintf(stderr,
                     "warning: n_iters=%d spans only %.1f time constants before "
                     "the steady window; results may not be converged\n",
                     iters, iters * (1.0 - mode));

    const bool diffusion =
        spec.strategy == StrategyKind::cta || spec.strategy == StrategyKind::atc;
    const bool adaptive = spec.rule == WeightRuleKind::adaptive_hastings;
    if (adaptive && !diffusion)
        throw ConfigError("run_experiment: adaptive-hastings requires CTA or ATC");

    // Static combination weights, resolved once.
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
    if (spec.strategy == StrategyKind::general_pq) {
        if (!spec.p_matrix || !spec.q_matrix)
            throw ConfigError("run_experiment: general_pq needs P and Q");
        p = *spec.p_matrix;
        q = *spec.q_matrix;
    } else if (diffusion && !adaptive) {
        CombinationMatrix cm = [&]() -> CombinationMatrix {
            switch (spec.rule) {
                case WeightRuleKind::uniform: return uniform_weights(spec.graph);
                case WeightRuleKind::metropolis: return metropolis_weights(spec.graph);
                case WeightRuleKind::hastings:
                    return hastings_weights(spec.graph, model.noise_vars);
                case WeightRuleKind::two_node_optimal: {
                    const TwoNodeWeights w = two_node_optimal_weights(model.noise_vars);
                    return two_node_combination(w.alpha, w.beta);
                }
                case WeightRuleKind::explicit_matrix:
                    if (!spec.combination)
                        throw ConfigError("run_experiment: explicit rule without matrix");
                    return *spec.combination;
                default:
                    throw ConfigError("run_experiment: diffusion strategy needs a rule");
            }
        }();
        const ValidationReport v = validate(cm);
        if (!v.left_stochastic)
            throw ConfigError("run_experiment: combination matrix is not left-stochastic");
        if (spec.strategy == StrategyKind::cta)
            p = cm.weights;
        else
            q = cm.weights;
    }

    constexpr int kBlock = 8;
    const int n_trials = spec.n_trials;
    const int n_blocks = (n_trials + kBlock - 1) / kBlock;

    struct BlockAccum {
        Eigen::MatrixXd emse;  // N x iters
        Eigen::VectorXd msd;   // iters
        Eigen::VectorXd node_emse_win, node_msd_win;  // N, window sums
        std::vector<double> trial_emse_steady, trial_msd_steady;
        int completed = 0, diverged = 0;
    };
    std::vector<BlockAccum> blocks(n_blocks);

    std::atomic<int> next_block{0};
    auto worker = [&]() {
        DataSample sample;
        ErrorRecord rec;
        Eigen::MatrixXd trial_emse(n, iters);
        Eigen::VectorXd trial_msd(iters);
        Eigen::MatrixXd p_iter, q_iter;
        for (;;) {
            const int b = next_block.fetch_add(1);
            if (b >= n_blocks) break;
            BlockAccum& acc = blocks[b];
            acc.emse = Eigen::MatrixXd::Zero(n, iters);
            acc.msd = Eigen::VectorXd::Zero(iters);
            acc.node_emse_win = Eigen::VectorXd::Zero(n);
            acc.node_msd_win = Eigen::VectorXd::Zero(n);
            const int t_end = std::min(n_trials, (b + 1) * kBlock);
            for (int t = b * kBlock; t < t_end; ++t) {
                RngStream rng(spec.seed, static_cast<std::uint64_t>(t));
                StrategyState state = StrategyState::init(spec.strategy, n, model.dim);
                NoiseEstimator est(n, spec.adaptive_forget);
                const int warmup = adaptive ? est.warmup_iters() : 0;
                Eigen::VectorXd node_emse_win = Eigen::VectorXd::Zero(n);
                Eigen::VectorXd node_msd_win = Eigen::VectorXd::Zero(n);
                bool ok = true;
                try {
                    for (int i = 0; i < iters; ++i) {
                        generate_sample_into(model, rng, sample);
                        const Eigen::MatrixXd* pp = &p;
                        const Eigen::MatrixXd* qq = &q;
                        if (adaptive) {
                            for (int k = 0; k < n; ++k) {
                                const double r =
                                    sample.measurements(k) -
                                    sample.regressors.row(k).dot(state.estimates.col(k));
                                est.update_node(k, r);
                            }
                            const CombinationMatrix cm =
                                i < warmup
                                    ? uniform_weights(spec.graph)
                                    : adaptive_hastings_step(spec.graph, est).combination;
                            if (spec.strategy == StrategyKind::cta) {
                                p_iter = cm.weights;
                                pp = &p_iter;
                            } else {
                                q_iter = cm.weights;
                                qq = &q_iter;
                            }
                        }
                        switch (spec.strategy) {
                            case StrategyKind::standalone:
                                step_standalone(state, sample, model, rec);
                                break;
                            case StrategyKind::block:
                                step_block(state, sample, model, rec);
                                break;
                            case StrategyKind::incremental:
                                step_incremental(state, sample, model, rec);
                                break;
                            default:
                                step_general_diffusion(state, sample, model, *pp, *qq,
                                                       rec);
                        }
                        trial_emse.col(i) = rec.apriori_sq;
                        trial_msd(i) = rec.deviation_sq.mean();
                        if (i >= iters - win) {
                            node_emse_win += rec.apriori_sq;
                            node_msd_win += rec.deviation_sq;
                        }
                    }
                } catch (const DivergenceError&) {
                    ok = false;
                }
                if (ok) {
                    acc.emse += trial_emse;
                    acc.msd += trial_msd;
                    acc.node_emse_win += node_emse_win;
                    acc.node_msd_win += node_msd_win;
                    acc.trial_emse_steady.push_back(node_emse_win.mean() / win);
                    acc.trial_msd_steady.push_back(node_msd_win.mean() / win);
                    ++acc.completed;
                } else {
                    ++acc.diverged;
                }
            }
        }
    };

    const int n_threads = std::max(1, std::min(spec.n_threads, n_blocks));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deterministic merge in ascending block order.
    LearningCurve curve;
    curve.window_frac = spec.steady_window_frac;
    curve.per_node_emse = Eigen::MatrixXd::Zero(n, iters);
    curve.msd_per_iter = Eigen::VectorXd::Zero(iters);
    Eigen::VectorXd node_emse_win = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd node_msd_win = Eigen::VectorXd::Zero(n);
    std::vector<double> trial_emse_steady, trial_msd_steady;
    for (const BlockAccum& acc : blocks) {
        curve.per_node_emse += acc.emse;
        curve.msd_per_iter += acc.msd;
        node_emse_win += acc.node_emse_win;
        node_msd_win += acc.node_msd_win;
        trial_emse_steady.insert(trial_emse_steady.end(),
                                 acc.trial_emse_steady.begin(),
                                 acc.trial_emse_steady.end());
        trial_msd_steady.insert(trial_msd_steady.end(), acc.trial_msd_steady.begin(),
                                acc.trial_msd_steady.end());
        curve.n_trials_used += acc.completed;
        curve.n_trials_diverged += acc.diverged;
    }
    if (curve.n_trials_diverged > 0.01 * n_trials)
        throw NumericalError(
            "run_experiment: more than 1% of trials diverged (" +
            std::to_string(curve.n_trials_diverged) + "/" +
            std::to_string(n_trials) + "); configuration looks unstable");
    if (curve.n_trials_used == 0)
        throw NumericalError("run_experiment: no trial completed");

    const double used = curve.n_trials_used;
    curve.per_node_emse /= used;
    curve.msd_per_iter /= used;
    curve.emse_per_iter = curve.per_node_emse.colwise().mean().transpose();
    curve.steady_per_node_emse = node_emse_win / (used * win);
    curve.steady_per_node_msd = node_msd_win / (used * win);

    const SteadyEstimate st = steady_state(curve, spec.steady_window_frac);
    curve.steady_emse = st.emse;
    curve.steady_msd = st.msd;
    curve.window_converged = st.converged;
    curve.window_slope_db = st.slope_db;

    auto stderr_of = [&](const std::vector<double>& xs, double mean) {
        if (xs.size() < 2) return 0.0;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / (xs.size() - 1) / xs.size());
    };
    const double em = curve.steady_emse, mm = curve.steady_msd;
    curve.steady_emse_stderr = stderr_of(trial_emse_steady, em);
    curve.steady_msd_stderr = stderr_of(trial_msd_steady, mm);
    return curve;
}

// Per-quantity dB gaps between simulated steady state and a theory report.
struct TheoryComparison {
    double network_emse_delta_db = 0.0;
    double network_msd_delta_db = 0.0;
    Eigen::VectorXd node_emse_delta_db;
    Eigen::VectorXd node_msd_delta_db;
    double max_abs_delta_db = 0.0;

    bool within(double tol_db) const { return max_abs_delta_db <= tol_db; }
};

inline TheoryComparison compare_to_theory(const LearningCurve& curve,
                                          const theory::TheoryReport& report) {
    const int n = static_cast<int>(report.per_node_emse.size());
    if (curve.steady_per_node_emse.size() != n)
        throw ConfigError("compare_to_theory: node count mismatch");
    TheoryComparison cmp;
    cmp.network_emse_delta_db = to_db(curve.steady_emse) - to_db(report.network_emse);
    cmp.network_msd_delta_db = to_db(curve.steady_msd) - to_db(report.network_msd);
    cmp.node_emse_delta_db.resize(n);
    cmp.node_msd_delta_db.resize(n);
    for (int k = 0; k < n; ++k) {
        cmp.node_emse_delta_db(k) =
            to_db(curve.steady_per_node_emse(k)) - to_db(report.per_node_emse(k));
        cmp.node_msd_delta_db(k) =
            to_db(curve.steady_per_node_msd(k)) - to_db(report.per_node_msd(k));
    }
    cmp.max_abs_delta_db = std::max(
        {std::abs(cmp.network_emse_delta_db), std::abs(cmp.network_msd_delta_db),
         cmp.node_emse_delta_db.cwiseAbs().maxCoeff(),
         cmp.node_msd_delta_db.cwiseAbs().maxCoeff()});
    return cmp;
}

// Per-iteration decay factor of the EMSE transient, fitted by least squares
// on log(EMSE(i) - steady) over the region at least 10x above the floor.
inline double measure_convergence_rate(const LearningCurve& curve) {
    const double steady = curve.steady_emse;
    const int n = static_cast<int>(curve.emse_per_iter.size());
    if (n < 4 || !(curve.emse_per_iter(0) >= 10.0 * steady))
        throw NumericalError("measure_convergence_rate: no visible transient");
    std::vector<double> logs;
    logs.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double excess = curve.emse_per_iter(i) - steady;
        if (!(excess >= 10.0 * steady)) break;
        logs.push_back(std::log(excess));
    }
    if (logs.size() < 4)
        throw NumericalError("measure_convergence_rate: transient too short to fit");
    return std::exp(detail::ls_slope(logs));
}

}  // namespace difflms
