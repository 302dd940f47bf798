#include <catch_amalgamated.hpp>

#include <Eigen/Core>
#include <cmath>

#include "difflms/rules.hpp"
#include "difflms/simulator.hpp"
#include "difflms/theory.hpp"

using namespace difflms;

namespace {

ExperimentSpec small_fig5(StrategyKind kind, WeightRuleKind rule,
                          int trials = 80, int iters = 1500) {
    Eigen::VectorXd vars(2);
    vars << 0.01, 0.002;
    ExperimentSpec spec;
    spec.model = NetworkModel::rate_matched(
        Eigen::VectorXd::Ones(10).normalized() * 3.0, vars,
        Eigen::MatrixXd::Identity(10, 10), 0.01);
    spec.graph = Graph::complete(2);
    spec.strategy = kind;
    spec.rule = rule;
    spec.n_iters = iters;
    spec.n_trials = trials;
    spec.seed = 99;
    return spec;
}

LearningCurve synthetic_curve(int iters, double a, double r, double c) {
    LearningCurve curve;
    curve.per_node_emse.resize(1, iters);
    curve.emse_per_iter.resize(iters);
    curve.msd_per_iter.resize(iters);
    for (int i = 0; i < iters; ++i) {
        curve.emse_per_iter(i) = a * std::pow(r, i) + c;
        curve.per_node_emse(0, i) = curve.emse_per_iter(i);
        curve.msd_per_iter(i) = 2.0 * curve.emse_per_iter(i);
    }
    curve.steady_emse = steady_state(curve, 0.2).emse;
    curve.steady_msd = steady_state(curve, 0.2).msd;
    return curve;
}

}  // namespace

TEST_CASE("steady_state on a constant curve returns the constant") {
    const LearningCurve curve = synthetic_curve(100, 0.0, 0.5, 3e-4);
    const SteadyEstimate st = steady_state(curve, 0.2);
    REQUIRE(st.emse == Catch::Approx(3e-4));
    REQUIRE(st.msd == Catch::Approx(6e-4));
    REQUIRE(st.converged);
}

TEST_CASE("steady_state over the whole curve is the global mean") {
    const LearningCurve curve = synthetic_curve(50, 0.0, 0.5, 2e-3);
    const SteadyEstimate st = steady_state(curve, 1.0);
    REQUIRE(st.emse == Catch::Approx(curve.emse_per_iter.mean()));
}

TEST_CASE("steady_state flags a still-decaying tail") {
    // 1.5 dB of drift across the final window.
    LearningCurve curve;
    const int iters = 200;
    curve.emse_per_iter.resize(iters);
    curve.msd_per_iter.resize(iters);
    curve.per_node_emse.resize(1, iters);
    for (int i = 0; i < iters; ++i) {
        curve.emse_per_iter(i) = 1e-3 * std::pow(10.0, -1.5 * i / iters / 10.0);
        curve.msd_per_iter(i) = curve.emse_per_iter(i);
    }
    REQUIRE_FALSE(steady_state(curve, 0.2).converged);
}

TEST_CASE("steady_state rejects an over-long window") {
    const LearningCurve curve = synthetic_curve(10, 0.0, 0.5, 1e-3);
    REQUIRE_THROWS_AS(steady_state(curve, 1.5), ConfigError);
}

TEST_CASE("compare_to_theory returns zero deltas on an exact match") {
    LearningCurve curve = synthetic_curve(100, 0.0, 0.5, 3e-4);
    curve.steady_per_node_emse = Eigen::VectorXd::Constant(1, 3e-4);
    curve.steady_per_node_msd = Eigen::VectorXd::Constant(1, 6e-4);
    theory::TheoryReport rep;
    rep.per_node_emse = Eigen::VectorXd::Constant(1, 3e-4);
    rep.per_node_msd = Eigen::VectorXd::Constant(1, 6e-4);
    rep.network_emse = 3e-4;
    rep.network_msd = 6e-4;
    const TheoryComparison cmp = compare_to_theory(curve, rep);
    REQUIRE(cmp.max_abs_delta_db == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(cmp.within(0.5));

    rep.network_emse = 6e-4;  // deliberately wrong value: negative control
    const TheoryComparison off = compare_to_theory(curve, rep);
    REQUIRE(off.network_emse_delta_db == Catch::Approx(-10 * std::log10(2.0)));
    REQUIRE_FALSE(off.within(0.5));
}

TEST_CASE("measure_convergence_rate recovers a synthetic decay factor") {
    for (double r : {0.95, 0.985, 0.999}) {
        const LearningCurve curve = synthetic_curve(4000, 1.0, r, 1e-4);
        REQUIRE(measure_convergence_rate(curve) == Catch::Approx(r).epsilon(0.01));
    }
    const LearningCurve flat = synthetic_curve(100, 0.0, 0.5, 1e-4);
    REQUIRE_THROWS_AS(measure_convergence_rate(flat), NumericalError);
}

TEST_CASE("noise-free experiments drive the error to zero") {
    ExperimentSpec spec = small_fig5(StrategyKind::standalone, WeightRuleKind::none,
                                     1, 3000);
    spec.model = NetworkModel::rate_matched(spec.model.w_true,
                                            Eigen::VectorXd::Zero(2),
                                            spec.model.regressor_cov, 0.01);
    const LearningCurve curve = run_experiment(spec);
    REQUIRE(curve.steady_emse < 1e-20);
    REQUIRE(curve.steady_msd < 1e-20);
}

TEST_CASE("zero noise drives every strategy's deviation to zero") {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    const struct {
        StrategyKind kind;
        WeightRuleKind rule;
    } plan[] = {{StrategyKind::standalone, WeightRuleKind::none},
                {StrategyKind::block, WeightRuleKind::none},
                {StrategyKind::incremental, WeightRuleKind::none},
                {StrategyKind::cta, WeightRuleKind::uniform},
                {StrategyKind::atc, WeightRuleKind::uniform}};
    for (const auto& p : plan) {
        ExperimentSpec spec = small_fig5(p.kind, p.rule, 16, 400);
        spec.model = NetworkModel::rate_matched(spec.model.w_true, zero,
                                                spec.model.regressor_cov, 0.05);
        const LearningCurve curve = run_experiment(spec);
        REQUIRE(curve.msd_per_iter(399) < 1e-9 * curve.msd_per_iter(0));
        for (int i = 50; i < 400; i += 50)  // coarse-grained monotone decrease
            REQUIRE(curve.msd_per_iter(i) < curve.msd_per_iter(i - 50));
    }
}

TEST_CASE("doubling the trial count shrinks the steady-state stderr by sqrt(2)") {
    ExperimentSpec spec = small_fig5(StrategyKind::standalone, WeightRuleKind::none,
                                     120, 1200);
    const double se1 = run_experiment(spec).steady_emse_stderr;
    spec.n_trials = 240;
    const double se2 = run_experiment(spec).steady_emse_stderr;
    REQUIRE(se1 / se2 == Catch::Approx(std::sqrt(2.0)).epsilon(0.25));
}

TEST_CASE("experiments are reproducible across thread counts and seeds differ") {
    ExperimentSpec spec = small_fig5(StrategyKind::atc, WeightRuleKind::uniform,
                                     30, 400);
    const LearningCurve c1 = run_experiment(spec);
    spec.n_threads = 4;
    const LearningCurve c4 = run_experiment(spec);
    REQUIRE(c1.emse_per_iter == c4.emse_per_iter);
    REQUIRE(c1.per_node_emse == c4.per_node_emse);
    REQUIRE(c1.msd_per_iter == c4.msd_per_iter);
    REQUIRE(c1.steady_emse == c4.steady_emse);
    spec.seed = 100;
    const LearningCurve other = run_experiment(spec);
    REQUIRE(other.steady_emse != c1.steady_emse);
}

TEST_CASE("steady EMSE scales with the noise floor") {
    ExperimentSpec spec = small_fig5(StrategyKind::standalone, WeightRuleKind::none,
                                     60, 1500);
    const LearningCurve base = run_experiment(spec);
    spec.model = NetworkModel::rate_matched(spec.model.w_true,
                                            4.0 * spec.model.noise_vars,
                                            spec.model.regressor_cov, 0.01);
    const LearningCurve scaled = run_experiment(spec);
    REQUIRE(scaled.steady_emse / base.steady_emse == Catch::Approx(4.0).epsilon(0.05));
}

TEST_CASE("simulated steady state sits near the closed-form prediction") {
    ExperimentSpec spec = small_fig5(StrategyKind::atc, WeightRuleKind::two_node_optimal,
                                     150, 2500);
    const LearningCurve curve = run_experiment(spec);
    const theory::TheoryReport rep =
        theory::two_node_table(spec.model, theory::TableStrategy::opt_atc);
    const TheoryComparison cmp = compare_to_theory(curve, rep);
    REQUIRE(cmp.within(0.5));
    REQUIRE(curve.window_converged);
}

TEST_CASE("unstable configurations are rejected before simulating") {
    ExperimentSpec spec = small_fig5(StrategyKind::standalone, WeightRuleKind::none);
    spec.model = NetworkModel::rate_matched(spec.model.w_true, spec.model.noise_vars,
                                            spec.model.regressor_cov, 0.8);
    REQUIRE_THROWS_AS(run_experiment(spec), NumericalError);
}

TEST_CASE("mean-square divergence aborts with a diagnostic") {
    // mu = 0.3 with M = 20 passes the mean-stability gate (mode = 0.4) but is
    // mean-square unstable for Gaussian regressors.
    ExperimentSpec spec;
    spec.model = NetworkModel::rate_matched(
        Eigen::VectorXd::Ones(20), Eigen::VectorXd::Constant(1, 0.01),
        Eigen::MatrixXd::Identity(20, 20), 0.3);
    spec.graph = Graph::complete(1);
    spec.strategy = StrategyKind::standalone;
    spec.n_iters = 4000;
    spec.n_trials = 10;
    spec.seed = 3;
    REQUIRE_THROWS_AS(run_experiment(spec), NumericalError);
}

TEST_CASE("adaptive hastings weights settle near the static rule") {
    Eigen::VectorXd vars(3);
    vars << 0.04, 0.008, 0.02;
    ExperimentSpec spec;
    spec.model = NetworkModel::rate_matched(Eigen::VectorXd::Ones(4), vars,
                                            Eigen::MatrixXd::Identity(4, 4), 0.01);
    spec.graph = Graph::complete(3);

    // Drive the adaptive loop directly and time-average the weights.
    NoiseEstimator est(3, 0.1);
    StrategyState state = StrategyState::init(StrategyKind::atc, 3, 4);
    RngStream rng(17, 0);
    DataSample sample;
    ErrorRecord rec;
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(3, 3);
    Eigen::VectorXd avg_est = Eigen::VectorXd::Zero(3);
    const int iters = 30000, warmup = est.warmup_iters();
    int counted = 0;
    for (int i = 0; i < iters; ++i) {
        generate_sample_into(spec.model, rng, sample);
        for (int k = 0; k < 3; ++k)
            est.update_node(k, sample.measurements(k) -
                                   sample.regressors.row(k).dot(state.estimates.col(k)));
        const CombinationMatrix cm = i < warmup
                                         ? uniform_weights(spec.graph)
                                         : adaptive_hastings_step(spec.graph, est)
                                               .combination;
        if (i >= 500) {
            avg += cm.weights;
            avg_est += est.estimates();
            ++counted;
        }
        step_atc(state, sample, spec.model, cm, rec);
    }
    avg /= counted;
    avg_est /= counted;
    const Eigen::MatrixXd target = hastings_weights(spec.graph, vars).weights;
    // Weights at the estimator's long-run mean converge to the static rule.
    const Eigen::MatrixXd settled = hastings_weights(spec.graph, avg_est).weights;
    REQUIRE(((settled - target).cwiseAbs().array() / target.array()).maxCoeff() <
            0.05);
    // The per-iteration average carries the EWMA inverse-moment bias of about
    // 2*nu/(2-nu) on the variance-ratio entries.
    REQUIRE(((avg - target).cwiseAbs().array() / target.array()).maxCoeff() <
            2.0 * (2.0 * 0.1 / 1.9));
}

TEST_CASE("general (P,Q) experiments track the reduced-form prediction") {
    ExperimentSpec spec = small_fig5(StrategyKind::general_pq, WeightRuleKind::none,
                                     150, 2500);
    Eigen::MatrixXd p(2, 2), q(2, 2);
    p << 0.7, 0.4, 0.3, 0.6;
    q << 0.2, 0.5, 0.8, 0.5;
    spec.p_matrix = p;
    spec.q_matrix = q;
    const LearningCurve curve = run_experiment(spec);
    const theory::TheoryReport rep = theory::general_diffusion_emse_msd(
        spec.model, p, q);
    REQUIRE(compare_to_theory(curve, rep).within(0.5));
}

TEST_CASE("run_experiment validates its configuration") {
    ExperimentSpec spec = small_fig5(StrategyKind::atc, WeightRuleKind::none);
    REQUIRE_THROWS_AS(run_experiment(spec), ConfigError);  // missing rule
    spec = small_fig5(StrategyKind::block, WeightRuleKind::adaptive_hastings);
    REQUIRE_THROWS_AS(run_experiment(spec), ConfigError);  // adaptive needs diffusion
    spec = small_fig5(StrategyKind::standalone, WeightRuleKind::none);
    spec.n_iters = 0;
    REQUIRE_THROWS_AS(run_experiment(spec), ConfigError);
}
