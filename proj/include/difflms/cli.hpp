#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "difflms/common.hpp"
#include "difflms/io.hpp"
#include "difflms/model.hpp"
#include "difflms/rules.hpp"
#include "difflms/simulator.hpp"
#include "difflms/theory.hpp"
#include "difflms/topology.hpp"

namespace difflms::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kPresets[] = {
    "fig3-opcurves", "fig5-two-node", "fig6-n20", "table4-check",
    "appendixB-check"};

struct RunOptions {
    std::string preset;       // exactly one of preset / config_path
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials, iters;
    std::optional<double> tol_db;
    int threads = 1;
    bool quiet = false;  // suppress stdout tables (artifacts are unaffected)
};

struct StrategyChoice {
    StrategyKind kind = StrategyKind::standalone;
    WeightRuleKind rule = WeightRuleKind::none;
};

// Fully-resolved run description; presets and config files both produce one.
struct ResolvedConfig {
    std::string preset;  // empty for config-file runs
    NetworkModel model;
    Graph graph = Graph::complete(1);
    std::vector<StrategyChoice> strategies;
    int n_iters = 0, n_trials = 0;
    std::uint64_t seed = 0;
    double window_frac = 0.2;
    double adaptive_forget = 0.1;
    double tol_db = 0.5;
    bool simulate = true;  // theory-only presets clear this
    json echo;             // serialized form recorded in the manifest
};

namespace detail {

inline Eigen::VectorXd random_unit_vector(int dim, std::uint64_t seed) {
    RngStream rng(seed ^ 0x77e5a1d6u, 0);
    Eigen::VectorXd w(dim);
    for (int i = 0; i < dim; ++i) w(i) = rng.gaussian();
    const double norm = w.norm();
    return norm > 0 ? Eigen::VectorXd(w / norm) : Eigen::VectorXd::Unit(dim, 0);
}

inline Eigen::VectorXd vector_field(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw ConfigError(path + ": expected a non-empty array of numbers");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

inline Eigen::MatrixXd covariance_field(const json& j, int dim,
                                        const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "identity")
            return Eigen::MatrixXd::Identity(dim, dim);
        throw ConfigError(path + ": unknown covariance shorthand '" +
                          j.get<std::string>() + "' (use \"identity\")");
    }
    if (j.is_object() && j.contains("diagonal")) {
        const Eigen::VectorXd d = vector_field(j.at("diagonal"), path + ".diagonal");
        if (d.size() != dim)
            throw ConfigError(path + ".diagonal: length must equal model.dim");
        return d.asDiagonal();
    }
    if (j.is_object() && j.contains("dense")) {
        const json& rows = j.at("dense");
        if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
            throw ConfigError(path + ".dense: expected dim rows");
        Eigen::MatrixXd m(dim, dim);
        for (int r = 0; r < dim; ++r) {
            const Eigen::VectorXd row = vector_field(
                rows[r], path + ".dense[" + std::to_string(r) + "]");
            if (row.size() != dim)
                throw ConfigError(path + ".dense: rows must have dim entries");
            m.row(r) = row.transpose();
        }
        return m;
    }
    throw ConfigError(path + ": expected \"identity\", {diagonal: [...]}, or {dense: [[...]]}");
}

inline StrategyKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "standalone") return StrategyKind::standalone;
    if (s == "block") return StrategyKind::block;
    if (s == "incremental") return StrategyKind::incremental;
    if (s == "cta") return StrategyKind::cta;
    if (s == "atc") return StrategyKind::atc;
    throw ConfigError(path + ": unknown strategy kind '" + s + "'");
}

inline std::string strategy_label(const StrategyChoice& c) {
    switch (c.kind) {
        case StrategyKind::standalone: return "standalone";
        case StrategyKind::block: return "block";
        case StrategyKind::incremental: return "incremental";
        default: break;
    }
    std::string base = strategy_name(c.kind);
    switch (c.rule) {
        case WeightRuleKind::two_node_optimal: return base + "-optimal";
        case WeightRuleKind::uniform: return base + "-uniform";
        case WeightRuleKind::metropolis: return base + "-metropolis";
        case WeightRuleKind::hastings: return base + "-hastings";
        case WeightRuleKind::adaptive_hastings: return base + "-adaptive-hastings";
        default: return base;
    }
}

inline json strategies_echo(const std::vector<StrategyChoice>& strategies) {
    json arr = json::array();
    for (const auto& c : strategies) {
        json e{{"kind", strategy_name(c.kind)}};
        if (c.rule != WeightRuleKind::none) e["rule"] = rule_name(c.rule);
        arr.push_back(e);
    }
    return arr;
}

inline json model_echo(const NetworkModel& m, const Graph& g) {
    json cov;
    if (m.regressor_cov.isApprox(
            Eigen::MatrixXd::Identity(m.dim, m.dim)))
        cov = "identity";
    else {
        json rows = json::array();
        for (int r = 0; r < m.dim; ++r) {
            json row = json::array();
            for (int c = 0; c < m.dim; ++c) row.push_back(m.regressor_cov(r, c));
            rows.push_back(row);
        }
        cov = json{{"dense", rows}};
    }
    return json{{"n_nodes", m.n_nodes},
                {"dim", m.dim},
                {"noise_vars", io::to_json(m.noise_vars)},
                {"regressor_cov", cov},
                {"step_size", m.step_size},
                {"centralized_step_size", m.centralized_step_size},
                {"w_true", io::to_json(m.w_true)},
                {"topology", io::graph_to_json(g)}};
}

}  // namespace detail

// ---- presets ----

inline ResolvedConfig preset_fig5_two_node() {
    ResolvedConfig c;
    c.preset = "fig5-two-node";
    c.seed = 42;
    Eigen::VectorXd vars(2);
    vars << 0.01, 0.002;
    c.model = NetworkModel::rate_matched(detail::random_unit_vector(10, c.seed),
                                         vars, Eigen::MatrixXd::Identity(10, 10),
                                         0.01);
    c.graph = Graph::complete(2);
    c.strategies = {
        {StrategyKind::atc, WeightRuleKind::two_node_optimal},
        {StrategyKind::cta, WeightRuleKind::two_node_optimal},
        {StrategyKind::atc, WeightRuleKind::uniform},
        {StrategyKind::cta, WeightRuleKind::uniform},
        {StrategyKind::block, WeightRuleKind::none},
        {StrategyKind::incremental, WeightRuleKind::none},
        {StrategyKind::standalone, WeightRuleKind::none},
    };
    c.n_iters = 5000;
    c.n_trials = 500;
    c.tol_db = 0.5;
    return c;
}

inline ResolvedConfig preset_fig6_n20(std::uint64_t seed) {
    ResolvedConfig c;
    c.preset = "fig6-n20";
    c.seed = seed;
    const int n = 20;
    RngStream topo_rng(seed ^ 0xf16a20u, 0);
    c.graph = random_connected_graph(n, 12, topo_rng);
    // Log-uniform noise profile on [1e-3, 1e-1], generated and recorded so
    // the run is exactly reproducible.
    Eigen::VectorXd vars(n);
    for (int k = 0; k < n; ++k)
        vars(k) = std::exp(std::log(1e-3) +
                           topo_rng.uniform() * (std::log(1e-1) - std::log(1e-3)));
    c.model = NetworkModel::rate_matched(detail::random_unit_vector(3, seed), vars,
                                         Eigen::MatrixXd::Identity(3, 3), 0.005);
    c.strategies = {
        {StrategyKind::block, WeightRuleKind::none},
        {StrategyKind::atc, WeightRuleKind::metropolis},
        {StrategyKind::atc, WeightRuleKind::hastings},
        {StrategyKind::atc, WeightRuleKind::adaptive_hastings},
        {StrategyKind::standalone, WeightRuleKind::none},
    };
    c.n_iters = 4000;
    c.n_trials = 50;
    c.tol_db = 1.0;
    return c;
}

inline ResolvedConfig preset_fig3_opcurves() {
    ResolvedConfig c = preset_fig5_two_node();
    c.preset = "fig3-opcurves";
    Eigen::VectorXd vars(2);
    vars << 0.01, 0.001;
    c.model = NetworkModel::rate_matched(c.model.w_true, vars,
                                         c.model.regressor_cov, 0.01);
    c.simulate = false;
    return c;
}

inline ResolvedConfig preset_table4_check() {
    ResolvedConfig c = preset_fig5_two_node();
    c.preset = "table4-check";
    c.simulate = false;
    return c;
}

inline ResolvedConfig preset_weight_optimum_check() {
    ResolvedConfig c = preset_fig5_two_node();
    c.preset = "appendixB-check";
    c.model = NetworkModel::rate_matched(c.model.w_true, c.model.noise_vars,
                                         c.model.regressor_cov, 0.001);
    c.simulate = false;
    return c;
}

// ---- config-file parsing ----

inline ResolvedConfig parse_config_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    if (j.value("schema_version", 0) != 1)
        throw ConfigError("schema_version: expected 1");
    if (!j.contains("model")) throw ConfigError("model: required object missing");
    const json& jm = j.at("model");

    ResolvedConfig c;
    const json& js = j.contains("simulation") ? j.at("simulation") : json::object();
    c.seed = js.value("seed", std::uint64_t{42});
    c.n_iters = js.value("n_iters", 5000);
    c.n_trials = js.value("n_trials", 500);
    c.window_frac = js.value("steady_window_frac", 0.2);
    c.adaptive_forget = js.value("adaptive_forget", 0.1);
    c.tol_db = j.value("tolerance_db", 0.5);
    if (c.n_iters < 1) throw ConfigError("simulation.n_iters: must be >= 1");
    if (c.n_trials < 1) throw ConfigError("simulation.n_trials: must be >= 1");

    if (!jm.contains("dim")) throw ConfigError("model.dim: required");
    const int dim = jm.at("dim").get<int>();
    if (dim < 1) throw ConfigError("model.dim: must be >= 1");
    if (!jm.contains("noise_vars")) throw ConfigError("model.noise_vars: required");
    const Eigen::VectorXd vars =
        detail::vector_field(jm.at("noise_vars"), "model.noise_vars");
    for (int k = 0; k < vars.size(); ++k)
        if (!(vars(k) > 0.0))
            throw ConfigError("model.noise_vars[" + std::to_string(k) +
                              "]: must be > 0");
    const int n = static_cast<int>(vars.size());
    if (!jm.contains("step_size")) throw ConfigError("model.step_size: required");
    const double mu = jm.at("step_size").get<double>();
    if (!(mu > 0)) throw ConfigError("model.step_size: must be > 0");
    const Eigen::MatrixXd cov = detail::covariance_field(
        jm.value("regressor_cov", json("identity")), dim, "model.regressor_cov");
    Eigen::VectorXd w_true;
    if (jm.contains("w_true")) {
        w_true = detail::vector_field(jm.at("w_true"), "model.w_true");
        if (w_true.size() != dim)
            throw ConfigError("model.w_true: length must equal model.dim");
    } else {
        w_true = detail::random_unit_vector(dim, c.seed);
    }
    // mu' defaults to mu/N; direct assignment is an expert override.
    if (jm.contains("centralized_step_size_override")) {
        const double mup = jm.at("centralized_step_size_override").get<double>();
        if (!(mup > 0))
            throw ConfigError("model.centralized_step_size_override: must be > 0");
        c.model = NetworkModel::with_step_sizes(w_true, vars, cov, mu, mup);
    } else {
        c.model = NetworkModel::rate_matched(w_true, vars, cov, mu);
    }

    const json& jt = j.contains("topology") ? j.at("topology") : json{{"type", "complete"}};
    const std::string type = jt.value("type", std::string("complete"));
    if (type == "complete") {
        c.graph = Graph::complete(n);
    } else if (type == "random-connected") {
        RngStream rng(c.seed ^ 0xf16a20u, 0);
        c.graph = random_connected_graph(n, jt.value("degree_target", 5), rng);
    } else if (type == "edges") {
        json gj{{"n_nodes", n}, {"edges", jt.value("edges", json::array())}};
        c.graph = io::graph_from_json(gj);
    } else {
        throw ConfigError("topology.type: expected complete | random-connected | edges");
    }
    if (!c.graph.connected())
        throw ConfigError("topology: graph must be connected");

    if (!j.contains("strategies") || !j.at("strategies").is_array() ||
        j.at("strategies").empty())
        throw ConfigError("strategies: non-empty array required");
    int idx = 0;
    for (const auto& e : j.at("strategies")) {
        const std::string path = "strategies[" + std::to_string(idx++) + "]";
        if (!e.is_object() || !e.contains("kind"))
            throw ConfigError(path + ".kind: required");
        StrategyChoice sc;
        sc.kind = detail::parse_kind(e.at("kind").get<std::string>(), path + ".kind");
        const std::string rule = e.value("rule", std::string(""));
        sc.rule = parse_rule(rule);
        const bool diffusion =
            sc.kind == StrategyKind::cta || sc.kind == StrategyKind::atc;
        if (diffusion && sc.rule == WeightRuleKind::none)
            throw ConfigError(path + ".rule: required for cta/atc");
        if (!diffusion && sc.rule != WeightRuleKind::none)
            throw ConfigError(path + ".rule: only valid for cta/atc");
        if (sc.rule == WeightRuleKind::two_node_optimal && n != 2)
            throw ConfigError(path + ".rule: two-node-optimal needs exactly 2 nodes");
        c.strategies.push_back(sc);
    }
    return c;
}

inline ResolvedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

inline ResolvedConfig resolve(const RunOptions& opts) {
    const bool has_preset = !opts.preset.empty();
    const bool has_config = !opts.config_path.empty();
    if (has_preset == has_config)
        throw ConfigError("exactly one of --preset or --config is required");
    ResolvedConfig c;
    if (has_config) {
        c = load_config_file(opts.config_path);
    } else if (opts.preset == "fig5-two-node") {
        c = preset_fig5_two_node();
    } else if (opts.preset == "fig6-n20") {
        c = preset_fig6_n20(opts.seed.value_or(42));
    } else if (opts.preset == "fig3-opcurves") {
        c = preset_fig3_opcurves();
    } else if (opts.preset == "table4-check") {
        c = preset_table4_check();
    } else if (opts.preset == "appendixB-check") {
        c = preset_weight_optimum_check();
    } else {
        throw ConfigError("unknown preset: " + opts.preset);
    }
    if (opts.seed) {
        c.seed = *opts.seed;
        if (c.preset == "fig6-n20" && !has_config) c = preset_fig6_n20(*opts.seed);
    }
    if (opts.trials) c.n_trials = *opts.trials;
    if (opts.iters) c.n_iters = *opts.iters;
    if (opts.tol_db) c.tol_db = *opts.tol_db;

    c.echo = json{{"preset", c.preset},
                  {"model", detail::model_echo(c.model, c.graph)},
                  {"strategies", detail::strategies_echo(c.strategies)},
                  {"simulation",
                   json{{"n_iters", c.n_iters},
                        {"n_trials", c.n_trials},
                        {"seed", c.seed},
                        {"steady_window_frac", c.window_frac},
                        {"adaptive_forget", c.adaptive_forget}}},
                  {"tolerance_db", c.tol_db}};
    return c;
}

// Theory prediction matched to one strategy choice.
inline theory::TheoryReport theory_for(const ResolvedConfig& c,
                                       const StrategyChoice& sc) {
    const NetworkModel& m = c.model;
    if (sc.kind == StrategyKind::standalone) return theory::standalone_report(m);
    if (is_centralized(sc.kind)) {
        theory::TheoryReport rep = theory::n_node_block_inc(m);
        rep.strategy = strategy_name(sc.kind);
        return rep;
    }
    // Diffusion: reduced-form per-node sums with the resolved static weights;
    // the adaptive rule is predicted by its static-Hastings limit.
    CombinationMatrix cm = [&]() -> CombinationMatrix {
        switch (sc.rule) {
            case WeightRuleKind::uniform: return uniform_weights(c.graph);
            case WeightRuleKind::metropolis: return metropolis_weights(c.graph);
            case WeightRuleKind::hastings:
            case WeightRuleKind::adaptive_hastings:
                return hastings_weights(c.graph, m.noise_vars);
            case WeightRuleKind::two_node_optimal: {
                const TwoNodeWeights w = two_node_optimal_weights(m.noise_vars);
                return two_node_combination(w.alpha, w.beta);
            }
            default:
                throw ConfigError("theory_for: diffusion strategy needs a rule");
        }
    }();
    const Eigen::MatrixXd eye =
        Eigen::MatrixXd::Identity(m.n_nodes, m.n_nodes);
    theory::TheoryReport rep =
        sc.kind == StrategyKind::cta
            ? theory::general_diffusion_emse_msd(m, cm.weights, eye)
            : theory::general_diffusion_emse_msd(m, eye, cm.weights);
    rep.strategy = strategy_name(sc.kind);
    rep.weights_used = rule_name(sc.rule);
    return rep;
}

struct StrategyOutcome {
    std::string label;
    theory::TheoryReport theory;
    LearningCurve curve;
    TheoryComparison comparison;
    std::optional<double> fitted_rate;
};

// ---- command entry point ----

inline int run_command(const RunOptions& opts) {
    const ResolvedConfig c = resolve(opts);
    fs::create_directories(opts.out_dir);
    std::vector<io::ArtifactEntry> artifacts;
    auto emit = [&](const std::string& name, const std::string& text) {
        const fs::path p = fs::path(opts.out_dir) / name;
        io::write_text_file(p, text);
        artifacts.push_back({name, fs::file_size(p), io::fnv1a64_file(p)});
    };

    int exit_code = 0;
    json summary{{"schema_version", 1}, {"preset", c.preset}};

    if (c.preset == "fig3-opcurves") {
        std::vector<double> grid;
        for (int i = 0; i < 40; ++i)
            grid.push_back(std::pow(10.0, -3.0 + 1.7 * i / 39.0));  // 1e-3 .. 5e-2
        for (theory::TableStrategy s : theory::kAllTableStrategies) {
            const auto curve = theory::operation_curve(c.model, s, grid);
            emit(std::string("opcurve_") + theory::name(s) + ".csv",
                 io::operation_curve_csv(curve));
        }
        summary["mu_grid_points"] = 40;
        if (!opts.quiet)
            std::cout << "operation curves written for "
                      << static_cast<int>(theory::kAllTableStrategies.size())
                      << " strategies\n";
    } else if (c.preset == "table4-check") {
        const auto ord = theory::strategy_orderings(c.model);
        json rows = json::array();
        std::ostringstream txt;
        txt << "network EMSE (theory, mu = " << c.model.step_size << ")\n";
        for (theory::TableStrategy s : theory::kAllTableStrategies) {
            const auto rep = theory::two_node_table(c.model, s);
            rows.push_back(io::theory_report_json(rep));
            txt << "  " << theory::name(s) << ": "
                << io::format_double(to_db(rep.network_emse)) << " dB\n";
        }
        txt << "ascending order:";
        for (auto s : ord.ascending) txt << ' ' << theory::name(s);
        txt << "\nsmall-step condition (c2/c1 < (arth-harm)/(2arth-harm)): "
            << (ord.small_step_condition ? "holds" : "violated") << "\n";
        summary["reports"] = rows;
        summary["small_step_condition"] = ord.small_step_condition;
        if (!opts.quiet) std::cout << txt.str();
        emit("table4.txt", txt.str());
    } else if (c.preset == "appendixB-check") {
        const auto rep = theory::verify_optimal_weights(c.model, 200);
        summary["weight_optimum"] =
            json{{"alpha_analytic", rep.alpha_analytic},
                 {"beta_analytic", rep.beta_analytic},
                 {"alpha_grid_cta", rep.alpha_grid_cta},
                 {"beta_grid_cta", rep.beta_grid_cta},
                 {"alpha_grid_atc", rep.alpha_grid_atc},
                 {"beta_grid_atc", rep.beta_grid_atc},
                 {"alpha_min_cta", rep.alpha_min_cta},
                 {"beta_min_cta", rep.beta_min_cta},
                 {"alpha_min_atc", rep.alpha_min_atc},
                 {"beta_min_atc", rep.beta_min_atc},
                 {"cell", rep.cell},
                 {"cta_within_cell", rep.cta_within_cell},
                 {"atc_within_cell", rep.atc_within_cell},
                 {"optimum_no_worse_than_uniform", rep.optimum_no_worse_than_uniform}};
        const bool ok =
            rep.cta_within_cell && rep.atc_within_cell && rep.optimum_no_worse_than_uniform;
        if (!opts.quiet)
            std::cout << "EMSE-optimal weights: cta (" << rep.alpha_min_cta << ", "
                      << rep.beta_min_cta << "), atc (" << rep.alpha_min_atc << ", "
                      << rep.beta_min_atc << "), analytic (" << rep.alpha_analytic
                      << ", " << rep.beta_analytic << ") -> "
                      << (ok ? "within one cell" : "MISMATCH") << "\n";
        if (!ok) exit_code = 1;
    } else {
        // Simulation suite (fig5-two-node, fig6-n20, or a config file).
        std::vector<StrategyOutcome> outcomes;
        bool all_within = true;
        for (const StrategyChoice& sc : c.strategies) {
            StrategyOutcome out;
            out.label = detail::strategy_label(sc);
            out.theory = theory_for(c, sc);

            ExperimentSpec spec;
            spec.model = c.model;
            spec.graph = c.graph;
            spec.strategy = sc.kind;
            spec.rule = sc.rule;
            spec.n_iters = c.n_iters;
            spec.n_trials = c.n_trials;
            spec.seed = c.seed;
            spec.steady_window_frac = c.window_frac;
            spec.adaptive_forget = c.adaptive_forget;
            spec.n_threads = opts.threads;
            out.curve = run_experiment(spec);
            out.comparison = compare_to_theory(out.curve, out.theory);
            try {
                out.fitted_rate = measure_convergence_rate(out.curve);
            } catch (const NumericalError&) {
                out.fitted_rate.reset();
            }
            all_within = all_within && out.comparison.within(c.tol_db);
            emit("curves_" + out.label + ".csv", io::learning_curve_csv(out.curve));
            outcomes.push_back(std::move(out));
        }

        // Human-readable ordering table, most accurate strategy first.
        std::vector<const StrategyOutcome*> order;
        for (const auto& o : outcomes) order.push_back(&o);
        std::sort(order.begin(), order.end(),
                  [](const StrategyOutcome* a, const StrategyOutcome* b) {
                      return a->curve.steady_emse < b->curve.steady_emse;
                  });
        std::ostringstream txt;
        txt << "strategy, simulated EMSE (dB), theory EMSE (dB), delta (dB)\n";
        for (const auto* o : order) {
            char line[160];
            std::snprintf(line, sizeof line, "%-24s %10.3f %10.3f %+8.3f\n",
                          o->label.c_str(), to_db(o->curve.steady_emse),
                          to_db(o->theory.network_emse),
                          o->comparison.network_emse_delta_db);
            txt << line;
        }
        if (!opts.quiet) std::cout << txt.str();
        emit("ordering.txt", txt.str());

        json per_strategy = json::array();
        for (const auto& o : outcomes) {
            json e{{"label", o.label},
                   {"theory", io::theory_report_json(o.theory)},
                   {"simulation", io::curve_summary_json(o.curve)},
                   {"comparison", io::comparison_json(o.comparison)},
                   {"within_tolerance", o.comparison.within(c.tol_db)}};
            if (o.fitted_rate) e["fitted_rate"] = *o.fitted_rate;
            per_strategy.push_back(e);
        }
        summary["strategies"] = per_strategy;
        summary["tolerance_db"] = c.tol_db;
        summary["all_within_tolerance"] = all_within;
        json asc = json::array();
        for (const auto* o : order) asc.push_back(o->label);
        summary["ascending_by_simulated_emse"] = asc;

        if (c.preset == "fig6-n20") {
            auto find = [&](const std::string& label) -> const StrategyOutcome* {
                for (const auto& o : outcomes)
                    if (o.label == label) return &o;
                return nullptr;
            };
            const auto* blk = find("block");
            const auto* met = find("atc-metropolis");
            const auto* has = find("atc-hastings");
            const auto* ada = find("atc-adaptive-hastings");
            if (blk && met && has && ada) {
                const double tr_rv = c.model.noise_vars.sum();
                const double tr_rv_inv = c.model.noise_vars.cwiseInverse().sum();
                const int n = c.model.n_nodes;
                const double predicted_gain_db =
                    to_db(tr_rv / (n * n) * tr_rv_inv);
                const double gains_db[] = {
                    to_db(met->curve.steady_emse) - to_db(blk->curve.steady_emse),
                    to_db(blk->curve.steady_emse) - to_db(has->curve.steady_emse),
                    to_db(ada->curve.steady_emse) - to_db(has->curve.steady_emse)};
                summary["fig6"] =
                    json{{"metropolis_minus_block_db", gains_db[0]},
                         {"hastings_gain_over_block_db", gains_db[1]},
                         {"predicted_hastings_gain_db", predicted_gain_db},
                         {"adaptive_minus_static_hastings_db", gains_db[2]}};
                emit("topology.json",
                     io::combination_to_json(
                         hastings_weights(c.graph, c.model.noise_vars))
                         .dump(2) +
                         "\n");
            }
        }
        if (!all_within) exit_code = 1;
    }

    emit("summary.json", summary.dump(2) + "\n");
    const json manifest = io::manifest_json(c.echo, c.seed, artifacts);
    io::write_text_file(fs::path(opts.out_dir) / "manifest.json",
                        manifest.dump(2) + "\n");
    return exit_code;
}

}  // namespace difflms::cli
