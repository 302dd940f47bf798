#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "difflms/common.hpp"
#include "difflms/simulator.hpp"
#include "difflms/theory.hpp"
#include "difflms/topology.hpp"

namespace difflms::io {

using nlohmann::json;

// Shortest round-trip formatting; keeps artifacts byte-stable across runs.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for hashing: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return fnv1a64(bytes.data(), bytes.size());
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    out << text;
}

// CSV columns: iteration, emse_db, msd_db, then one emse_db column per node.
inline std::string learning_curve_csv(const LearningCurve& curve) {
    std::ostringstream out;
    const int n = static_cast<int>(curve.per_node_emse.rows());
    out << "iteration,emse_db,msd_db";
    for (int k = 0; k < n; ++k) out << ",node" << (k + 1) << "_emse_db";
    out << "\n";
    for (int i = 0; i < curve.emse_per_iter.size(); ++i) {
        out << i << ',' << format_double(to_db(curve.emse_per_iter(i))) << ','
            << format_double(to_db(curve.msd_per_iter(i)));
        for (int k = 0; k < n; ++k)
            out << ',' << format_double(to_db(curve.per_node_emse(k, i)));
        out << "\n";
    }
    return out.str();
}

inline std::string operation_curve_csv(const theory::OperationCurve& curve) {
    std::ostringstream out;
    out << "mu,emse_db,mode\n";
    for (const auto& pt : curve.points)
        out << format_double(pt.mu) << ',' << format_double(to_db(pt.emse)) << ','
            << format_double(pt.mode) << "\n";
    return out.str();
}

inline json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json theory_report_json(const theory::TheoryReport& rep) {
    return json{{"strategy", rep.strategy},
                {"weights_used", rep.weights_used},
                {"network_emse", rep.network_emse},
                {"network_emse_db", to_db(rep.network_emse)},
                {"network_msd", rep.network_msd},
                {"network_msd_db", to_db(rep.network_msd)},
                {"per_node_emse", to_json(rep.per_node_emse)},
                {"per_node_msd", to_json(rep.per_node_msd)},
                {"dominant_mode", rep.dominant_mode},
                {"reliable", rep.reliable}};
}

inline json curve_summary_json(const LearningCurve& curve) {
    return json{{"steady_emse", curve.steady_emse},
                {"steady_emse_db", to_db(curve.steady_emse)},
                {"steady_msd", curve.steady_msd},
                {"steady_msd_db", to_db(curve.steady_msd)},
                {"steady_emse_stderr", curve.steady_emse_stderr},
                {"steady_per_node_emse", to_json(curve.steady_per_node_emse)},
                {"steady_per_node_msd", to_json(curve.steady_per_node_msd)},
                {"trials_used", curve.n_trials_used},
                {"trials_diverged", curve.n_trials_diverged},
                {"window_converged", curve.window_converged},
                {"window_slope_db", curve.window_slope_db}};
}

inline json comparison_json(const TheoryComparison& cmp) {
    Eigen::VectorXd ne = cmp.node_emse_delta_db, nm = cmp.node_msd_delta_db;
    return json{{"network_emse_delta_db", cmp.network_emse_delta_db},
                {"network_msd_delta_db", cmp.network_msd_delta_db},
                {"node_emse_delta_db", to_json(ne)},
                {"node_msd_delta_db", to_json(nm)},
                {"max_abs_delta_db", cmp.max_abs_delta_db}};
}

// Graph as an adjacency list of undirected edges (self-loops implied).
inline json graph_to_json(const Graph& g) {
    json edges = json::array();
    for (int k = 0; k < g.n_nodes(); ++k)
        for (int l = 0; l < k; ++l)
            if (g.adjacent(l, k)) edges.push_back({l, k});
    return json{{"n_nodes", g.n_nodes()}, {"edges", edges}};
}

inline Graph graph_from_json(const json& j) {
    if (!j.contains("n_nodes"))
        throw ConfigError("graph json: missing field n_nodes");
    const int n = j.at("n_nodes").get<int>();
    if (n < 1) throw ConfigError("graph json: n_nodes must be >= 1");
    BoolMatrix adj = BoolMatrix::Constant(n, n, false);
    adj.diagonal().setConstant(true);
    for (const auto& e : j.value("edges", json::array())) {
        if (!e.is_array() || e.size() != 2)
            throw ConfigError("graph json: edges must be [l, k] pairs");
        const int l = e[0].get<int>(), k = e[1].get<int>();
        if (l < 0 || k < 0 || l >= n || k >= n)
            throw ConfigError("graph json: edge endpoint out of range");
        adj(l, k) = adj(k, l) = true;
    }
    return Graph::from_adjacency(adj);
}

// Combination matrix as the graph plus (l, k, a_lk) weight triplets.
inline json combination_to_json(const CombinationMatrix& cm) {
    json triplets = json::array();
    const int n = cm.graph.n_nodes();
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            if (cm.weights(l, k) != 0.0)
                triplets.push_back({l, k, cm.weights(l, k)});
    json j = graph_to_json(cm.graph);
    j["weights"] = triplets;
    return j;
}

inline CombinationMatrix combination_from_json(const json& j) {
    Graph g = graph_from_json(j);
    const int n = g.n_nodes();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    if (!j.contains("weights"))
        throw ConfigError("combination json: missing field weights");
    for (const auto& t : j.at("weights")) {
        if (!t.is_array() || t.size() != 3)
            throw ConfigError("combination json: weights must be [l, k, value]");
        const int l = t[0].get<int>(), k = t[1].get<int>();
        if (l < 0 || k < 0 || l >= n || k >= n)
            throw ConfigError("combination json: weight index out of range");
        w(l, k) = t[2].get<double>();
    }
    return CombinationMatrix(std::move(w), std::move(g));
}

struct ArtifactEntry {
    std::string file;
    std::uintmax_t bytes = 0;
    std::uint64_t hash = 0;
};

inline json manifest_json(const json& config_echo, std::uint64_t seed,
                          const std::vector<ArtifactEntry>& artifacts) {
    json arts = json::array();
    for (const auto& a : artifacts) {
        char hex[24];
        std::snprintf(hex, sizeof hex, "0x%016" PRIx64, a.hash);
        arts.push_back({{"file", a.file}, {"bytes", a.bytes}, {"fnv1a64", hex}});
    }
    return json{{"schema_version", 1},
                {"seed", seed},
                {"config", config_echo},
                {"artifacts", arts}};
}

}  // namespace difflms::io
