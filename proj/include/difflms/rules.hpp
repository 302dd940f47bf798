#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "difflms/common.hpp"
#include "difflms/topology.hpp"

namespace difflms {

// a_{lk} = 1/|N_k| over the neighborhood of k.
inline CombinationMatrix uniform_weights(const Graph& g) {
    const int n = g.n_nodes();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double inv = 1.0 / g.neighborhood_size(k);
        for (int l = 0; l < n; ++l)
            if (g.adjacent(l, k)) w(l, k) = inv;
    }
    return CombinationMatrix(std::move(w), g);
}

// a_{lk} = 1/max(|N_k|, |N_l|) off-diagonal, diagonal absorbs the remainder;
// doubly stochastic by construction.
inline CombinationMatrix metropolis_weights(const Graph& g) {
    const int n = g.n_nodes();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double off = 0.0;
        for (int l = 0; l < n; ++l) {
            if (l == k || !g.adjacent(l, k)) continue;
            w(l, k) = 1.0 / std::max<double>(g.neighborhood_size(k),
                                             g.neighborhood_size(l));
            off += w(l, k);
        }
        w(k, k) = 1.0 - off;
    }
    return CombinationMatrix(std::move(w), g);
}

// Hastings rule: a_{lk} = sigma_k^2 / max(|N_k| sigma_k^2, |N_l| sigma_l^2)
// off-diagonal. Written with the variance ratio so that equal variances
// reduce bitwise to the Metropolis weights (the rule only depends on ratios).
inline CombinationMatrix hastings_weights(const Graph& g,
                                          const Eigen::VectorXd& noise_vars) {
    const int n = g.n_nodes();
    if (static_cast<int>(noise_vars.size()) != n)
        throw ConfigError("hastings: noise_vars size must match the graph");
    if ((noise_vars.array() <= 0.0).any())
        throw ConfigError("hastings: noise variances must be strictly positive");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double off = 0.0;
        for (int l = 0; l < n; ++l) {
            if (l == k || !g.adjacent(l, k)) continue;
            const double ratio = noise_vars(l) / noise_vars(k);
            w(l, k) = 1.0 / std::max<double>(g.neighborhood_size(k),
                                             g.neighborhood_size(l) * ratio);
            off += w(l, k);
        }
        w(k, k) = 1.0 - off;
    }
    return CombinationMatrix(std::move(w), g);
}

// Relative degree-variance weights for a two-node network:
// alpha = sigma_1^{-2}/(sigma_1^{-2}+sigma_2^{-2}), beta symmetric.
struct TwoNodeWeights {
    double alpha = 0.0;
    double beta = 0.0;
};

inline TwoNodeWeights two_node_optimal_weights(const Eigen::VectorXd& noise_vars) {
    if (noise_vars.size() != 2)
        throw ConfigError("two_node_optimal_weights: exactly two variances required");
    if ((noise_vars.array() <= 0.0).any())
        throw ConfigError("two_node_optimal_weights: variances must be positive");
    const double i1 = 1.0 / noise_vars(0), i2 = 1.0 / noise_vars(1);
    return {i1 / (i1 + i2), i2 / (i1 + i2)};
}

// A = [alpha, 1-beta; 1-alpha, beta] on the complete two-node graph.
inline CombinationMatrix two_node_combination(double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
        throw ConfigError("two_node_combination: alpha, beta must lie in [0, 1]");
    Eigen::MatrixXd w(2, 2);
    w << alpha, 1.0 - beta, 1.0 - alpha, beta;
    return CombinationMatrix(std::move(w), Graph::complete(2));
}

// Recursive per-node noise-variance estimator
//   sigma^2(i) = (1-nu) sigma^2(i-1) + nu |d_k(i) - u_{k,i} w_{k,i-1}|^2.
// The first update seeds the estimate with the squared residual itself.
class NoiseEstimator {
public:
    NoiseEstimator(int n_nodes, double forget)
        : forget_(forget),
          est_(Eigen::VectorXd::Zero(n_nodes)),
          seeded_(n_nodes, false) {
        if (!(forget > 0.0 && forget <= 1.0))
            throw ConfigError("noise estimator: forget factor must lie in (0, 1]");
    }

    void update_node(int k, double residual) {
        const double r2 = residual * residual;
        if (!seeded_[k]) {
            est_(k) = r2;
            seeded_[k] = true;
        } else {
            est_(k) = (1.0 - forget_) * est_(k) + forget_ * r2;
        }
    }

    const Eigen::VectorXd& estimates() const { return est_; }
    double forget() const { return forget_; }
    bool all_positive() const { return (est_.array() > 0.0).all(); }
    // Uniform-weight warm-up horizon while one-sample estimates settle.
    int warmup_iters() const { return static_cast<int>(std::ceil(1.0 / forget_)); }

private:
    double forget_;
    Eigen::VectorXd est_;
    std::vector<bool> seeded_;
};

struct AdaptiveStep {
    CombinationMatrix combination;
    bool fallback_uniform = false;  // some estimate was non-positive
};

// Hastings weights at the current variance estimates; recomputed every
// iteration by the adaptive strategy.
inline AdaptiveStep adaptive_hastings_step(const Graph& g,
                                           const NoiseEstimator& est) {
    if (!est.all_positive()) return {uniform_weights(g), true};
    return {hastings_weights(g, est.estimates()), false};
}

}  // namespace difflms
