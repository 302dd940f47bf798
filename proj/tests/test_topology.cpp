#include <catch_amalgamated.hpp>

#include <Eigen/Core>
#include <queue>

#include "difflms/io.hpp"
#include "difflms/rng.hpp"
#include "difflms/rules.hpp"
#include "difflms/topology.hpp"

using namespace difflms;

namespace {

// Independent reachability oracle (queue-based BFS over the adjacency).
bool bfs_connected(const Graph& g) {
    const int n = g.n_nodes();
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v)
            if (v != u && g.adjacent(v, u) && !seen[v]) {
                seen[v] = true;
                ++count;
                q.push(v);
            }
    }
    return count == n;
}

CombinationMatrix lifted(Eigen::MatrixXd w) {
    const int n = static_cast<int>(w.rows());
    return CombinationMatrix(std::move(w), Graph::complete(n));
}

Eigen::MatrixXd random_left_stochastic(int n, RngStream& rng) {
    Eigen::MatrixXd w(n, n);
    for (int k = 0; k < n; ++k) {
        double sum = 0;
        for (int l = 0; l < n; ++l) {
            w(l, k) = 0.05 + rng.uniform();
            sum += w(l, k);
        }
        w.col(k) /= sum;
    }
    return w;
}

}  // namespace

TEST_CASE("validate: identity matrix is left-stochastic but not primitive") {
    const ValidationReport r = validate(lifted(Eigen::MatrixXd::Identity(2, 2)));
    REQUIRE(r.left_stochastic);
    REQUIRE_FALSE(r.primitive);
    REQUIRE_FALSE(r.support_ok);
}

TEST_CASE("validate: uniform two-node matrix is doubly stochastic and primitive") {
    const ValidationReport r = validate(lifted(Eigen::MatrixXd::Constant(2, 2, 0.5)));
    REQUIRE(r.left_stochastic);
    REQUIRE(r.doubly_stochastic);
    REQUIRE(r.support_ok);
    REQUIRE(r.primitive);
}

TEST_CASE("validate: asymmetric-trust matrix is left- but not doubly stochastic") {
    Eigen::MatrixXd w(2, 2);
    w << 0.5, 0.1, 0.5, 0.9;  // row sums 0.6 and 1.4
    const ValidationReport r = validate(lifted(w));
    REQUIRE(r.left_stochastic);
    REQUIRE_FALSE(r.doubly_stochastic);
    REQUIRE(r.max_row_err == Catch::Approx(0.4));
}

TEST_CASE("perron vector of a doubly-stochastic matrix is uniform") {
    RngStream rng(7, 0);
    for (int n : {2, 5, 9}) {
        const Graph g = random_connected_graph(n, std::min(n, 4), rng);
        const Eigen::VectorXd y = perron_vector(metropolis_weights(g));
        REQUIRE((y.array() - 1.0 / n).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("perron vector solves (A - I) y = 0 with unit sum") {
    Eigen::MatrixXd w(2, 2);
    w << 0.5, 0.1, 0.5, 0.9;
    const Eigen::VectorXd y = perron_vector(lifted(w));
    REQUIRE(y(0) == Catch::Approx(1.0 / 6).epsilon(1e-10));
    REQUIRE(y(1) == Catch::Approx(5.0 / 6).epsilon(1e-10));
    REQUIRE(y.sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("perron vector of a single node is (1)") {
    const Eigen::VectorXd y = perron_vector(lifted(Eigen::MatrixXd::Ones(1, 1)));
    REQUIRE(y.size() == 1);
    REQUIRE(y(0) == Catch::Approx(1.0));
}

TEST_CASE("perron vector refuses non-primitive matrices") {
    REQUIRE_THROWS_AS(perron_vector(lifted(Eigen::MatrixXd::Identity(2, 2))),
                      NumericalError);
}

TEST_CASE("two-node spectral decomposition matches the closed form") {
    const double alpha = 0.3, beta = 0.8;
    const SpectralA s = spectral_decompose(two_node_combination(alpha, beta));
    REQUIRE(s.reliable);
    REQUIRE(s.eigvals(0).real() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(s.eigvals(1).real() == Catch::Approx(alpha + beta - 1.0).margin(1e-12));
    REQUIRE(std::abs(s.eigvals(1).imag()) < 1e-12);
    // Columns proportional to (1-beta, 1-alpha) and (1, -1).
    const auto c0 = s.T.col(0), c1 = s.T.col(1);
    REQUIRE(std::abs(c0(0) * (1 - alpha) - c0(1) * (1 - beta)) < 1e-12);
    REQUIRE(std::abs(c1(0) + c1(1)) < 1e-12);
    const Eigen::MatrixXcd rec = s.T * s.eigvals.asDiagonal() * s.T_inv;
    REQUIRE((rec - two_node_combination(alpha, beta)
                       .weights.cast<std::complex<double>>())
                .norm() < 1e-10);
}

TEST_CASE("uniform two-node weights have eigenvalues {1, 0}") {
    const SpectralA s = spectral_decompose(two_node_combination(0.5, 0.5));
    REQUIRE(std::abs(s.eigvals(0) - 1.0) < 1e-12);
    REQUIRE(std::abs(s.eigvals(1)) < 1e-12);
}

TEST_CASE("symmetric doubly-stochastic weights have real eigenvalues in [-1,1]") {
    RngStream rng(21, 0);
    const Graph g = random_connected_graph(8, 4, rng);
    const SpectralA s = spectral_decompose(metropolis_weights(g));
    for (int j = 0; j < 8; ++j) {
        REQUIRE(std::abs(s.eigvals(j).imag()) < 1e-10);
        REQUIRE(std::abs(s.eigvals(j).real()) <= 1.0 + 1e-10);
    }
}

TEST_CASE("defective matrices are flagged unreliable") {
    Eigen::MatrixXd a(3, 3);  // eigenvalue 0.5 carries a Jordan block
    a << 1, 0.5, 0.2, 0, 0.5, 0.3, 0, 0, 0.5;
    const SpectralA s = spectral_decompose(lifted(a));
    REQUIRE_FALSE(s.reliable);
}

TEST_CASE("random connected graphs") {
    RngStream rng(4, 0);
    SECTION("n=2 gives the complete pair") {
        const Graph g = random_connected_graph(2, 2, rng);
        REQUIRE(g.adjacent(0, 1));
        REQUIRE(g.neighborhood_size(0) == 2);
    }
    SECTION("n=20 with target 5 is connected and near the target") {
        for (int rep = 0; rep < 10; ++rep) {
            const Graph g = random_connected_graph(20, 5, rng);
            REQUIRE(bfs_connected(g));
            REQUIRE(g.mean_neighborhood_size() >= 5.0 - 1e-9);
            REQUIRE(g.mean_neighborhood_size() <= 5.0 + 2.0 / 20 + 1e-9);
        }
    }
    SECTION("n=3 with target 2 is connected") {
        const Graph g = random_connected_graph(3, 2, rng);
        REQUIRE(bfs_connected(g));
    }
    SECTION("infeasible targets are rejected") {
        REQUIRE_THROWS_AS(random_connected_graph(5, 6, rng), ConfigError);
        REQUIRE_THROWS_AS(random_connected_graph(5, 1, rng), ConfigError);
        REQUIRE_THROWS_AS(random_connected_graph(1, 2, rng), ConfigError);
    }
}

TEST_CASE("graph adjacency is symmetric with forced self-loops") {
    BoolMatrix adj = BoolMatrix::Constant(3, 3, false);
    adj(0, 1) = adj(1, 0) = true;
    adj(1, 2) = adj(2, 1) = true;
    const Graph g = Graph::from_adjacency(adj);
    REQUIRE(g.adjacent(0, 0));
    REQUIRE(g.neighborhood_size(1) == 3);
    BoolMatrix bad = BoolMatrix::Constant(2, 2, false);
    bad(0, 1) = true;
    REQUIRE_THROWS_AS(Graph::from_adjacency(bad), ConfigError);
}

TEST_CASE("spectral radius of left-stochastic matrices is one") {
    RngStream rng(77, 0);
    for (int rep = 0; rep < 25; ++rep) {
        const int n = rng.uniform_int(2, 8);
        const SpectralA s = spectral_decompose(lifted(random_left_stochastic(n, rng)));
        REQUIRE(s.eigvals.cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
        REQUIRE(std::abs(s.eigvals(0) - 1.0) < 1e-10);
    }
}

TEST_CASE("graph and combination matrices round-trip through JSON") {
    RngStream rng(31, 0);
    const Graph g = random_connected_graph(7, 4, rng);
    const Graph g2 = io::graph_from_json(io::graph_to_json(g));
    REQUIRE((g2.adjacency().array() == g.adjacency().array()).all());

    const CombinationMatrix cm = hastings_weights(
        g, Eigen::VectorXd::LinSpaced(7, 0.01, 0.07));
    const CombinationMatrix cm2 = io::combination_from_json(io::combination_to_json(cm));
    REQUIRE(cm2.weights == cm.weights);
}
