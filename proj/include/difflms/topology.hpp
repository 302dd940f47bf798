#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "difflms/common.hpp"
#include "difflms/rng.hpp"

namespace difflms {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Undirected network graph. Self-loops are always present: the neighborhood
// N_k contains k itself, so neighborhood_size(k) counts k too.
class Graph {
public:
    static Graph complete(int n) {
        if (n < 1) throw ConfigError("graph: need at least one node");
        return Graph(BoolMatrix::Constant(n, n, true));
    }

    // Adjacency must be square and symmetric; the diagonal is forced true.
    static Graph from_adjacency(BoolMatrix adj) {
        if (adj.rows() != adj.cols())
            throw ConfigError("graph: adjacency must be square");
        for (int k = 0; k < adj.cols(); ++k)
            for (int l = 0; l < k; ++l)
                if (adj(l, k) != adj(k, l))
                    throw ConfigError("graph: adjacency must be symmetric");
        adj.diagonal().setConstant(true);
        return Graph(std::move(adj));
    }

    int n_nodes() const { return static_cast<int>(adj_.rows()); }
    bool adjacent(int l, int k) const { return adj_(l, k); }
    int neighborhood_size(int k) const { return nbr_size_[k]; }
    const BoolMatrix& adjacency() const { return adj_; }

    double mean_neighborhood_size() const {
        double s = 0;
        for (int k = 0; k < n_nodes(); ++k) s += nbr_size_[k];
        return s / n_nodes();
    }

    bool connected() const {
        const int n = n_nodes();
        std::vector<bool> seen(n, false);
        std::vector<int> stack{0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (v != u && adj_(v, u) && !seen[v]) {
                    seen[v] = true;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    }

private:
    explicit Graph(BoolMatrix adj) : adj_(std::move(adj)) {
        nbr_size_.resize(n_nodes());
        for (int k = 0; k < n_nodes(); ++k) {
            int c = 0;
            for (int l = 0; l < n_nodes(); ++l) c += adj_(l, k) ? 1 : 0;
            nbr_size_[k] = c;
        }
    }

    BoolMatrix adj_;
    std::vector<int> nbr_size_;
};

// Random connected graph with self-loops whose mean neighborhood size
// (self included) approaches degree_target from below: a random spanning
// tree plus uniformly chosen extra edges.
inline Graph random_connected_graph(int n, int degree_target, RngStream& rng) {
    if (n < 2) throw ConfigError("random_connected_graph: need n >= 2");
    if (degree_target < 2 || degree_target > n)
        throw ConfigError("random_connected_graph: degree_target must be in [2, n]");
    BoolMatrix adj = BoolMatrix::Constant(n, n, false);
    adj.diagonal().setConstant(true);
    auto connect = [&](int a, int b) { adj(a, b) = adj(b, a) = true; };
    for (int v = 1; v < n; ++v) connect(v, rng.uniform_int(0, v - 1));

    auto mean_nbr = [&]() {
        double s = 0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) s += adj(l, k) ? 1 : 0;
        return s / n;
    };
    // Each added edge raises the mean by 2/n; stop as soon as the target is met.
    int guard = n * n;
    while (mean_nbr() + 1e-12 < degree_target && guard-- > 0) {
        const int a = rng.uniform_int(0, n - 1);
        const int b = rng.uniform_int(0, n - 1);
        if (a != b && !adj(a, b)) connect(a, b);
    }
    return Graph::from_adjacency(adj);
}

// Combination weights: weights(l, k) = a_{lk}, the weight node k assigns to
// neighbor l. Column k holds the weights INTO node k and sums to one for a
// left-stochastic matrix. Construction only checks shape and finiteness;
// stochasticity/support/primitivity are reported by validate().
struct CombinationMatrix {
    Eigen::MatrixXd weights;
    Graph graph;

    CombinationMatrix(Eigen::MatrixXd w, Graph g)
        : weights(std::move(w)), graph(std::move(g)) {
        if (weights.rows() != weights.cols() ||
            weights.rows() != graph.n_nodes())
            throw ConfigError("combination: weights must be N x N matching the graph");
        if (!weights.allFinite() || (weights.array() < 0.0).any())
            throw ConfigError("combination: weights must be finite and nonnegative");
    }
};

struct ValidationReport {
    bool left_stochastic = false;
    bool doubly_stochastic = false;
    bool support_ok = false;  // a_{lk} > 0 iff l in N_k
    bool primitive = false;
    double max_col_err = 0.0;
    double max_row_err = 0.0;

    bool valid() const { return left_stochastic && support_ok && primitive; }
};

namespace detail {

// Primitivity of the support pattern via boolean powers up to the Wielandt
// bound (m <= N^2): exact on the support, independent of float noise.
inline bool support_primitive(const BoolMatrix& s) {
    const int n = static_cast<int>(s.rows());
    BoolMatrix p = s;
    const int bound = n * n;
    for (int m = 1; m <= bound; ++m) {
        if (p.all()) return true;
        BoolMatrix q = BoolMatrix::Constant(n, n, false);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                if (!p(j, k)) continue;
                for (int i = 0; i < n; ++i)
                    if (s(i, j)) q(i, k) = true;
            }
        if ((q.array() == p.array()).all()) break;  // pattern reached a fixed point
        p = q;
    }
    return p.all();
}

}  // namespace detail

inline ValidationReport validate(const CombinationMatrix& cm) {
    ValidationReport r;
    const auto& w = cm.weights;
    const int n = cm.graph.n_nodes();
    r.max_col_err = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
    r.max_row_err = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
    r.left_stochastic = r.max_col_err <= 1e-12;
    r.doubly_stochastic = r.left_stochastic && r.max_row_err <= 1e-12;
    r.support_ok = true;
    for (int k = 0; k < n && r.support_ok; ++k)
        for (int l = 0; l < n; ++l) {
            const bool pos = w(l, k) > 0.0;
            if (pos != cm.graph.adjacent(l, k)) {
                r.support_ok = false;
                break;
            }
        }
    BoolMatrix s(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s(l, k) = w(l, k) > 0.0;
    r.primitive = detail::support_primitive(s);
    return r;
}

// Right eigenvector at eigenvalue 1 normalized to unit element sum:
// A y = y, 1^T y = 1, y >= 0.
inline Eigen::VectorXd perron_vector(const CombinationMatrix& cm) {
    const auto rep = validate(cm);
    if (!rep.primitive)
        throw NumericalError("perron_vector: combination matrix is not primitive "
                             "(eigenvalue 1 may not be simple)");
    const auto& a = cm.weights;
    const int n = cm.graph.n_nodes();
    auto residual = [&](const Eigen::VectorXd& y) {
        return (a * y - y).cwiseAbs().maxCoeff();
    };
    auto finish = [&](Eigen::VectorXd y) {
        if (y.sum() < 0) y = -y;
        y = y.cwiseMax(0.0);
        y /= y.sum();
        return y;
    };

    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() == Eigen::Success) {
        int best = 0;
        for (int j = 1; j < n; ++j)
            if (std::abs(es.eigenvalues()(j) - 1.0) <
                std::abs(es.eigenvalues()(best) - 1.0))
                best = j;
        Eigen::VectorXd y = finish(es.eigenvectors().col(best).real());
        if (residual(y) <= 1e-10) return y;
    }
    // Power-iteration fallback; converges for primitive A.
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 1.0 / n);
    for (int it = 0; it < 200000; ++it) {
        y = finish(a * y);
        if (residual(y) <= 1e-12) break;
    }
    if (residual(y) > 1e-10)
        throw NumericalError("perron_vector: power iteration did not converge");
    return y;
}

// Eigen-structure of a combination matrix, eigenvalue 1 placed first.
struct SpectralA {
    Eigen::VectorXcd eigvals;     // eigvals(0) is the (unit) Perron eigenvalue
    Eigen::MatrixXcd T;           // A = T * diag(eigvals) * T^-1
    Eigen::MatrixXcd T_inv;
    Eigen::VectorXd perron_y;
    double condition = 0.0;       // cond(T); > 1e12 flags a near-defective A
    bool reliable = true;
};

inline SpectralA spectral_decompose(const CombinationMatrix& cm) {
    const auto& a = cm.weights;
    const int n = cm.graph.n_nodes();
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral_decompose: eigensolver failed");

    std::vector<int> order(n);
    for (int j = 0; j < n; ++j) order[j] = j;
    const auto& ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const double di = std::abs(ev(i) - 1.0), dj = std::abs(ev(j) - 1.0);
        if (di != dj) return di < dj;
        return std::abs(ev(i)) > std::abs(ev(j));
    });

    SpectralA s;
    s.eigvals.resize(n);
    s.T.resize(n, n);
    for (int j = 0; j < n; ++j) {
        s.eigvals(j) = ev(order[j]);
        s.T.col(j) = es.eigenvectors().col(order[j]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.T);
    const double smin = svd.singularValues()(n - 1);
    s.condition = smin > 0 ? svd.singularValues()(0) / smin
                           : std::numeric_limits<double>::infinity();
    if (s.condition > 1e12) {
        s.reliable = false;
        s.T_inv = s.T;  // placeholder; flagged unreliable
        s.perron_y = Eigen::VectorXd::Zero(n);
        return s;
    }
    s.T_inv = s.T.inverse();
    const Eigen::MatrixXcd rec = s.T * s.eigvals.asDiagonal() * s.T_inv;
    if ((rec - a.cast<std::complex<double>>()).norm() > 1e-8 * std::max(1.0, a.norm()))
        s.reliable = false;

    Eigen::VectorXd y = s.T.col(0).real();
    const double sum = y.sum();
    if (std::abs(sum) > 1e-12) {
        y /= sum;
        s.perron_y = y.cwiseMax(0.0);
        const double s2 = s.perron_y.sum();
        if (s2 > 0) s.perron_y /= s2;
    } else {
        s.perron_y = Eigen::VectorXd::Zero(n);
        s.reliable = false;
    }
    return s;
}

}  // namespace difflms
