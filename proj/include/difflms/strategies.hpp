#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "difflms/common.hpp"
#include "difflms/model.hpp"
#include "difflms/topology.hpp"

namespace difflms {

enum class StrategyKind {
    standalone,   // independent LMS per node
    block,        // fusion center, stacked update with step mu'
    incremental,  // fusion center, sequential node sweep with step mu'
    cta,          // combine-then-adapt diffusion
    atc,          // adapt-then-combine diffusion
    general_pq,   // two-combination generalization with matrices P and Q
};

inline bool is_centralized(StrategyKind k) {
    return k == StrategyKind::block || k == StrategyKind::incremental;
}

inline const char* strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::standalone: return "standalone";
        case StrategyKind::block: return "block";
        case StrategyKind::incremental: return "incremental";
        case StrategyKind::cta: return "cta";
        case StrategyKind::atc: return "atc";
        case StrategyKind::general_pq: return "general-pq";
    }
    return "?";
}

// Estimates after iteration i. Distributed kinds keep one column per node
// (estimates is M x N, column k = w_{k,i}); centralized kinds keep a single
// column (M x 1, the fusion-center iterate w_i).
struct StrategyState {
    StrategyKind kind = StrategyKind::standalone;
    Eigen::MatrixXd estimates;
    Eigen::MatrixXd phi, psi;  // combination/adaptation scratch

    static StrategyState init(StrategyKind kind, int n_nodes, int dim) {
        StrategyState s;
        s.kind = kind;
        const int cols = is_centralized(kind) ? 1 : n_nodes;
        s.estimates = Eigen::MatrixXd::Zero(dim, cols);
        s.phi = Eigen::MatrixXd::Zero(dim, cols);
        s.psi = Eigen::MatrixXd::Zero(dim, cols);
        return s;
    }
};

// Per-iteration squared errors. apriori_sq(k) = |u_{k,i} (w_true - w_prev)|^2
// against the pre-update iterate; deviation_sq(k) = ||w_true - w_new||^2 after
// the update (replicated across nodes for centralized kinds).
struct ErrorRecord {
    Eigen::VectorXd apriori_sq;
    Eigen::VectorXd deviation_sq;
};

namespace detail {

constexpr double kDivergenceLimit = 1e12;

inline void check_finite(const Eigen::MatrixXd& est, const char* what) {
    if (!est.allFinite() || est.cwiseAbs().maxCoeff() > kDivergenceLimit)
        throw DivergenceError(std::string(what) +
                              ": estimate diverged (non-finite or > 1e12)");
}

// Shared LMS adaptation so every strategy performs identical arithmetic:
// out = in + mu * (d - u in) * u^T. `out` may alias `in`.
template <class Out, class In, class U>
inline void lms_adapt(Out&& out, const In& in, const U& u, double d, double mu) {
    const double err = d - u.dot(in);
    out = in + (mu * err) * u.transpose();
}

}  // namespace detail

inline void step_standalone(StrategyState& state, const DataSample& sample,
                            const NetworkModel& model, ErrorRecord& rec) {
    const int n = model.n_nodes;
    rec.apriori_sq.resize(n);
    rec.deviation_sq.resize(n);
    for (int k = 0; k < n; ++k) {
        const double ea =
            sample.regressors.row(k).dot(model.w_true - state.estimates.col(k));
        rec.apriori_sq(k) = ea * ea;
        detail::lms_adapt(state.estimates.col(k), state.estimates.col(k),
                          sample.regressors.row(k), sample.measurements(k),
                          model.step_size);
    }
    detail::check_finite(state.estimates, "standalone");
    for (int k = 0; k < n; ++k)
        rec.deviation_sq(k) = (model.w_true - state.estimates.col(k)).squaredNorm();
}

inline void step_block(StrategyState& state, const DataSample& sample,
                       const NetworkModel& model, ErrorRecord& rec) {
    const int n = model.n_nodes;
    rec.apriori_sq.resize(n);
    rec.deviation_sq.resize(n);
    auto w = state.estimates.col(0);
    for (int k = 0; k < n; ++k) {
        const double ea = sample.regressors.row(k).dot(model.w_true - w);
        rec.apriori_sq(k) = ea * ea;
    }
    state.psi.col(0).setZero();
    for (int k = 0; k < n; ++k) {
        const double err = sample.measurements(k) - sample.regressors.row(k).dot(w);
        state.psi.col(0) += err * sample.regressors.row(k).transpose();
    }
    w += model.centralized_step_size * state.psi.col(0);
    detail::check_finite(state.estimates, "block");
    rec.deviation_sq.setConstant((model.w_true - w).squaredNorm());
}

inline void step_incremental(StrategyState& state, const DataSample& sample,
                             const NetworkModel& model, ErrorRecord& rec) {
    const int n = model.n_nodes;
    rec.apriori_sq.resize(n);
    rec.deviation_sq.resize(n);
    auto w = state.estimates.col(0);
    // A-priori errors are all measured against w_{i-1}, not the sweep iterates.
    for (int k = 0; k < n; ++k) {
        const double ea = sample.regressors.row(k).dot(model.w_true - w);
        rec.apriori_sq(k) = ea * ea;
    }
    for (int k = 0; k < n; ++k)  // fixed ascending visit order
        detail::lms_adapt(w, w, sample.regressors.row(k), sample.measurements(k),
                          model.centralized_step_size);
    detail::check_finite(state.estimates, "incremental");
    rec.deviation_sq.setConstant((model.w_true - w).squaredNorm());
}

// phi_k = sum_l p_{lk} w_l;  psi_k = adapt(phi_k);  w_k = sum_l q_{lk} psi_l.
// P and Q are validated once at experiment setup; only shapes are checked here.
inline void step_general_diffusion(StrategyState& state, const DataSample& sample,
                                   const NetworkModel& model,
                                   const Eigen::MatrixXd& p,
                                   const Eigen::MatrixXd& q, ErrorRecord& rec) {
    const int n = model.n_nodes;
    if (p.rows() != n || p.cols() != n || q.rows() != n || q.cols() != n)
        throw ConfigError("general diffusion: P and Q must be N x N");
    rec.apriori_sq.resize(n);
    rec.deviation_sq.resize(n);
    for (int k = 0; k < n; ++k) {
        const double ea =
            sample.regressors.row(k).dot(model.w_true - state.estimates.col(k));
        rec.apriori_sq(k) = ea * ea;
    }
    state.phi.noalias() = state.estimates * p;
    for (int k = 0; k < n; ++k)
        detail::lms_adapt(state.psi.col(k), state.phi.col(k),
                          sample.regressors.row(k), sample.measurements(k),
                          model.step_size);
    state.estimates.noalias() = state.psi * q;
    detail::check_finite(state.estimates, "diffusion");
    for (int k = 0; k < n; ++k)
        rec.deviation_sq(k) = (model.w_true - state.estimates.col(k)).squaredNorm();
}

inline void step_cta(StrategyState& state, const DataSample& sample,
                     const NetworkModel& model, const CombinationMatrix& a,
                     ErrorRecord& rec) {
    const int n = model.n_nodes;
    step_general_diffusion(state, sample, model, a.weights,
                           Eigen::MatrixXd::Identity(n, n), rec);
}

inline void step_atc(StrategyState& state, const DataSample& sample,
                     const NetworkModel& model, const CombinationMatrix& a,
                     ErrorRecord& rec) {
    const int n = model.n_nodes;
    step_general_diffusion(state, sample, model,
                           Eigen::MatrixXd::Identity(n, n), a.weights, rec);
}

}  // namespace difflms
