#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "difflms/common.hpp"
#include "difflms/model.hpp"
#include "difflms/rules.hpp"
#include "difflms/strategies.hpp"
#include "difflms/topology.hpp"

namespace difflms::theory {

// Closed-form steady-state predictions for one strategy.
struct TheoryReport {
    Eigen::VectorXd per_node_emse;
    Eigen::VectorXd per_node_msd;
    double network_emse = 0.0;
    double network_msd = 0.0;
    double dominant_mode = 0.0;
    std::string strategy;
    std::string weights_used;
    bool reliable = true;
};

// The seven two-node rows of the step-size-matched comparison table.
enum class TableStrategy {
    opt_atc,
    opt_cta,
    unf_atc,
    unf_cta,
    block,
    incremental,
    standalone,
};

constexpr std::array<TableStrategy, 7> kAllTableStrategies = {
    TableStrategy::opt_atc, TableStrategy::opt_cta, TableStrategy::unf_atc,
    TableStrategy::unf_cta, TableStrategy::block,   TableStrategy::incremental,
    TableStrategy::standalone};

inline const char* name(TableStrategy s) {
    switch (s) {
        case TableStrategy::opt_atc: return "atc-optimal";
        case TableStrategy::opt_cta: return "cta-optimal";
        case TableStrategy::unf_atc: return "atc-uniform";
        case TableStrategy::unf_cta: return "cta-uniform";
        case TableStrategy::block: return "block";
        case TableStrategy::incremental: return "incremental";
        case TableStrategy::standalone: return "standalone";
    }
    return "?";
}

inline StrategyKind strategy_kind(TableStrategy s) {
    switch (s) {
        case TableStrategy::opt_atc:
        case TableStrategy::unf_atc: return StrategyKind::atc;
        case TableStrategy::opt_cta:
        case TableStrategy::unf_cta: return StrategyKind::cta;
        case TableStrategy::block: return StrategyKind::block;
        case TableStrategy::incremental: return StrategyKind::incremental;
        case TableStrategy::standalone: return StrategyKind::standalone;
    }
    return StrategyKind::standalone;
}

// c1 = mu Tr(Ru)/4, c2 = mu^2 ||lambda||^2 / 2, c3 = mu' Tr(Ru)/4, primed
// constants swap Tr(Ru) for M (c2' = mu^2 Tr(Ru)/2). sigma_arth/sigma_harm are
// the arithmetic/harmonic means of the two noise variances.
struct TwoNodeConstants {
    double c1, c2, c3, c1p, c2p, c3p;
    double sigma_arth, sigma_harm;
    double gamma;  // sigma_{v,2}^2 / sigma_{v,1}^2
};

inline TwoNodeConstants two_node_constants_at(double mu, double mu_prime,
                                              const SpectralData& ru,
                                              double var1, double var2) {
    TwoNodeConstants c{};
    const double m = static_cast<double>(ru.eigenvalues.size());
    c.c1 = mu * ru.trace / 4.0;
    c.c2 = mu * mu * ru.sum_sq / 2.0;
    c.c3 = mu_prime * ru.trace / 4.0;
    c.c1p = mu * m / 4.0;
    c.c2p = mu * mu * ru.trace / 2.0;
    c.c3p = mu_prime * m / 4.0;
    c.sigma_arth = (var1 + var2) / 2.0;
    c.sigma_harm = 2.0 * var1 * var2 / (var1 + var2);
    c.gamma = var2 / var1;
    return c;
}

inline TwoNodeConstants two_node_constants(const NetworkModel& model) {
    if (model.n_nodes != 2)
        throw ConfigError("two_node_constants: model must have exactly 2 nodes");
    return two_node_constants_at(model.step_size, model.centralized_step_size,
                                 spectral_data(model.regressor_cov),
                                 model.noise_vars(0), model.noise_vars(1));
}

// Network EMSE rows of the comparison table, evaluated from the constants.
// Block/incremental use c3, i.e. the model's own mu' (rate-matched when
// mu' = mu/2).
inline double table_network_emse(const TwoNodeConstants& c, TableStrategy s) {
    switch (s) {
        case TableStrategy::opt_atc: return c.c1 * c.sigma_harm;
        case TableStrategy::opt_cta:
            return c.c1 * c.sigma_harm + c.c2 * (2.0 * c.sigma_arth - c.sigma_harm);
        case TableStrategy::unf_atc: return c.c1 * c.sigma_arth;
        case TableStrategy::unf_cta: return (c.c1 + c.c2) * c.sigma_arth;
        case TableStrategy::block:
        case TableStrategy::incremental: return 2.0 * c.c3 * c.sigma_arth;
        case TableStrategy::standalone: return 2.0 * c.c1 * c.sigma_arth;
    }
    return 0.0;
}

inline double table_network_msd(const TwoNodeConstants& c, TableStrategy s) {
    switch (s) {
        case TableStrategy::opt_atc: return c.c1p * c.sigma_harm;
        case TableStrategy::opt_cta:
            return c.c1p * c.sigma_harm + c.c2p * (2.0 * c.sigma_arth - c.sigma_harm);
        case TableStrategy::unf_atc: return c.c1p * c.sigma_arth;
        case TableStrategy::unf_cta: return (c.c1p + c.c2p) * c.sigma_arth;
        case TableStrategy::block:
        case TableStrategy::incremental: return 2.0 * c.c3p * c.sigma_arth;
        case TableStrategy::standalone: return 2.0 * c.c1p * c.sigma_arth;
    }
    return 0.0;
}

// xi_m convention for the reduced per-node sums: the exact geometric factor
// (1 - mu lambda_m)^2, or its small-step linearization 1 - 2 mu lambda_m. Both are exposed so the approximation itself is testable.
enum class XiConvention { exact_square, linearized };

namespace detail {

struct EigPair {
    Eigen::VectorXcd d;
    Eigen::MatrixXcd t, t_inv;
    bool reliable = true;
};

inline EigPair eig_general(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw NumericalError("theory: eigensolver failed on combination matrix");
    EigPair e;
    e.d = es.eigenvalues();
    e.t = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e.t);
    const double smin = svd.singularValues()(e.t.cols() - 1);
    if (!(smin > 0.0) || svd.singularValues()(0) / smin > 1e12) {
        e.reliable = false;
        return e;
    }
    e.t_inv = e.t.inverse();
    return e;
}

// Compass/pattern search over (0,1)^2, used to polish a coarse grid argmin.
// The EMSE valley along alpha + beta = const is flat at O(mu^2), so the raw
// cell-center argmin can sit a few cells along it; the polish pins the
// continuous minimizer.
template <class F>
std::pair<double, double> pattern_search_2d(const F& f, double x, double y,
                                            double step, double min_step) {
    double best = f(x, y);
    while (step > min_step) {
        bool moved = false;
        const double cand[8][2] = {{x + step, y},        {x - step, y},
                                   {x, y + step},        {x, y - step},
                                   {x + step, y + step}, {x - step, y - step},
                                   {x + step, y - step}, {x - step, y + step}};
        for (const auto& c : cand) {
            if (c[0] <= 0.0 || c[0] >= 1.0 || c[1] <= 0.0 || c[1] >= 1.0) continue;
            const double v = f(c[0], c[1]);
            if (v < best) {
                best = v;
                x = c[0];
                y = c[1];
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return {x, y};
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace detail

// Per-node EMSE/MSD of the general (P, Q) diffusion strategy via the reduced
// eigen-basis sums. The combination matrix entering the error dynamics is the
// product A = P Q.
inline TheoryReport general_diffusion_emse_msd(
    const NetworkModel& model, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
    XiConvention xi = XiConvention::linearized) {
    const int n = model.n_nodes;
    if (p.rows() != n || p.cols() != n || q.rows() != n || q.cols() != n)
        throw ConfigError("general_diffusion_emse_msd: P and Q must be N x N");
    const SpectralData ru = spectral_data(model.regressor_cov);
    const double mu = model.step_size;
    for (int m = 0; m < model.dim; ++m)
        if (std::abs(1.0 - mu * ru.eigenvalues(m)) >= 1.0)
            throw NumericalError("general_diffusion_emse_msd: unstable step-size");

    TheoryReport rep;
    rep.strategy = "general-pq";
    rep.dominant_mode = 1.0 - 2.0 * mu * ru.lambda_min;
    rep.per_node_emse.resize(n);
    rep.per_node_msd.resize(n);

    const detail::EigPair e = detail::eig_general(p * q);
    if (!e.reliable) {
        rep.reliable = false;
        rep.per_node_emse.setConstant(std::numeric_limits<double>::quiet_NaN());
        rep.per_node_msd.setConstant(std::numeric_limits<double>::quiet_NaN());
        rep.network_emse = rep.network_msd = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    const Eigen::MatrixXcd w =
        e.t.transpose() * (q.transpose() * model.noise_vars.asDiagonal() * q) * e.t;
    const double rho_a2 = e.d.cwiseAbs().maxCoeff() * e.d.cwiseAbs().maxCoeff();

    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXcd right = e.t_inv.col(k) * e.t_inv.col(k).transpose();
        std::complex<double> emse(0, 0), msd(0, 0);
        for (int m = 0; m < model.dim; ++m) {
            const double lam = ru.eigenvalues(m);
            const double x = xi == XiConvention::exact_square
                                 ? (1.0 - mu * lam) * (1.0 - mu * lam)
                                 : 1.0 - 2.0 * mu * lam;
            if (std::abs(x) * rho_a2 >= 1.0)
                throw NumericalError(
                    "general_diffusion_emse_msd: series does not converge");
            std::complex<double> term(0, 0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    term += w(i, j) * right(i, j) / (1.0 - x * e.d(i) * e.d(j));
            emse += lam * lam * term;
            msd += lam * term;
        }
        rep.per_node_emse(k) = mu * mu * emse.real();
        rep.per_node_msd(k) = mu * mu * msd.real();
    }
    rep.network_emse = rep.per_node_emse.mean();
    rep.network_msd = rep.per_node_msd.mean();
    return rep;
}

// Building blocks of the unreduced steady-state variance relation:
//   Y = mu^2 (Q^T Rv Q) (x) Ru,  B = (Q^T P^T) (x) (I - mu Ru),  F = B^T (x) B^T.
// The series inversion behind the oracle requires rho(F) = rho(B)^2 < 1.
struct OracleMatrices {
    Eigen::MatrixXd y;  // NM x NM noise injection
    Eigen::MatrixXd b;  // NM x NM mean error map
    Eigen::MatrixXd f;  // (NM)^2 x (NM)^2 covariance map
    double rho_f = 0.0;
};

inline OracleMatrices build_oracle_matrices(const NetworkModel& model,
                                            const Eigen::MatrixXd& p,
                                            const Eigen::MatrixXd& q) {
    const int n = model.n_nodes;
    const int m = model.dim;
    if (n * m > 12)
        throw ConfigError("oracle matrices: N*M must be <= 12 (oracle use only)");
    if (p.rows() != n || p.cols() != n || q.rows() != n || q.cols() != n)
        throw ConfigError("oracle matrices: P and Q must be N x N");
    const double mu = model.step_size;
    const Eigen::MatrixXd rv = model.noise_vars.asDiagonal();
    OracleMatrices om;
    om.y = mu * mu * detail::kron(q.transpose() * rv * q, model.regressor_cov);
    om.b = detail::kron(q.transpose() * p.transpose(),
                        Eigen::MatrixXd::Identity(m, m) - mu * model.regressor_cov);
    om.f = detail::kron(om.b.transpose(), om.b.transpose());
    const double rho_b = Eigen::EigenSolver<Eigen::MatrixXd>(om.b)
                             .eigenvalues()
                             .cwiseAbs()
                             .maxCoeff();
    om.rho_f = rho_b * rho_b;
    return om;
}

// Unreduced Kronecker-form per-node EMSE, evaluated by direct linear solve:
//   EMSE_k = vec(Y^T)^T (I - F)^{-1} vec(E_kk (x) Ru).
// Independent oracle for general_diffusion_emse_msd.
inline Eigen::VectorXd kronecker_oracle_emse(const NetworkModel& model,
                                             const Eigen::MatrixXd& p,
                                             const Eigen::MatrixXd& q) {
    const OracleMatrices om = build_oracle_matrices(model, p, q);
    if (om.rho_f >= 1.0)
        throw NumericalError("kronecker_oracle_emse: rho(F) >= 1, unstable");
    const int n = model.n_nodes;
    const int nm = n * model.dim;
    Eigen::MatrixXd lhs = -om.f;
    lhs.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);

    const Eigen::VectorXd vec_yt =
        Eigen::Map<const Eigen::VectorXd>(om.y.transpose().eval().data(), nm * nm);
    Eigen::VectorXd out(n);
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXd ekk = Eigen::MatrixXd::Zero(n, n);
        ekk(k, k) = 1.0;
        const Eigen::MatrixXd rhs_m = detail::kron(ekk, model.regressor_cov);
        const Eigen::VectorXd rhs =
            Eigen::Map<const Eigen::VectorXd>(rhs_m.data(), nm * nm);
        out(k) = vec_yt.dot(lu.solve(rhs));
    }
    return out;
}

// N-node ATC under the rank-one (dominant-term) approximation:
// network EMSE = (mu Tr(Ru)/2) y^T Rv y, MSD = (mu M/2) y^T Rv y. To this
// order every node sits at the network value.
inline TheoryReport n_node_atc_rank_one(const NetworkModel& model,
                                        const Eigen::VectorXd& perron_y) {
    if (perron_y.size() != model.n_nodes)
        throw ConfigError("n_node_atc_rank_one: Perron vector size mismatch");
    const double quad = perron_y.dot(model.noise_vars.asDiagonal() * perron_y);
    TheoryReport rep;
    rep.strategy = "atc";
    rep.network_emse = model.step_size * model.trace_ru() / 2.0 * quad;
    rep.network_msd = model.step_size * model.dim / 2.0 * quad;
    rep.per_node_emse = Eigen::VectorXd::Constant(model.n_nodes, rep.network_emse);
    rep.per_node_msd = Eigen::VectorXd::Constant(model.n_nodes, rep.network_msd);
    rep.dominant_mode =
        1.0 - 2.0 * model.step_size * spectral_data(model.regressor_cov).lambda_min;
    return rep;
}

// Non-cooperative LMS, any N: EMSE_k = mu sigma_k^2 Tr(Ru)/2, MSD_k = mu
// sigma_k^2 M/2.
inline TheoryReport standalone_report(const NetworkModel& model) {
    TheoryReport rep;
    rep.strategy = "standalone";
    rep.per_node_emse = model.step_size * model.trace_ru() / 2.0 * model.noise_vars;
    rep.per_node_msd = model.step_size * model.dim / 2.0 * model.noise_vars;
    rep.network_emse = rep.per_node_emse.mean();
    rep.network_msd = rep.per_node_msd.mean();
    rep.dominant_mode =
        1.0 - 2.0 * model.step_size * spectral_data(model.regressor_cov).lambda_min;
    return rep;
}

// Centralized block/incremental LMS, N nodes. Evaluated from the model's own
// mu'; equals (mu Tr(Ru)/2) Tr(Rv)/N^2 under the rate-matching mu' = mu/N.
inline TheoryReport n_node_block_inc(const NetworkModel& model) {
    const int n = model.n_nodes;
    TheoryReport rep;
    rep.strategy = "block";
    rep.network_emse = model.centralized_step_size * model.trace_ru() *
                       model.noise_vars.sum() / (2.0 * n);
    rep.network_msd = model.centralized_step_size * model.dim *
                      model.noise_vars.sum() / (2.0 * n);
    rep.per_node_emse = Eigen::VectorXd::Constant(n, rep.network_emse);
    rep.per_node_msd = Eigen::VectorXd::Constant(n, rep.network_msd);
    rep.dominant_mode = 1.0 - 2.0 * n * model.centralized_step_size *
                                  spectral_data(model.regressor_cov).lambda_min;
    return rep;
}

// Dominant mean-square convergence mode: 1 - 2 mu lambda_min for per-node
// strategies, 1 - 2 N mu' lambda_min for the centralized ones (the two-node
// display 1 - 4 mu' lambda_min generalized through mu' = mu/N).
inline double dominant_mode(const NetworkModel& model, StrategyKind kind) {
    const double lmin = spectral_data(model.regressor_cov).lambda_min;
    double mode;
    if (is_centralized(kind))
        mode = 1.0 - 2.0 * model.n_nodes * model.centralized_step_size * lmin;
    else
        mode = 1.0 - 2.0 * model.step_size * lmin;
    if (!(mode > 0.0 && mode <= 1.0))
        throw NumericalError("dominant_mode: mode outside (0,1); step-size too large");
    return mode;  // mode == 1 only for a zero step-size (no adaptation)
}

// Exact (all xi powers retained) two-node network EMSE of CTA as a function
// of the combination weights.
inline double two_node_cta_network_emse(double mu, const SpectralData& ru,
                                        double s1, double s2, double alpha,
                                        double beta) {
    const double den = 2.0 - alpha - beta;
    if (std::abs(den) < 1e-14)
        throw ConfigError("two_node_cta_network_emse: alpha = beta = 1 excluded");
    const double d2 = alpha + beta - 1.0;
    double total = 0.0;
    for (int m = 0; m < ru.eigenvalues.size(); ++m) {
        const double lam = ru.eigenvalues(m);
        const double xi = 1.0 - 2.0 * mu * lam;
        const double t1 =
            (s1 * (1 - beta) * (1 - beta) + s2 * (1 - alpha) * (1 - alpha)) /
            (1.0 - xi);
        const double t2 = (alpha - beta) *
                          (s2 * (1 - alpha) - s1 * (1 - beta)) / (1.0 - xi * d2);
        const double t3 = (s1 + s2) *
                          ((1 - alpha) * (1 - alpha) + (1 - beta) * (1 - beta)) /
                          (2.0 * (1.0 - xi * d2 * d2));
        total += mu * mu * lam * lam / (den * den) * (t1 + t2 + t3);
    }
    return total;
}

// ATC analog: the second and third terms carry the extra (alpha + beta - 1)
// powers contributed by the post-adaptation combination.
inline double two_node_atc_network_emse(double mu, const SpectralData& ru,
                                        double s1, double s2, double alpha,
                                        double beta) {
    const double den = 2.0 - alpha - beta;
    if (std::abs(den) < 1e-14)
        throw ConfigError("two_node_atc_network_emse: alpha = beta = 1 excluded");
    const double d2 = alpha + beta - 1.0;
    double total = 0.0;
    for (int m = 0; m < ru.eigenvalues.size(); ++m) {
        const double lam = ru.eigenvalues(m);
        const double xi = 1.0 - 2.0 * mu * lam;
        const double t1 =
            (s1 * (1 - beta) * (1 - beta) + s2 * (1 - alpha) * (1 - alpha)) /
            (1.0 - xi);
        const double t2 = (alpha - beta) * d2 *
                          (s2 * (1 - alpha) - s1 * (1 - beta)) / (1.0 - xi * d2);
        const double t3 = (s1 + s2) * d2 * d2 *
                          ((1 - alpha) * (1 - alpha) + (1 - beta) * (1 - beta)) /
                          (2.0 * (1.0 - xi * d2 * d2));
        total += mu * mu * lam * lam / (den * den) * (t1 + t2 + t3);
    }
    return total;
}

// Closed-form two-node report per the comparison tables. Per-node values for
// the uniform rows come from the reduced sums (no tabulated closed form); the
// network values agree with the tabulated expressions.
inline TheoryReport two_node_table(const NetworkModel& model, TableStrategy s) {
    if (model.n_nodes != 2)
        throw ConfigError("two_node_table: model must have exactly 2 nodes");
    const TwoNodeConstants c = two_node_constants(model);
    const double s1 = model.noise_vars(0), s2 = model.noise_vars(1);

    TheoryReport rep;
    rep.strategy = name(s);
    rep.per_node_emse.resize(2);
    rep.per_node_msd.resize(2);
    rep.dominant_mode = dominant_mode(model, strategy_kind(s));

    switch (s) {
        case TableStrategy::opt_atc: {
            rep.weights_used = "optimal (relative degree-variance)";
            rep.per_node_emse.setConstant(c.c1 * c.sigma_harm);
            rep.per_node_msd.setConstant(c.c1p * c.sigma_harm);
            break;
        }
        case TableStrategy::opt_cta: {
            rep.weights_used = "optimal (relative degree-variance)";
            rep.per_node_emse(0) = c.c1 * c.sigma_harm + c.c2 * s1 * s1 / c.sigma_arth;
            rep.per_node_emse(1) = c.c1 * c.sigma_harm + c.c2 * s2 * s2 / c.sigma_arth;
            rep.per_node_msd(0) = c.c1p * c.sigma_harm + c.c2p * s1 * s1 / c.sigma_arth;
            rep.per_node_msd(1) = c.c1p * c.sigma_harm + c.c2p * s2 * s2 / c.sigma_arth;
            break;
        }
        case TableStrategy::unf_atc:
        case TableStrategy::unf_cta: {
            rep.weights_used = "uniform (alpha = beta = 0.5)";
            const Eigen::MatrixXd a = two_node_combination(0.5, 0.5).weights;
            const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
            const TheoryReport g =
                s == TableStrategy::unf_atc
                    ? general_diffusion_emse_msd(model, eye, a)
                    : general_diffusion_emse_msd(model, a, eye);
            rep.per_node_emse = g.per_node_emse;
            rep.per_node_msd = g.per_node_msd;
            break;
        }
        case TableStrategy::block:
        case TableStrategy::incremental: {
            rep.per_node_emse.setConstant(2.0 * c.c3 * c.sigma_arth);
            rep.per_node_msd.setConstant(2.0 * c.c3p * c.sigma_arth);
            break;
        }
        case TableStrategy::standalone: {
            rep.per_node_emse << 2.0 * c.c1 * s1, 2.0 * c.c1 * s2;
            rep.per_node_msd << 2.0 * c.c1p * s1, 2.0 * c.c1p * s2;
            break;
        }
    }
    rep.network_emse = rep.per_node_emse.mean();
    rep.network_msd = rep.per_node_msd.mean();
    return rep;
}

// One point of an operation curve: steady-state network EMSE and dominant
// mode at a given diffusion-equivalent step-size (mu' = mu/2 for the
// centralized rows, so equal mode means equal abscissa).
struct OperationPoint {
    double mu = 0.0;
    double emse = 0.0;
    double mode = 0.0;
};

struct OperationCurve {
    TableStrategy strategy;
    std::vector<OperationPoint> points;
    int skipped_unstable = 0;
};

inline OperationCurve operation_curve(const NetworkModel& model, TableStrategy s,
                                      const std::vector<double>& mu_grid) {
    if (model.n_nodes != 2)
        throw ConfigError("operation_curve: model must have exactly 2 nodes");
    const SpectralData ru = spectral_data(model.regressor_cov);
    OperationCurve curve;
    curve.strategy = s;
    for (double mu : mu_grid) {
        const double mode = 1.0 - 2.0 * mu * ru.lambda_min;
        if (!(mu > 0.0) || !(mode > 0.0 && mode < 1.0)) {
            ++curve.skipped_unstable;
            continue;
        }
        const TwoNodeConstants c = two_node_constants_at(
            mu, mu / 2.0, ru, model.noise_vars(0), model.noise_vars(1));
        curve.points.push_back({mu, table_network_emse(c, s), mode});
    }
    return curve;
}

// Brute-force localization of the EMSE-optimal combination weights on a
// (0,1)^2 grid, checked against the analytic relative degree-variance rule.
struct OptimalWeightsReport {
    double alpha_grid_cta = 0.0, beta_grid_cta = 0.0;    // raw cell-center argmin
    double alpha_grid_atc = 0.0, beta_grid_atc = 0.0;
    double alpha_min_cta = 0.0, beta_min_cta = 0.0;      // polished minimizer
    double alpha_min_atc = 0.0, beta_min_atc = 0.0;
    double alpha_analytic = 0.0, beta_analytic = 0.0;
    double cell = 0.0;  // grid pitch
    bool cta_within_cell = false;  // polished minimizer vs analytic weights
    bool atc_within_cell = false;
    bool optimum_no_worse_than_uniform = false;
};

inline OptimalWeightsReport verify_optimal_weights(const NetworkModel& model,
                                                 int grid_points = 200) {
    if (model.n_nodes != 2)
        throw ConfigError("verify_optimal_weights: model must have 2 nodes");
    if (grid_points < 2)
        throw ConfigError("verify_optimal_weights: grid too small");
    const SpectralData ru = spectral_data(model.regressor_cov);
    const double mu = model.step_size;
    const double s1 = model.noise_vars(0), s2 = model.noise_vars(1);

    OptimalWeightsReport rep;
    rep.cell = 1.0 / grid_points;
    const TwoNodeWeights opt = two_node_optimal_weights(model.noise_vars);
    rep.alpha_analytic = opt.alpha;
    rep.beta_analytic = opt.beta;

    double best_cta = std::numeric_limits<double>::infinity();
    double best_atc = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double a = (i + 0.5) / grid_points;
        for (int j = 0; j < grid_points; ++j) {
            const double b = (j + 0.5) / grid_points;
            const double vc = two_node_cta_network_emse(mu, ru, s1, s2, a, b);
            if (vc < best_cta) {
                best_cta = vc;
                rep.alpha_grid_cta = a;
                rep.beta_grid_cta = b;
            }
            const double va = two_node_atc_network_emse(mu, ru, s1, s2, a, b);
            if (va < best_atc) {
                best_atc = va;
                rep.alpha_grid_atc = a;
                rep.beta_grid_atc = b;
            }
        }
    }
    const auto cta_f = [&](double a, double b) {
        return two_node_cta_network_emse(mu, ru, s1, s2, a, b);
    };
    const auto atc_f = [&](double a, double b) {
        return two_node_atc_network_emse(mu, ru, s1, s2, a, b);
    };
    std::tie(rep.alpha_min_cta, rep.beta_min_cta) = detail::pattern_search_2d(
        cta_f, rep.alpha_grid_cta, rep.beta_grid_cta, 2.0 * rep.cell, 1e-9);
    std::tie(rep.alpha_min_atc, rep.beta_min_atc) = detail::pattern_search_2d(
        atc_f, rep.alpha_grid_atc, rep.beta_grid_atc, 2.0 * rep.cell, 1e-9);
    rep.cta_within_cell = std::abs(rep.alpha_min_cta - opt.alpha) <= rep.cell &&
                          std::abs(rep.beta_min_cta - opt.beta) <= rep.cell;
    rep.atc_within_cell = std::abs(rep.alpha_min_atc - opt.alpha) <= rep.cell &&
                          std::abs(rep.beta_min_atc - opt.beta) <= rep.cell;
    rep.optimum_no_worse_than_uniform =
        two_node_cta_network_emse(mu, ru, s1, s2, opt.alpha, opt.beta) <=
            two_node_cta_network_emse(mu, ru, s1, s2, 0.5, 0.5) &&
        two_node_atc_network_emse(mu, ru, s1, s2, opt.alpha, opt.beta) <=
            two_node_atc_network_emse(mu, ru, s1, s2, 0.5, 0.5);
    return rep;
}

// Full pairwise comparison of the seven table rows plus the small-step
// condition c2/c1 < (arth - harm)/(2 arth - harm) governing the optimal-CTA
// versus block/uniform-ATC orderings (2 mu sigma_u^2 < ... for white Ru).
struct OrderingReport {
    std::array<double, 7> network_emse{};  // indexed by TableStrategy order
    std::vector<TableStrategy> ascending;
    bool small_step_condition = false;
    bool opt_cta_below_block = false;
    double equal_trio_spread_db = 0.0;  // max dB gap among unf-ATC/block/inc
};

inline OrderingReport strategy_orderings(const NetworkModel& model) {
    const TwoNodeConstants c = two_node_constants(model);
    OrderingReport rep;
    for (std::size_t i = 0; i < kAllTableStrategies.size(); ++i)
        rep.network_emse[i] = table_network_emse(c, kAllTableStrategies[i]);
    rep.ascending.assign(kAllTableStrategies.begin(), kAllTableStrategies.end());
    std::stable_sort(rep.ascending.begin(), rep.ascending.end(),
                     [&](TableStrategy a, TableStrategy b) {
                         return rep.network_emse[static_cast<int>(a)] <
                                rep.network_emse[static_cast<int>(b)];
                     });
    rep.small_step_condition =
        c.c2 / c.c1 <
        (c.sigma_arth - c.sigma_harm) / (2.0 * c.sigma_arth - c.sigma_harm);
    rep.opt_cta_below_block =
        rep.network_emse[static_cast<int>(TableStrategy::opt_cta)] <
        rep.network_emse[static_cast<int>(TableStrategy::block)];
    const double a = rep.network_emse[static_cast<int>(TableStrategy::unf_atc)];
    const double b = rep.network_emse[static_cast<int>(TableStrategy::block)];
    const double i = rep.network_emse[static_cast<int>(TableStrategy::incremental)];
    const double hi = std::max({a, b, i}), lo = std::min({a, b, i});
    rep.equal_trio_spread_db = to_db(hi) - to_db(lo);
    return rep;
}

}  // namespace difflms::theory
