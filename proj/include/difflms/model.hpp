#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <string>

#include "difflms/common.hpp"
#include "difflms/rng.hpp"

namespace difflms {

// Data-generating model: d_k(i) = u_{k,i} w_true + v_k(i), with white Gaussian
// regressors of covariance regressor_cov (uniform across nodes) and white
// Gaussian noise of per-node variance noise_vars[k].
struct NetworkModel {
    int n_nodes = 0;
    int dim = 0;
    Eigen::VectorXd w_true;          // M
    Eigen::VectorXd noise_vars;      // N, all > 0
    Eigen::MatrixXd regressor_cov;   // M x M, symmetric positive-definite
    double step_size = 0.0;          // mu, used by per-node strategies
    double centralized_step_size = 0.0;  // mu', used by block/incremental
    Eigen::MatrixXd regressor_chol;  // lower Cholesky factor of regressor_cov

    // mu' = mu / N, so centralized and diffusion strategies converge at the
    // same rate.
    static NetworkModel rate_matched(Eigen::VectorXd w_true,
                                     Eigen::VectorXd noise_vars,
                                     Eigen::MatrixXd regressor_cov,
                                     double step_size) {
        const int n = static_cast<int>(noise_vars.size());
        return with_step_sizes(std::move(w_true), std::move(noise_vars),
                               std::move(regressor_cov), step_size,
                               n > 0 ? step_size / n : 0.0);
    }

    // Expert constructor; the rate-matching relation is not enforced.
    static NetworkModel with_step_sizes(Eigen::VectorXd w_true,
                                        Eigen::VectorXd noise_vars,
                                        Eigen::MatrixXd regressor_cov,
                                        double step_size,
                                        double centralized_step_size) {
        NetworkModel m;
        m.n_nodes = static_cast<int>(noise_vars.size());
        m.dim = static_cast<int>(w_true.size());
        m.w_true = std::move(w_true);
        m.noise_vars = std::move(noise_vars);
        m.regressor_cov = std::move(regressor_cov);
        m.step_size = step_size;
        m.centralized_step_size = centralized_step_size;
        m.validate_and_factor();
        return m;
    }

    double trace_ru() const { return regressor_cov.trace(); }

private:
    void validate_and_factor() {
        if (n_nodes < 1) throw ConfigError("model: n_nodes must be >= 1");
        if (dim < 1) throw ConfigError("model: dim must be >= 1");
        if ((noise_vars.array() < 0.0).any())
            throw ConfigError("model: noise_vars must be nonnegative");
        if (!(step_size >= 0.0) || !(centralized_step_size >= 0.0))
            throw ConfigError("model: step sizes must be nonnegative");
        if (regressor_cov.rows() != dim || regressor_cov.cols() != dim)
            throw ConfigError("model: regressor_cov must be dim x dim");
        const double asym = (regressor_cov - regressor_cov.transpose()).norm();
        if (asym > 1e-10 * std::max(1.0, regressor_cov.norm()))
            throw ConfigError("model: regressor_cov must be symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(regressor_cov);
        if (llt.info() != Eigen::Success)
            throw ConfigError("model: regressor_cov must be positive-definite");
        regressor_chol = llt.matrixL();
    }
};

// One synchronous snapshot of measurements across the network.
struct DataSample {
    Eigen::MatrixXd regressors;   // N x M, row k = u_{k,i}
    Eigen::VectorXd measurements; // N, d_k(i)
    Eigen::VectorXd noises;       // N, v_k(i), kept for diagnostics
};

// Allocation-free variant for simulation hot loops.
inline void generate_sample_into(const NetworkModel& model, RngStream& rng,
                                 DataSample& out) {
    const int n = model.n_nodes;
    const int m = model.dim;
    out.regressors.resize(n, m);
    out.measurements.resize(n);
    out.noises.resize(n);
    Eigen::VectorXd z(m);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < m; ++j) z(j) = rng.gaussian();
        out.regressors.row(k) =
            (model.regressor_chol.triangularView<Eigen::Lower>() * z).transpose();
    }
    for (int k = 0; k < n; ++k)
        out.noises(k) = std::sqrt(model.noise_vars(k)) * rng.gaussian();
    out.measurements = out.regressors * model.w_true + out.noises;
}

inline DataSample generate_sample(const NetworkModel& model, RngStream& rng) {
    DataSample s;
    generate_sample_into(model, rng, s);
    return s;
}

// Eigen-structure of a symmetric PD matrix, eigenvalues sorted descending.
struct SpectralData {
    Eigen::VectorXd eigenvalues;   // lambda_1 >= ... >= lambda_M > 0
    Eigen::MatrixXd eigenvectors;  // orthonormal, column m pairs with eigenvalues[m]
    double lambda_min = 0.0;
    double trace = 0.0;
    double sum_sq = 0.0;  // ||lambda||^2
};

inline SpectralData spectral_data(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) throw ConfigError("spectral_data: matrix must be square");
    const double asym = (cov - cov.transpose()).norm();
    if (asym > 1e-10 * std::max(1.0, cov.norm()))
        throw ConfigError("spectral_data: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral_data: eigendecomposition failed");
    SpectralData s;
    const int m = static_cast<int>(cov.rows());
    s.eigenvalues.resize(m);
    s.eigenvectors.resize(m, m);
    // Eigen returns ascending order.
    for (int j = 0; j < m; ++j) {
        s.eigenvalues(j) = es.eigenvalues()(m - 1 - j);
        s.eigenvectors.col(j) = es.eigenvectors().col(m - 1 - j);
    }
    if (s.eigenvalues(m - 1) <= 0.0)
        throw ConfigError("spectral_data: matrix must be positive-definite");
    s.lambda_min = s.eigenvalues(m - 1);
    s.trace = s.eigenvalues.sum();
    s.sum_sq = s.eigenvalues.squaredNorm();
    const Eigen::MatrixXd rec =
        s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    if ((rec - cov).norm() > 1e-10 * std::max(1.0, cov.norm()))
        throw NumericalError("spectral_data: reconstruction check failed");
    return s;
}

}  // namespace difflms
