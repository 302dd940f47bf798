#include <catch_amalgamated.hpp>

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "difflms/model.hpp"
#include "difflms/rng.hpp"

using namespace difflms;

namespace {

NetworkModel white_model(int n, int m, Eigen::VectorXd vars, double mu) {
    return NetworkModel::rate_matched(Eigen::VectorXd::Ones(m), std::move(vars),
                                      Eigen::MatrixXd::Identity(m, m), mu);
}

// Characteristic polynomial coefficients via Faddeev-LeVerrier, roots via
// Durand-Kerner. Independent of any eigensolver.
std::vector<double> char_poly(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        m = a * m + c[k - 1] * Eigen::MatrixXd::Identity(n, n);
        c[k] = -(a * m).trace() / k;
    }
    return c;  // p(x) = sum c[k] x^(n-k)
}

std::vector<double> durand_kerner_real_roots(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    using C = std::complex<double>;
    std::vector<C> r(n);
    for (int i = 0; i < n; ++i) r[i] = std::pow(C(0.4, 0.9), i);
    auto eval = [&](C x) {
        C v = c[0];
        for (int k = 1; k <= n; ++k) v = v * x + c[k];
        return v;
    };
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            C denom = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= r[i] - r[j];
            const C delta = eval(r[i]) / denom;
            r[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-14) break;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = r[i].real();
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

}  // namespace

TEST_CASE("white regressors have unit empirical variance") {
    const int draws = 100000, m = 4;
    NetworkModel model = white_model(1, m, Eigen::VectorXd::Constant(1, 0.1), 0.01);
    RngStream rng(321, 0);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m), sumsq = Eigen::VectorXd::Zero(m);
    DataSample s;
    for (int i = 0; i < draws; ++i) {
        generate_sample_into(model, rng, s);
        sum += s.regressors.row(0).transpose();
        sumsq += s.regressors.row(0).cwiseAbs2().transpose();
    }
    const double tol = 3.0 * std::sqrt(2.0 / draws);  // 3 sigma of the estimator
    for (int j = 0; j < m; ++j) {
        const double var = sumsq(j) / draws - std::pow(sum(j) / draws, 2);
        REQUIRE(var == Catch::Approx(1.0).margin(tol));
    }
}

TEST_CASE("noise variances match the configured profile within 5%") {
    Eigen::VectorXd vars(2);
    vars << 0.01, 0.002;
    NetworkModel model = white_model(2, 10, vars, 0.01);
    RngStream rng(11, 0);
    const int draws = 100000;
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(2);
    DataSample s;
    for (int i = 0; i < draws; ++i) {
        generate_sample_into(model, rng, s);
        sumsq += s.noises.cwiseAbs2();
    }
    for (int k = 0; k < 2; ++k)
        REQUIRE(sumsq(k) / draws == Catch::Approx(vars(k)).epsilon(0.05));
}

TEST_CASE("zero ground truth makes measurements equal the noise") {
    NetworkModel model = NetworkModel::rate_matched(
        Eigen::VectorXd::Zero(5), Eigen::VectorXd::Constant(3, 0.01),
        Eigen::MatrixXd::Identity(5, 5), 0.01);
    RngStream rng(5, 0);
    const DataSample s = generate_sample(model, rng);
    REQUIRE(s.measurements == s.noises);
}

TEST_CASE("colored regressors reproduce the requested covariance") {
    Eigen::MatrixXd ru(3, 3);
    ru << 2.0, 0.5, 0.1, 0.5, 1.0, -0.2, 0.1, -0.2, 0.5;
    NetworkModel model = NetworkModel::rate_matched(
        Eigen::VectorXd::Ones(3), Eigen::VectorXd::Constant(2, 0.01), ru, 0.01);
    RngStream rng(99, 3);
    const int draws = 200000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
    double cross = 0.0;  // correlation between the two nodes' first entries
    DataSample s;
    for (int i = 0; i < draws; ++i) {
        generate_sample_into(model, rng, s);
        acc += s.regressors.row(0).transpose() * s.regressors.row(0);
        cross += s.regressors(0, 0) * s.regressors(1, 0);
    }
    REQUIRE((acc / draws - ru).norm() < 6.0 / std::sqrt(double(draws)) * ru.norm());
    REQUIRE(std::abs(cross / draws) < 5.0 * ru(0, 0) / std::sqrt(double(draws)));
}

TEST_CASE("identical (seed, trial) streams are bit-identical; trials differ") {
    NetworkModel model = white_model(2, 6, Eigen::VectorXd::Constant(2, 0.01), 0.01);
    RngStream a(1234, 7), b(1234, 7), c(1234, 8);
    DataSample sa, sb, sc;
    bool trial_differs = false;
    for (int i = 0; i < 50; ++i) {
        generate_sample_into(model, a, sa);
        generate_sample_into(model, b, sb);
        generate_sample_into(model, c, sc);
        REQUIRE(sa.regressors == sb.regressors);
        REQUIRE(sa.measurements == sb.measurements);
        trial_differs = trial_differs || sa.measurements != sc.measurements;
    }
    REQUIRE(trial_differs);
}

TEST_CASE("model validation rejects bad inputs") {
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd vars = Eigen::VectorXd::Constant(2, 0.01);
    REQUIRE_THROWS_AS(NetworkModel::rate_matched(
                          w, Eigen::VectorXd::Constant(2, -0.1),
                          Eigen::MatrixXd::Identity(3, 3), 0.01),
                      ConfigError);
    Eigen::MatrixXd asym(3, 3);
    asym << 1, 0.5, 0, 0, 1, 0, 0, 0, 1;
    REQUIRE_THROWS_AS(NetworkModel::rate_matched(w, vars, asym, 0.01), ConfigError);
    Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(3, 3);
    indef(2, 2) = -1.0;
    REQUIRE_THROWS_AS(NetworkModel::rate_matched(w, vars, indef, 0.01), ConfigError);
    REQUIRE_THROWS_AS(NetworkModel::rate_matched(
                          w, vars, Eigen::MatrixXd::Identity(2, 2), 0.01),
                      ConfigError);
}

TEST_CASE("rate-matched constructor sets mu' = mu/N") {
    NetworkModel m = white_model(4, 3, Eigen::VectorXd::Constant(4, 0.01), 0.02);
    REQUIRE(m.centralized_step_size == 0.02 / 4);
}

TEST_CASE("spectral_data on the identity") {
    const SpectralData s = spectral_data(Eigen::MatrixXd::Identity(10, 10));
    REQUIRE(s.eigenvalues.minCoeff() == Catch::Approx(1.0));
    REQUIRE(s.trace == Catch::Approx(10.0));
    REQUIRE(s.sum_sq == Catch::Approx(10.0));
}

TEST_CASE("spectral_data sorts a diagonal matrix descending") {
    Eigen::VectorXd d(3);
    d << 1, 2, 3;
    const SpectralData s = spectral_data(Eigen::MatrixXd(d.asDiagonal()));
    REQUIRE(s.eigenvalues(0) == Catch::Approx(3.0));
    REQUIRE(s.eigenvalues(2) == Catch::Approx(1.0));
    REQUIRE(s.lambda_min == Catch::Approx(1.0));
}

TEST_CASE("spectral_data matches characteristic-polynomial roots") {
    RngStream rng(2024, 0);
    Eigen::MatrixXd x(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = rng.gaussian();
    const Eigen::MatrixXd pd = x * x.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
    const SpectralData s = spectral_data(pd);
    const std::vector<double> roots = durand_kerner_real_roots(char_poly(pd));
    for (int i = 0; i < 4; ++i)
        REQUIRE(s.eigenvalues(i) == Catch::Approx(roots[i]).epsilon(1e-8));
    const Eigen::MatrixXd rec =
        s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    REQUIRE((rec - pd).norm() <= 1e-10 * pd.norm());
}

TEST_CASE("spectral_data rejects non-symmetric and non-PD input") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 1, 0, 1;
    REQUIRE_THROWS_AS(spectral_data(asym), ConfigError);
    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
    REQUIRE_THROWS_AS(spectral_data(neg), ConfigError);
}
