#include "nngp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nngp/error.hpp"
#include "nngp/rng.hpp"

namespace nngp {

namespace {

constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

Matrix with_noise(const Matrix& K, double noise_var) {
    Matrix A = K;
    A.diagonal().array() += noise_var;
    return A;
}

double spectral_norm(const Matrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues()(0);
}

}  // namespace

JitteredCholesky jittered_cholesky(const Matrix& A) {
    require(A.rows() == A.cols(), ErrorCode::InvalidArgument, "cholesky: matrix is not square");
    require(A.allFinite(), ErrorCode::Factorization, "cholesky: matrix has non-finite entries");
    const double scale = A.rows() > 0 ? A.diagonal().mean() : 0.0;
    for (double eps : kJitterLadder) {
        JitteredCholesky out;
        Matrix B = A;
        if (eps > 0.0) B.diagonal().array() += eps * scale;
        out.llt.compute(B);
        if (out.llt.info() == Eigen::Success) {
            // LLT only checks pivot signs; reject factors with collapsed pivots.
            const auto d = out.llt.matrixLLT().diagonal();
            if (A.rows() == 0 || (d.array() > 0.0).all()) {
                out.jitter = eps;
                return out;
            }
        }
    }
    throw Error(ErrorCode::Factorization,
                "matrix is not positive definite within the jitter budget (1e-6 * mean diag)");
}

Matrix sample_gaussian(const Vector& mean, const Matrix& cov, int n_draws, std::uint64_t seed,
                       double* jitter_used) {
    require(n_draws >= 1, ErrorCode::InvalidArgument, "n_draws must be at least 1");
    require(mean.size() == cov.rows(), ErrorCode::InvalidArgument,
            "mean and covariance sizes differ");
    const Eigen::Index m = cov.rows();
    if (m == 0 || cov.cwiseAbs().maxCoeff() == 0.0) {
        // A point mass; jittering a zero matrix would only add noise.
        if (jitter_used) *jitter_used = 0.0;
        return mean.transpose().replicate(n_draws, 1);
    }
    const auto chol = jittered_cholesky(cov);
    if (jitter_used) *jitter_used = chol.jitter;
    const Matrix L = chol.llt.matrixL();
    Engine eng = substream(seed, "gaussian-draws");
    std::normal_distribution<double> normal;
    Matrix out(n_draws, m);
    Vector z(m);
    for (int r = 0; r < n_draws; ++r) {
        for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(eng);
        out.row(r) = (mean + L * z).transpose();
    }
    return out;
}

Matrix sample_prior(const Matrix& Xstar, const GPModel& model, int n_draws, std::uint64_t seed,
                    double* jitter_used) {
    const Matrix K = kernel_matrix(Xstar, model.net);
    return sample_gaussian(Vector::Zero(K.rows()), K, n_draws, seed, jitter_used);
}

PosteriorPredictive posterior_predictive(const Matrix& K_ss, const Matrix& K_sx, const Matrix& K_xx,
                                         const Vector& y, double noise_var) {
    require(noise_var >= 0.0, ErrorCode::InvalidArgument, "noise variance must be non-negative");
    require(K_xx.rows() == y.size() && K_sx.cols() == y.size() && K_ss.rows() == K_sx.rows(),
            ErrorCode::InvalidArgument, "posterior_predictive: inconsistent dimensions");
    PosteriorPredictive out;
    if (y.size() == 0) {
        out.mean = Vector::Zero(K_ss.rows());
        out.cov = K_ss;
        return out;
    }
    const auto chol = jittered_cholesky(with_noise(K_xx, noise_var));
    out.jitter = chol.jitter;
    out.mean = K_sx * chol.llt.solve(y);
    const Matrix V = chol.llt.matrixL().solve(K_sx.transpose());
    out.cov = K_ss - V.transpose() * V;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

PosteriorPredictive posterior_predictive(const Matrix& Xstar, const Matrix& X, const Vector& y,
                                         const GPModel& model) {
    const Matrix K_ss = kernel_matrix(Xstar, model.net);
    if (X.rows() == 0) {
        return posterior_predictive(K_ss, Matrix(Xstar.rows(), 0), Matrix(0, 0), y,
                                    model.noise_var);
    }
    return posterior_predictive(K_ss, kernel_matrix(Xstar, X, model.net),
                                kernel_matrix(X, model.net), y, model.noise_var);
}

double log_marginal_likelihood(const Matrix& K_xx, const Vector& y, double noise_var,
                               double* jitter_used) {
    require(noise_var >= 0.0, ErrorCode::InvalidArgument, "noise variance must be non-negative");
    require(K_xx.rows() == y.size(), ErrorCode::InvalidArgument,
            "log_marginal_likelihood: inconsistent dimensions");
    const auto chol = jittered_cholesky(with_noise(K_xx, noise_var));
    if (jitter_used) *jitter_used = chol.jitter;
    const Vector alpha = chol.llt.matrixL().solve(y);
    const double log_det = 2.0 * chol.llt.matrixLLT().diagonal().array().log().sum();
    const double n = static_cast<double>(y.size());
    return -0.5 * alpha.squaredNorm() - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double log_marginal_likelihood(const Matrix& X, const Vector& y, const GPModel& model,
                               double* jitter_used) {
    return log_marginal_likelihood(kernel_matrix(X, model.net), y, model.noise_var, jitter_used);
}

PerturbationBound perturbation_bound(const Matrix& K_sx, const Matrix& K_xx, const Vector& y,
                                     double c1, double c2, double s) {
    require(c1 > 0.0 && c2 > 0.0 && s >= 0.0, ErrorCode::InvalidArgument,
            "perturbation_bound: need c1, c2 > 0 and s >= 0");
    require(K_xx.rows() == y.size() && K_sx.cols() == y.size(), ErrorCode::InvalidArgument,
            "perturbation_bound: inconsistent dimensions");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K_xx);
    const double lambda_min = eig.eigenvalues()(0);
    require(lambda_min > 0.0, ErrorCode::Factorization,
            "perturbation_bound: K(X, X) is not positive definite");
    const double inv_norm = 1.0 / lambda_min;
    const double s2 = s * s;
    const double worst = s2 / std::min(c1 * c1, c2 * c2);
    require(inv_norm * worst < 1.0, ErrorCode::Precondition,
            "perturbation_bound: s^2 ||K^-1|| / c^2 must be below 1");

    Eigen::LLT<Matrix> base(K_xx);
    require(base.info() == Eigen::Success, ErrorCode::Factorization,
            "perturbation_bound: K(X, X) is not positive definite");

    auto mean_at = [&](double c) -> Vector {
        const double c2s = c * c;
        Eigen::LLT<Matrix> llt(with_noise(c2s * K_xx, s2));
        require(llt.info() == Eigen::Success, ErrorCode::Factorization,
                "perturbation_bound: factorisation failed");
        return c2s * K_sx * llt.solve(y);
    };

    PerturbationBound out;
    out.lhs = (mean_at(c1) - mean_at(c2)).norm();
    double factor = 0.0;
    for (double c : {c1, c2}) {
        const double e = s2 / (c * c);
        factor = std::max(factor, inv_norm / (1.0 - inv_norm * e) * e);
    }
    out.bound = 2.0 * spectral_norm(K_sx) * base.solve(y).norm() * factor;
    return out;
}

PerturbationBound perturbation_bound(const Matrix& Xstar, const Matrix& X, const Vector& y,
                                     const NetworkHyper& base, double c1, double c2, double s) {
    return perturbation_bound(kernel_matrix(Xstar, X, base), kernel_matrix(X, base), y, c1, c2, s);
}

Matrix circle_traversal(int dim, int n_points, std::uint64_t seed) {
    require(dim >= 2, ErrorCode::InvalidArgument, "circle_traversal: dim must be at least 2");
    require(n_points >= 1, ErrorCode::InvalidArgument, "circle_traversal: need at least one point");
    Engine eng = substream(seed, "circle");
    std::normal_distribution<double> normal;
    Matrix G(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) G(i, j) = normal(eng);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
    const Vector e1 = Q.col(0);
    const Vector e2 = Q.col(1);
    Matrix out(n_points, dim);
    for (int i = 0; i < n_points; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n_points;
        out.row(i) = (std::cos(t) * e1 + std::sin(t) * e2).transpose();
    }
    return out;
}

}  // namespace nngp
