#pragma once

#include <cstdint>

#include <Eigen/Cholesky>

#include "nngp/kernel_core.hpp"

namespace nngp {

struct GPModel {
    NetworkHyper net;
    double noise_var = 0.1;
};

struct PosteriorPredictive {
    Vector mean;
    Matrix cov;
    double jitter = 0.0;  ///< relative jitter that made K + s^2 I factorisable

    Vector variance() const { return cov.diagonal(); }
};

/// Cholesky factor of A + eps * mean(diag(A)) * I for the first eps in
/// {0, 1e-10, 1e-9, ..., 1e-6} that factorises.
struct JitteredCholesky {
    Eigen::LLT<Matrix> llt;
    double jitter = 0.0;
};

JitteredCholesky jittered_cholesky(const Matrix& A);

/// n_draws x M matrix; rows are iid N(0, K(Xstar, Xstar)).
Matrix sample_prior(const Matrix& Xstar, const GPModel& model, int n_draws, std::uint64_t seed,
                    double* jitter_used = nullptr);
/// Same, for a precomputed covariance.
Matrix sample_gaussian(const Vector& mean, const Matrix& cov, int n_draws, std::uint64_t seed,
                       double* jitter_used = nullptr);

PosteriorPredictive posterior_predictive(const Matrix& Xstar, const Matrix& X, const Vector& y,
                                         const GPModel& model);
PosteriorPredictive posterior_predictive(const Matrix& K_ss, const Matrix& K_sx, const Matrix& K_xx,
                                         const Vector& y, double noise_var);

double log_marginal_likelihood(const Matrix& X, const Vector& y, const GPModel& model,
                               double* jitter_used = nullptr);
double log_marginal_likelihood(const Matrix& K_xx, const Vector& y, double noise_var,
                               double* jitter_used = nullptr);

struct PerturbationBound {
    double lhs = 0.0;    ///< ||mean_{c1} - mean_{c2}||_2
    double bound = 0.0;  ///< 2 ||K_sx|| ||K^-1 y|| max_c ||K^-1|| s^2/c^2 / (1 - ||K^-1|| s^2/c^2)
};

/// Sensitivity of the posterior mean to the overall kernel scale c^2, where
/// K_xx and K_sx are the kernels at c = 1 and the models use c^2 K with noise s^2.
/// Spectral norms throughout. Throws Precondition unless s^2 ||K^-1|| / min(c)^2 < 1.
PerturbationBound perturbation_bound(const Matrix& K_sx, const Matrix& K_xx, const Vector& y,
                                     double c1, double c2, double s);
PerturbationBound perturbation_bound(const Matrix& Xstar, const Matrix& X, const Vector& y,
                                     const NetworkHyper& base, double c1, double c2, double s);

/// Points cos(t) e1 + sin(t) e2, t = 2 pi i / n_points, where e1, e2 are the first
/// two columns of the Q factor of a seeded dim x dim Gaussian matrix.
Matrix circle_traversal(int dim, int n_points, std::uint64_t seed);

}  // namespace nngp
