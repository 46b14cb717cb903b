#pragma once

// Finite-width random LReLU networks under iid Gaussian and row-column
// exchangeable (RCE) weight priors.
//
// RCE layers draw F_ji = F(A, B_j, C_i, D_ji) with A, B, C, D iid uniform on
// [-sqrt 3, sqrt 3] and set W_ji = (F_ji - E_D[F_ji] (1 - 1/sqrt n)) / sqrt n.
// In RCE mode the first and last layers are zero-mean Gaussian.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nngp/kernel_core.hpp"
#include "nngp/rng.hpp"

namespace nngp {

struct NetworkShape {
    int input_dim = 1;
    std::vector<int> widths;  ///< hidden widths n^(1) .. n^(L-1)
    int output_dim = 1;

    int depth() const { return static_cast<int>(widths.size()) + 1; }
    void validate() const;
};

enum class SchemeKind { IidGaussian, F1, F2, F3, F4, Custom };

/// F4 spread: sqrt(2)|A + sqrt 3| (Analytic, the default) or 2|A + sqrt 3| (Table).
enum class F4Sigma { Analytic, Table };

/// F(A, B, C, D) = g(B) h(A, C, D) together with the closed-form moments the
/// limiting kernel needs.
struct CustomScheme {
    std::function<double(double)> g;
    std::function<double(double, double, double)> h;         ///< h(A, C, D)
    std::function<double(double, double)> h_mean_d;          ///< E_D h(A, C, D)
    std::function<double(double)> h_mean_c;                  ///< E_C E_D h(A, C, D)
    std::function<double(double)> h_var_c;                   ///< E_C Var_D h(A, C, D)
    double g_abs_mean = 1.0;                                 ///< E_B |g(B)|
    double g_sq_mean = 1.0;                                  ///< E_B g(B)^2
};

struct WeightScheme {
    SchemeKind kind = SchemeKind::IidGaussian;
    double mu = 0.0;                      ///< iid mode only
    double sigma = 1.4142135623730951;    ///< iid mode only
    double edge_sigma = 1.4142135623730951;  ///< RCE mode: first and last layer scale
    F4Sigma f4_sigma = F4Sigma::Analytic;
    std::shared_ptr<const CustomScheme> custom;

    static WeightScheme iid(double mu, double sigma);
    static WeightScheme rce(SchemeKind kind);

    bool is_rce() const { return kind != SchemeKind::IidGaussian; }
    /// True when the limiting hyperparameters depend on the global latent A.
    bool has_random_hyper() const { return kind == SchemeKind::F4 || kind == SchemeKind::Custom; }
    std::string name() const;
    void validate() const;
};

/// Limiting (mu, sigma) of an RCE layer conditional on its latent A.
LayerHyper scheme_hyperparams(const WeightScheme& scheme, double A);

struct LatentRecord {
    double a = 0.0;
    std::vector<double> b;  ///< per row
    std::vector<double> c;  ///< per column
};

struct SampledNetwork {
    std::vector<Matrix> weights;                    ///< weights[l] is n^(l+1) x n^(l)
    std::vector<std::optional<LatentRecord>> latents;  ///< set for RCE layers
    double slope_a = 0.0;
};

SampledNetwork sample_weights(const NetworkShape& shape, const WeightScheme& scheme, double a,
                              std::uint64_t seed);

/// Rows of the result are the network outputs at the rows of X.
Matrix forward(const SampledNetwork& net, const Matrix& X);
/// Post-activations of the last hidden layer, one row per input.
Matrix hidden_features(const SampledNetwork& net, const Matrix& X);

/// forward(sample_weights(shape, scheme, a, seed), X) without materialising the
/// weights; bit-identical to that composition.
Matrix sample_outputs(const NetworkShape& shape, const WeightScheme& scheme, double a,
                      std::uint64_t seed, const Matrix& X);

/// Limiting-GP hyperparameters of the network; `latent_a` holds one A per layer
/// (ignored entries for Gaussian layers). The output layer is linear.
NetworkHyper limiting_hyper(const NetworkShape& shape, const WeightScheme& scheme, double a,
                            const std::vector<double>& latent_a);
/// Same with the latents drawn from `eng`.
NetworkHyper sample_limiting_hyper(const NetworkShape& shape, const WeightScheme& scheme, double a,
                                   Engine& eng);

/// Mean vector and covariance of the limiting GP output at the rows of X. Unlike
/// kernel_matrix, the output-layer mean enters the mean vector, not the covariance.
struct OutputMoments {
    Vector mean;
    Matrix cov;
};
OutputMoments limiting_output_moments(const Matrix& X, const NetworkHyper& net);

}  // namespace nngp
