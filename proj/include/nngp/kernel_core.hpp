#pragma once

// Limiting kernels of LReLU networks with non-zero-mean weight priors.
//
// A layer with prior W_ji = (sigma * Z_ji + mu / sqrt(n)) / sqrt(n) maps the
// previous layer's second moments k and first moments m to pre-activations
// with covariance sigma^2 * k and mean mu * m. The layer input x itself plays
// the role of layer 0 with k_xy = x.y / n0 and m_x = mean(x).

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nngp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LayerHyper {
    double mu = 0.0;
    double sigma = 1.0;
};

struct NetworkHyper {
    double slope_a = 0.0;
    int input_dim = 1;
    std::vector<LayerHyper> layers;
    /// When set, the last entry of `layers` is an identity-activation output layer.
    bool final_layer_linear = true;

    int depth() const { return static_cast<int>(layers.size()); }
    void validate() const;

    /// Same (mu, sigma) in every layer.
    static NetworkHyper uniform(double slope_a, int input_dim, int depth, double mu, double sigma,
                                bool final_layer_linear = true);
    NetworkHyper with_uniform_layers(double mu, double sigma) const;
};

/// Joint law of two Gaussian pre-activations G_i ~ N(t_i, s_i^2), corr(G_1, G_2) = rho.
struct BivariatePreActivation {
    double s1 = 1.0;
    double s2 = 1.0;
    double rho = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;

    BivariatePreActivation swapped() const { return {s2, s1, rho, t2, t1}; }
    BivariatePreActivation scaled(double c) const { return {c * s1, c * s2, rho, c * t1, c * t2}; }
};

/// Second moments and means of the post-activations at a pair of inputs.
struct KernelState {
    double k_xx = 0.0;
    double k_yy = 0.0;
    double k_xy = 0.0;
    double m_x = 0.0;
    double m_y = 0.0;
};

/// Below this value of sin(theta) the bivariate formulas switch to the |rho| = 1 limit.
inline constexpr double kDegenerateSin = 1e-7;
/// Second moments below this raise a vanished-signal error.
inline constexpr double kVanishedSignal = 1e-300;

// Single-layer expectations -------------------------------------------------

/// E[G1 G2].
double linear_kernel(const BivariatePreActivation& p);
/// E|G| for G ~ N(mu_tilde * sigma, sigma^2), i.e. mu_tilde is the standardised mean.
double folded_mean(double mu_tilde, double sigma);
/// E[|G1| |G2|].
double abs_kernel(const BivariatePreActivation& p);
/// E[G1 |G2|].
double cross_term(const BivariatePreActivation& p);
/// E[psi(G1) psi(G2)] with psi(z) = max(a z, z).
double lrelu_kernel(const BivariatePreActivation& p, double a);
/// E[psi(G)] for G ~ N(mean, sigma^2).
double lrelu_mean(double mean, double sigma, double a);

/// Kernel of a single biased LReLU unit psi(W . (x, 1)) with W ~ N(mu, diag(sigma_diag)).
/// `mu` and `sigma_diag` have length x.size() + 1; the last entry belongs to the bias.
double single_layer_kernel_with_bias(std::span<const double> x1, std::span<const double> x2,
                                     std::span<const double> mu,
                                     std::span<const double> sigma_diag, double a);

// Deep recursion ---------------------------------------------------------------

/// Layer-0 moments of the raw inputs.
KernelState raw_input_state(std::span<const double> x, std::span<const double> y);
/// Post-activation state of the first layer.
KernelState input_state(std::span<const double> x, std::span<const double> y,
                        const LayerHyper& first_layer, double a);
/// One application of the moment map; `layer_index` only labels errors.
KernelState layer_step(const KernelState& state, const LayerHyper& layer, double a,
                       int layer_index = 0);

double deep_kernel(std::span<const double> x, std::span<const double> y, const NetworkHyper& net);

/// cos(theta^(L)) of the zero-mean LReLU recursion.
double arccos_reference(double theta0, double a, int depth);

/// Entry (i, j) = deep_kernel(X.row(i), Y.row(j)).
Matrix kernel_matrix(const Matrix& X, const Matrix& Y, const NetworkHyper& net);
/// Symmetric Gram matrix K(X, X); evaluates the upper triangle only.
Matrix kernel_matrix(const Matrix& X, const NetworkHyper& net);

/// Effective (mu, sigma) of a layer whose weights factor as G(B) H(A, C, D):
/// mu = E_C[mu] * E_B|G|, sigma^2 = E_C[sigma^2] * E_B[G^2].
LayerHyper factored_layer(double mean_c, double var_c, double abs_g_mean, double sq_g_mean);

}  // namespace nngp
