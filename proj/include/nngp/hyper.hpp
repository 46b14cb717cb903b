#pragma once

// Level-II inference over the shared layer hyperparameters (mu, sigma^2):
// hyper-prior, grid surfaces, random-walk Metropolis and the hyperparameter-
// marginalised predictive.

#include <cstdint>
#include <functional>
#include <vector>

#include "nngp/gp.hpp"

namespace nngp {

/// mu ~ N(mu_mean, mu_var), sigma^2 ~ Inv-Gamma(ig_shape, ig_scale), independent.
struct HyperPrior {
    double mu_mean = -1.0;
    double mu_var = 2.0;
    double ig_shape = 2.5;
    double ig_scale = 6.0;

    void validate() const;
};

double hyper_prior_logpdf(double mu, double sigma2, const HyperPrior& prior = {});

struct MHConfig {
    double prop_var_mu = 2.38;
    double prop_var_sig2 = 4.76;
    double prop_corr = -0.9;
    int burn_in = 20;
    int thin = 20;
    int n_samples = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct HyperSample {
    double mu = 0.0;
    double sigma2 = 1.0;
};

struct Chain {
    std::vector<HyperSample> samples;
    std::vector<double> log_densities;
    double acceptance_rate = 0.0;
    long proposals = 0;
    long accepted = 0;

    /// Retained sample with the largest log density.
    HyperSample map() const;
    double map_log_density() const;
};

struct GridSpec {
    double mu_lo = -2.5;
    double mu_hi = 1.0;
    double sig2_lo = 0.1;
    double sig2_hi = 8.0;
    int resolution = 200;

    void validate() const;
    Vector mu_axis() const;
    Vector sig2_axis() const;
};

enum class GridTarget { LogMarginalLikelihood, LogPosterior };

struct GridPoint {
    Eigen::Index mu_index = 0;
    Eigen::Index sig2_index = 0;
    double mu = 0.0;
    double sigma2 = 0.0;
    double value = 0.0;
};

struct GridResult {
    GridTarget target = GridTarget::LogMarginalLikelihood;
    Vector mu_axis;
    Vector sig2_axis;
    Matrix values;  ///< values(i, j) at (mu_axis(i), sig2_axis(j)); -inf where evaluation failed
    GridPoint argmax;
    /// Values along sig2_axis at mu = 0 exactly, whether or not 0 lies on mu_axis.
    Vector mu0_values;
    /// Best point of mu0_values; mu_index is the axis row equal to 0, or -1.
    GridPoint constrained_argmax;
    int failed_cells = 0;
    int jittered_cells = 0;
    double max_jitter = 0.0;
};

/// Log marginal likelihood of the template network with every layer set to (mu, sqrt(sigma2)).
/// Returns -inf if the kernel cannot be evaluated or factorised.
double hyper_log_likelihood(const Matrix& X, const Vector& y, const NetworkHyper& net_template,
                            double noise_var, double mu, double sigma2,
                            double* jitter_used = nullptr);

GridResult grid_eval(const Matrix& X, const Vector& y, const NetworkHyper& net_template,
                     double noise_var, const GridSpec& spec, GridTarget target,
                     const HyperPrior& prior = {});

using LogDensity = std::function<double(double mu, double sigma2)>;

/// Random-walk Metropolis with a fixed bivariate Gaussian proposal. Proposals with
/// sigma2 <= 0 or a non-finite target are rejected.
Chain mh_sample(const LogDensity& log_target, const MHConfig& config, HyperSample init);

/// Samples the hyper-posterior of the GP regression model.
Chain mh_sample(const Matrix& X, const Vector& y, const NetworkHyper& net_template,
                double noise_var, const HyperPrior& prior, const MHConfig& config,
                HyperSample init);

struct MarginalPredictive {
    Vector mean;
    Vector variance;
    int skipped = 0;  ///< chain samples whose conditional predictive failed
};

/// Equal-weight mixture of the conditional predictives at the chain samples.
MarginalPredictive marginal_predictive(const Matrix& Xstar, const Matrix& X, const Vector& y,
                                       const NetworkHyper& net_template, const Chain& chain,
                                       double noise_var);

}  // namespace nngp
