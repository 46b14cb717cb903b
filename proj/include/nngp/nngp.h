#ifndef NNGP_NNGP_H
#define NNGP_NNGP_H

/*
 * C interface to the limiting-kernel library.
 *
 * Every function returns an nngp_status; results are written through output
 * pointers. On failure nngp_last_error() describes the most recent error on the
 * calling thread. Matrices are dense, row-major, one input point per row.
 * Handles are opaque and owned by the caller, who releases them with the
 * matching *_destroy function (which accepts NULL).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NNGP_API __declspec(dllexport)
#else
#define NNGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nngp_status {
    NNGP_OK = 0,
    NNGP_ERR_INVALID_ARGUMENT = 1,
    NNGP_ERR_DEGENERATE_INPUT = 2,
    NNGP_ERR_VANISHED_SIGNAL = 3,
    NNGP_ERR_FACTORIZATION = 4,
    NNGP_ERR_PRECONDITION = 5,
    NNGP_ERR_PARSE = 6,
    NNGP_ERR_IO = 7,
    NNGP_ERR_NULL_POINTER = 8,
    NNGP_ERR_INTERNAL = 99
} nngp_status;

NNGP_API const char* nngp_last_error(void);
NNGP_API const char* nngp_status_string(nngp_status status);
NNGP_API const char* nngp_version(void);

/* ---- special functions ------------------------------------------------ */

NNGP_API nngp_status nngp_bvn_cdf(double h, double k, double rho, double* out);
NNGP_API nngp_status nngp_bvn_pdf(double h, double k, double rho, double* out);

/* ---- kernel recursion ------------------------------------------------- */

typedef struct nngp_network nngp_network;

/* Second moments and means carried between layers for one input pair. */
typedef struct nngp_kernel_state {
    double k_xx, k_yy, k_xy;
    double m_x, m_y;
} nngp_kernel_state;

/* Every layer starts at (mu, sigma). final_linear != 0 makes the output layer linear. */
NNGP_API nngp_status nngp_network_create(double slope, int input_dim, int depth, double mu,
                                         double sigma, int final_linear, nngp_network** out);
NNGP_API void nngp_network_destroy(nngp_network* net);
NNGP_API nngp_status nngp_network_set_layer(nngp_network* net, int layer, double mu, double sigma);
NNGP_API nngp_status nngp_network_info(const nngp_network* net, int* depth, int* input_dim,
                                       double* slope);

NNGP_API nngp_status nngp_deep_kernel(const nngp_network* net, const double* x, const double* y,
                                      double* out);
/* out is n x m: k(X_i, Y_j). */
NNGP_API nngp_status nngp_kernel_matrix(const nngp_network* net, const double* X, size_t n,
                                        const double* Y, size_t m, double* out);
NNGP_API nngp_status nngp_arccos_reference(double theta0, double slope, int depth, double* out);

NNGP_API nngp_status nngp_raw_input_state(const double* x, const double* y, size_t n0,
                                          nngp_kernel_state* out);
NNGP_API nngp_status nngp_input_state(const double* x, const double* y, size_t n0, double mu,
                                      double sigma, double slope, nngp_kernel_state* out);
NNGP_API nngp_status nngp_layer_step(const nngp_kernel_state* state, double mu, double sigma,
                                     double slope, nngp_kernel_state* out);
/* E[psi(g1) psi(g2)] for bivariate normal pre-activations with scales s, correlation rho, means t. */
NNGP_API nngp_status nngp_lrelu_kernel(double s1, double s2, double rho, double t1, double t2,
                                       double slope, double* out);
NNGP_API nngp_status nngp_lrelu_mean(double mean, double sd, double slope, double* out);
/* Single layer with bias: mu and sigma_diag have n + 1 entries, the last for the bias. */
NNGP_API nngp_status nngp_single_layer_kernel_with_bias(const double* x1, const double* x2, size_t n,
                                                        const double* mu, const double* sigma_diag,
                                                        double slope, double* out);

/* ---- GP regression ---------------------------------------------------- */

/* var_out may be NULL; jitter_out may be NULL. */
NNGP_API nngp_status nngp_posterior_predictive(const nngp_network* net, double noise_var,
                                               const double* Xstar, size_t m, const double* X,
                                               size_t n, const double* y, double* mean_out,
                                               double* var_out, double* jitter_out);
NNGP_API nngp_status nngp_log_marginal_likelihood(const nngp_network* net, double noise_var,
                                                  const double* X, size_t n, const double* y,
                                                  double* out);
/* out is n_draws x m. */
NNGP_API nngp_status nngp_sample_prior(const nngp_network* net, const double* Xstar, size_t m,
                                       int n_draws, uint64_t seed, double* out);
NNGP_API nngp_status nngp_perturbation_bound(const nngp_network* base, const double* Xstar, size_t m,
                                             const double* X, size_t n, const double* y, double c1,
                                             double c2, double s, double* lhs, double* bound);
/* out is n_points x dim. */
NNGP_API nngp_status nngp_circle_traversal(int dim, int n_points, uint64_t seed, double* out);

/* ---- hyperparameter inference ---------------------------------------- */

typedef struct nngp_hyper_prior {
    double mu_mean, mu_var, ig_shape, ig_scale;
} nngp_hyper_prior;

typedef struct nngp_grid_spec {
    double mu_lo, mu_hi, sig2_lo, sig2_hi;
    int resolution;
} nngp_grid_spec;

typedef enum nngp_grid_target {
    NNGP_GRID_LOG_ML = 0,
    NNGP_GRID_LOG_POSTERIOR = 1
} nngp_grid_target;

typedef struct nngp_grid_point {
    int mu_index, sig2_index;
    double mu, sigma2, value;
} nngp_grid_point;

typedef struct nngp_mh_config {
    double prop_var_mu, prop_var_sig2, prop_corr;
    int burn_in, thin, n_samples;
    uint64_t seed;
} nngp_mh_config;

typedef struct nngp_grid nngp_grid;
typedef struct nngp_chain nngp_chain;

NNGP_API void nngp_hyper_prior_default(nngp_hyper_prior* out);
NNGP_API void nngp_grid_spec_default(nngp_grid_spec* out);
NNGP_API void nngp_mh_config_default(nngp_mh_config* out);

NNGP_API nngp_status nngp_hyper_prior_logpdf(double mu, double sigma2, const nngp_hyper_prior* prior,
                                             double* out);

/* net supplies depth, slope and input width; its layer values are replaced per cell. */
NNGP_API nngp_status nngp_grid_eval(const nngp_network* net, double noise_var, const double* X,
                                    size_t n, const double* y, const nngp_grid_spec* spec,
                                    nngp_grid_target target, const nngp_hyper_prior* prior,
                                    nngp_grid** out);
NNGP_API void nngp_grid_destroy(nngp_grid* grid);
NNGP_API int nngp_grid_resolution(const nngp_grid* grid);
/* values is resolution x resolution, rows indexed by mu. Failed cells hold -inf. */
NNGP_API nngp_status nngp_grid_values(const nngp_grid* grid, double* values);
NNGP_API nngp_status nngp_grid_axes(const nngp_grid* grid, double* mu_axis, double* sig2_axis);
/* Values along the sigma2 axis at mu = 0 exactly. */
NNGP_API nngp_status nngp_grid_mu0_values(const nngp_grid* grid, double* values);
/* constrained != 0 selects the best sigma2 on the line mu = 0; mu_index is -1
 * unless 0 is one of the axis values. */
NNGP_API nngp_status nngp_grid_argmax(const nngp_grid* grid, int constrained, nngp_grid_point* out);
NNGP_API nngp_status nngp_grid_diagnostics(const nngp_grid* grid, int* failed_cells,
                                           int* jittered_cells, double* max_jitter);
NNGP_API nngp_status nngp_grid_write_csv(const nngp_grid* grid, const char* path);

typedef double (*nngp_log_density_fn)(double mu, double sigma2, void* user);

NNGP_API nngp_status nngp_mh_sample(const nngp_network* net, double noise_var, const double* X,
                                    size_t n, const double* y, const nngp_hyper_prior* prior,
                                    const nngp_mh_config* config, double mu0, double sigma2_0,
                                    nngp_chain** out);
/* Same sampler on an arbitrary log density; non-finite values reject. */
NNGP_API nngp_status nngp_mh_sample_fn(nngp_log_density_fn log_density, void* user,
                                       const nngp_mh_config* config, double mu0, double sigma2_0,
                                       nngp_chain** out);
/* A chain built from explicit atoms; log_density may be NULL. */
NNGP_API nngp_status nngp_chain_create(const double* mu, const double* sigma2,
                                       const double* log_density, size_t n, nngp_chain** out);
NNGP_API void nngp_chain_destroy(nngp_chain* chain);
NNGP_API size_t nngp_chain_size(const nngp_chain* chain);
/* Any output pointer may be NULL. */
NNGP_API nngp_status nngp_chain_samples(const nngp_chain* chain, double* mu, double* sigma2,
                                        double* log_density);
NNGP_API nngp_status nngp_chain_acceptance(const nngp_chain* chain, double* rate);
NNGP_API nngp_status nngp_chain_map(const nngp_chain* chain, double* mu, double* sigma2);
NNGP_API nngp_status nngp_chain_write_csv(const nngp_chain* chain, const char* path);

/* Mixture predictive over the chain; var_out may be NULL. */
NNGP_API nngp_status nngp_marginal_predictive(const nngp_network* net, double noise_var,
                                              const nngp_chain* chain, const double* Xstar,
                                              size_t m, const double* X, size_t n, const double* y,
                                              double* mean_out, double* var_out);

/* ---- finite-width networks ------------------------------------------- */

typedef enum nngp_scheme_kind {
    NNGP_SCHEME_IID = 0,
    NNGP_SCHEME_F1 = 1,
    NNGP_SCHEME_F2 = 2,
    NNGP_SCHEME_F3 = 3,
    NNGP_SCHEME_F4 = 4
} nngp_scheme_kind;

typedef struct nngp_scheme {
    nngp_scheme_kind kind;
    double mu, sigma;     /* iid only */
    double edge_sigma;    /* RCE: scale of the Gaussian first and last layers */
    int f4_table_sigma;   /* F4: nonzero uses sigma = 2|A + sqrt 3| instead of sqrt(2)|A + sqrt 3| */
} nngp_scheme;

typedef struct nngp_sampled_net nngp_sampled_net;

NNGP_API void nngp_scheme_default(nngp_scheme_kind kind, nngp_scheme* out);
NNGP_API nngp_status nngp_scheme_hyperparams(const nngp_scheme* scheme, double A, double* mu,
                                             double* sigma);

/* widths lists the n_hidden hidden-layer widths; the output has width 1. */
NNGP_API nngp_status nngp_sample_weights(int input_dim, const int* widths, size_t n_hidden,
                                         const nngp_scheme* scheme, double slope, uint64_t seed,
                                         nngp_sampled_net** out);
NNGP_API void nngp_sampled_net_destroy(nngp_sampled_net* net);
NNGP_API size_t nngp_sampled_net_depth(const nngp_sampled_net* net);
/* Writes rows and cols; copies the row-major matrix into W when W is not NULL. */
NNGP_API nngp_status nngp_sampled_net_layer(const nngp_sampled_net* net, size_t layer, size_t* rows,
                                            size_t* cols, double* W);
/* has_latent is 0 for Gaussian layers. */
NNGP_API nngp_status nngp_sampled_net_latent_a(const nngp_sampled_net* net, size_t layer,
                                               int* has_latent, double* A);
NNGP_API nngp_status nngp_sampled_net_forward(const nngp_sampled_net* net, const double* X, size_t n,
                                              double* out);
/* Last hidden layer post-activations; out is n x width of that layer. */
NNGP_API nngp_status nngp_sampled_net_features(const nngp_sampled_net* net, const double* X, size_t n,
                                               double* out);
NNGP_API nngp_status nngp_sampled_net_dump(const nngp_sampled_net* net, const char* directory);
/* forward(sample_weights(...)) without storing the weights; bit-identical. */
NNGP_API nngp_status nngp_sample_outputs(int input_dim, const int* widths, size_t n_hidden,
                                         const nngp_scheme* scheme, double slope, uint64_t seed,
                                         const double* X, size_t n, double* out);

/* ---- MMD convergence -------------------------------------------------- */

typedef struct nngp_convergence_config {
    nngp_scheme scheme;
    int depth;
    int n_probe;
    int n_samples;
    int input_dim;
    double slope;
    int n_permutations;
    uint64_t seed;
} nngp_convergence_config;

typedef struct nngp_curve nngp_curve;

NNGP_API void nngp_convergence_config_default(nngp_convergence_config* out);
NNGP_API nngp_status nngp_mmd2_unbiased(const double* xs, size_t n, const double* ys, size_t m,
                                        size_t dim, double* out);
NNGP_API nngp_status nngp_mmd_null_band(const double* xs, size_t n, const double* ys, size_t m,
                                        size_t dim, int n_permutations, uint64_t seed, double* low,
                                        double* high);
NNGP_API nngp_status nngp_convergence_experiment(const nngp_convergence_config* config,
                                                 const int* widths, size_t n_widths,
                                                 nngp_curve** out);
NNGP_API void nngp_curve_destroy(nngp_curve* curve);
NNGP_API size_t nngp_curve_size(const nngp_curve* curve);
NNGP_API nngp_status nngp_curve_point(const nngp_curve* curve, size_t i, int* width, double* mmd2,
                                      double* null_low, double* null_high);
NNGP_API nngp_status nngp_curve_write_csv(const nngp_curve* curve, const char* path);

/* ---- datasets --------------------------------------------------------- */

typedef struct nngp_dataset nngp_dataset;

NNGP_API nngp_status nngp_dataset_sine(uint64_t seed, nngp_dataset** out);
NNGP_API nngp_status nngp_dataset_smooth_xor(uint64_t seed, nngp_dataset** out);
NNGP_API nngp_status nngp_dataset_snelson(const char* path, nngp_dataset** out);
NNGP_API nngp_status nngp_dataset_snelson_parse(const char* text, nngp_dataset** out);
NNGP_API void nngp_dataset_destroy(nngp_dataset* data);
NNGP_API nngp_status nngp_dataset_dims(const nngp_dataset* data, size_t* n_train, size_t* n_test,
                                       size_t* input_dim, double* noise_var);
/* X is n x input_dim row-major; either pointer may be NULL. */
NNGP_API nngp_status nngp_dataset_train(const nngp_dataset* data, double* X, double* y);
NNGP_API nngp_status nngp_dataset_test(const nngp_dataset* data, double* X, double* y);
/* has_noise is 0 for loaded data. */
NNGP_API nngp_status nngp_dataset_noise(const nngp_dataset* data, int* has_noise,
                                        double* train_noise, double* test_noise);
NNGP_API nngp_status nngp_dataset_write_csv(const nngp_dataset* data, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* NNGP_NNGP_H */
