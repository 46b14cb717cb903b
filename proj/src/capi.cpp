#include "nngp/nngp.h"

#include <cmath>
#include <limits>
#include <new>
#include <span>
#include <string>

#include "nngp/data.hpp"
#include "nngp/error.hpp"
#include "nngp/finite_net.hpp"
#include "nngp/gp.hpp"
#include "nngp/hyper.hpp"
#include "nngp/io.hpp"
#include "nngp/mmd.hpp"
#include "nngp/special_fns.hpp"

struct nngp_network {
    nngp::NetworkHyper hyper;
};
struct nngp_grid {
    nngp::GridResult result;
};
struct nngp_chain {
    nngp::Chain chain;
};
struct nngp_sampled_net {
    nngp::SampledNetwork net;
};
struct nngp_curve {
    nngp::ConvergenceCurve curve;
};
struct nngp_dataset {
    nngp::Dataset data;
};

namespace {

using nngp::ErrorCode;
using nngp::Matrix;
using nngp::Vector;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local std::string g_last_error;

nngp_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return NNGP_ERR_INVALID_ARGUMENT;
        case ErrorCode::DegenerateInput: return NNGP_ERR_DEGENERATE_INPUT;
        case ErrorCode::VanishedSignal: return NNGP_ERR_VANISHED_SIGNAL;
        case ErrorCode::Factorization: return NNGP_ERR_FACTORIZATION;
        case ErrorCode::Precondition: return NNGP_ERR_PRECONDITION;
        case ErrorCode::Parse: return NNGP_ERR_PARSE;
        case ErrorCode::Io: return NNGP_ERR_IO;
    }
    return NNGP_ERR_INTERNAL;
}

struct NullPointer {
    const char* what;
};

template <class F>
nngp_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return NNGP_OK;
    } catch (const NullPointer& e) {
        g_last_error = std::string("null pointer: ") + e.what;
        return NNGP_ERR_NULL_POINTER;
    } catch (const nngp::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return NNGP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NNGP_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return NNGP_ERR_INTERNAL;
    }
}

template <class T>
T* need(T* p, const char* name) {
    if (!p) throw NullPointer{name};
    return p;
}

Matrix read_matrix(const double* data, std::size_t rows, std::size_t cols, const char* name) {
    if (rows * cols == 0) return Matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    need(data, name);
    return Eigen::Map<const RowMajor>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Vector read_vector(const double* data, std::size_t n, const char* name) {
    if (n == 0) return Vector(0);
    need(data, name);
    return Eigen::Map<const Vector>(data, static_cast<Eigen::Index>(n));
}

void write_matrix(const Matrix& M, double* out) {
    Eigen::Map<RowMajor>(out, M.rows(), M.cols()) = M;
}

void write_vector(const Vector& v, double* out) {
    if (out) Eigen::Map<Vector>(out, v.size()) = v;
}

const nngp::NetworkHyper& hyper_of(const nngp_network* net) { return need(net, "network")->hyper; }

nngp::HyperPrior to_prior(const nngp_hyper_prior* p) {
    if (!p) return {};
    return {p->mu_mean, p->mu_var, p->ig_shape, p->ig_scale};
}

nngp::MHConfig to_mh(const nngp_mh_config* c) {
    if (!c) return {};
    return {c->prop_var_mu, c->prop_var_sig2, c->prop_corr, c->burn_in, c->thin, c->n_samples, c->seed};
}

nngp::WeightScheme to_scheme(const nngp_scheme* s) {
    need(s, "scheme");
    nngp::WeightScheme out;
    switch (s->kind) {
        case NNGP_SCHEME_IID: out = nngp::WeightScheme::iid(s->mu, s->sigma); break;
        case NNGP_SCHEME_F1: out = nngp::WeightScheme::rce(nngp::SchemeKind::F1); break;
        case NNGP_SCHEME_F2: out = nngp::WeightScheme::rce(nngp::SchemeKind::F2); break;
        case NNGP_SCHEME_F3: out = nngp::WeightScheme::rce(nngp::SchemeKind::F3); break;
        case NNGP_SCHEME_F4: out = nngp::WeightScheme::rce(nngp::SchemeKind::F4); break;
        default: throw nngp::Error(ErrorCode::InvalidArgument, "unknown weight scheme kind");
    }
    out.edge_sigma = s->edge_sigma;
    out.f4_sigma = s->f4_table_sigma ? nngp::F4Sigma::Table : nngp::F4Sigma::Analytic;
    out.validate();
    return out;
}

nngp::NetworkShape to_shape(int input_dim, const int* widths, std::size_t n_hidden) {
    nngp::NetworkShape shape;
    shape.input_dim = input_dim;
    if (n_hidden) shape.widths.assign(need(widths, "widths"), widths + n_hidden);
    shape.validate();
    return shape;
}

nngp_status write_text(const std::string& text, const char* path) {
    return guarded([&] { nngp::io::write_file(need(path, "path"), text); });
}

}  // namespace

extern "C" {

const char* nngp_last_error(void) { return g_last_error.c_str(); }

const char* nngp_status_string(nngp_status status) {
    switch (status) {
        case NNGP_OK: return "ok";
        case NNGP_ERR_INVALID_ARGUMENT: return "invalid argument";
        case NNGP_ERR_DEGENERATE_INPUT: return "degenerate input";
        case NNGP_ERR_VANISHED_SIGNAL: return "vanished signal";
        case NNGP_ERR_FACTORIZATION: return "factorization failed";
        case NNGP_ERR_PRECONDITION: return "precondition violated";
        case NNGP_ERR_PARSE: return "parse error";
        case NNGP_ERR_IO: return "i/o error";
        case NNGP_ERR_NULL_POINTER: return "null pointer";
        case NNGP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* nngp_version(void) { return "1.0.0"; }

// special functions

nngp_status nngp_bvn_cdf(double h, double k, double rho, double* out) {
    return guarded([&] {
        nngp::require(std::abs(rho) <= 1.0, ErrorCode::InvalidArgument, "bvn_cdf: |rho| must be <= 1");
        *need(out, "out") = nngp::special::bvn_cdf({h, k, rho});
    });
}

nngp_status nngp_bvn_pdf(double h, double k, double rho, double* out) {
    return guarded([&] { *need(out, "out") = nngp::special::bvn_pdf({h, k, rho}); });
}

// kernel recursion

nngp_status nngp_network_create(double slope, int input_dim, int depth, double mu, double sigma,
                                int final_linear, nngp_network** out) {
    return guarded([&] {
        need(out, "out");
        auto hyper = nngp::NetworkHyper::uniform(slope, input_dim, depth, mu, sigma, final_linear != 0);
        hyper.validate();
        *out = new nngp_network{std::move(hyper)};
    });
}

void nngp_network_destroy(nngp_network* net) { delete net; }

nngp_status nngp_network_set_layer(nngp_network* net, int layer, double mu, double sigma) {
    return guarded([&] {
        auto& h = need(net, "network")->hyper;
        nngp::require(layer >= 0 && layer < h.depth(), ErrorCode::InvalidArgument,
                      "layer index out of range");
        auto updated = h;
        updated.layers[static_cast<std::size_t>(layer)] = {mu, sigma};
        updated.validate();
        h = std::move(updated);
    });
}

nngp_status nngp_network_info(const nngp_network* net, int* depth, int* input_dim, double* slope) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        if (depth) *depth = h.depth();
        if (input_dim) *input_dim = h.input_dim;
        if (slope) *slope = h.slope_a;
    });
}

nngp_status nngp_deep_kernel(const nngp_network* net, const double* x, const double* y, double* out) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        const auto n = static_cast<std::size_t>(h.input_dim);
        *need(out, "out") = nngp::deep_kernel(std::span(need(x, "x"), n), std::span(need(y, "y"), n), h);
    });
}

nngp_status nngp_kernel_matrix(const nngp_network* net, const double* X, size_t n, const double* Y,
                               size_t m, double* out) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        const auto d = static_cast<std::size_t>(h.input_dim);
        const Matrix K = nngp::kernel_matrix(read_matrix(X, n, d, "X"), read_matrix(Y, m, d, "Y"), h);
        if (n > 0 && m > 0) write_matrix(K, need(out, "out"));
    });
}

nngp_status nngp_arccos_reference(double theta0, double slope, int depth, double* out) {
    return guarded([&] { *need(out, "out") = nngp::arccos_reference(theta0, slope, depth); });
}

static nngp_kernel_state export_state(const nngp::KernelState& s) {
    return {s.k_xx, s.k_yy, s.k_xy, s.m_x, s.m_y};
}

nngp_status nngp_raw_input_state(const double* x, const double* y, size_t n0, nngp_kernel_state* out) {
    return guarded([&] {
        *need(out, "out") =
            export_state(nngp::raw_input_state(std::span(need(x, "x"), n0), std::span(need(y, "y"), n0)));
    });
}

nngp_status nngp_input_state(const double* x, const double* y, size_t n0, double mu, double sigma,
                             double slope, nngp_kernel_state* out) {
    return guarded([&] {
        *need(out, "out") = export_state(nngp::input_state(
            std::span(need(x, "x"), n0), std::span(need(y, "y"), n0), {mu, sigma}, slope));
    });
}

nngp_status nngp_layer_step(const nngp_kernel_state* state, double mu, double sigma, double slope,
                            nngp_kernel_state* out) {
    return guarded([&] {
        const auto& s = *need(state, "state");
        *need(out, "out") =
            export_state(nngp::layer_step({s.k_xx, s.k_yy, s.k_xy, s.m_x, s.m_y}, {mu, sigma}, slope));
    });
}

nngp_status nngp_lrelu_kernel(double s1, double s2, double rho, double t1, double t2, double slope,
                              double* out) {
    return guarded([&] { *need(out, "out") = nngp::lrelu_kernel({s1, s2, rho, t1, t2}, slope); });
}

nngp_status nngp_lrelu_mean(double mean, double sd, double slope, double* out) {
    return guarded([&] { *need(out, "out") = nngp::lrelu_mean(mean, sd, slope); });
}

nngp_status nngp_single_layer_kernel_with_bias(const double* x1, const double* x2, size_t n,
                                               const double* mu, const double* sigma_diag,
                                               double slope, double* out) {
    return guarded([&] {
        *need(out, "out") = nngp::single_layer_kernel_with_bias(
            std::span(need(x1, "x1"), n), std::span(need(x2, "x2"), n), std::span(need(mu, "mu"), n + 1),
            std::span(need(sigma_diag, "sigma_diag"), n + 1), slope);
    });
}

// GP regression

nngp_status nngp_posterior_predictive(const nngp_network* net, double noise_var, const double* Xstar,
                                      size_t m, const double* X, size_t n, const double* y,
                                      double* mean_out, double* var_out, double* jitter_out) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        const auto d = static_cast<std::size_t>(h.input_dim);
        const auto pred = nngp::posterior_predictive(read_matrix(Xstar, m, d, "Xstar"),
                                                     read_matrix(X, n, d, "X"), read_vector(y, n, "y"),
                                                     {h, noise_var});
        write_vector(pred.mean, need(mean_out, "mean_out"));
        write_vector(pred.variance(), var_out);
        if (jitter_out) *jitter_out = pred.jitter;
    });
}

nngp_status nngp_log_marginal_likelihood(const nngp_network* net, double noise_var, const double* X,
                                         size_t n, const double* y, double* out) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        *need(out, "out") = nngp::log_marginal_likelihood(
            read_matrix(X, n, static_cast<std::size_t>(h.input_dim), "X"), read_vector(y, n, "y"),
            {h, noise_var});
    });
}

nngp_status nngp_sample_prior(const nngp_network* net, const double* Xstar, size_t m, int n_draws,
                              uint64_t seed, double* out) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        const Matrix draws = nngp::sample_prior(
            read_matrix(Xstar, m, static_cast<std::size_t>(h.input_dim), "Xstar"), {h, 0.0}, n_draws, seed);
        if (draws.size()) write_matrix(draws, need(out, "out"));
    });
}

nngp_status nngp_perturbation_bound(const nngp_network* base, const double* Xstar, size_t m,
                                    const double* X, size_t n, const double* y, double c1, double c2,
                                    double s, double* lhs, double* bound) {
    return guarded([&] {
        const auto& h = hyper_of(base);
        const auto d = static_cast<std::size_t>(h.input_dim);
        const auto r = nngp::perturbation_bound(read_matrix(Xstar, m, d, "Xstar"), read_matrix(X, n, d, "X"),
                                                read_vector(y, n, "y"), h, c1, c2, s);
        *need(lhs, "lhs") = r.lhs;
        *need(bound, "bound") = r.bound;
    });
}

nngp_status nngp_circle_traversal(int dim, int n_points, uint64_t seed, double* out) {
    return guarded([&] { write_matrix(nngp::circle_traversal(dim, n_points, seed), need(out, "out")); });
}

// hyperparameter inference

void nngp_hyper_prior_default(nngp_hyper_prior* out) {
    if (!out) return;
    const nngp::HyperPrior p;
    *out = {p.mu_mean, p.mu_var, p.ig_shape, p.ig_scale};
}

void nngp_grid_spec_default(nngp_grid_spec* out) {
    if (!out) return;
    const nngp::GridSpec g;
    *out = {g.mu_lo, g.mu_hi, g.sig2_lo, g.sig2_hi, g.resolution};
}

void nngp_mh_config_default(nngp_mh_config* out) {
    if (!out) return;
    const nngp::MHConfig c;
    *out = {c.prop_var_mu, c.prop_var_sig2, c.prop_corr, c.burn_in, c.thin, c.n_samples, c.seed};
}

nngp_status nngp_hyper_prior_logpdf(double mu, double sigma2, const nngp_hyper_prior* prior, double* out) {
    return guarded([&] { *need(out, "out") = nngp::hyper_prior_logpdf(mu, sigma2, to_prior(prior)); });
}

nngp_status nngp_grid_eval(const nngp_network* net, double noise_var, const double* X, size_t n,
                           const double* y, const nngp_grid_spec* spec, nngp_grid_target target,
                           const nngp_hyper_prior* prior, nngp_grid** out) {
    return guarded([&] {
        need(out, "out");
        const auto& h = hyper_of(net);
        nngp::GridSpec gs;
        if (spec) gs = {spec->mu_lo, spec->mu_hi, spec->sig2_lo, spec->sig2_hi, spec->resolution};
        nngp::require(target == NNGP_GRID_LOG_ML || target == NNGP_GRID_LOG_POSTERIOR,
                      ErrorCode::InvalidArgument, "unknown grid target");
        auto result = nngp::grid_eval(
            read_matrix(X, n, static_cast<std::size_t>(h.input_dim), "X"), read_vector(y, n, "y"), h,
            noise_var, gs,
            target == NNGP_GRID_LOG_ML ? nngp::GridTarget::LogMarginalLikelihood : nngp::GridTarget::LogPosterior,
            to_prior(prior));
        *out = new nngp_grid{std::move(result)};
    });
}

void nngp_grid_destroy(nngp_grid* grid) { delete grid; }

int nngp_grid_resolution(const nngp_grid* grid) {
    return grid ? static_cast<int>(grid->result.mu_axis.size()) : 0;
}

nngp_status nngp_grid_values(const nngp_grid* grid, double* values) {
    return guarded([&] { write_matrix(need(grid, "grid")->result.values, need(values, "values")); });
}

nngp_status nngp_grid_axes(const nngp_grid* grid, double* mu_axis, double* sig2_axis) {
    return guarded([&] {
        const auto& r = need(grid, "grid")->result;
        write_vector(r.mu_axis, mu_axis);
        write_vector(r.sig2_axis, sig2_axis);
    });
}

nngp_status nngp_grid_mu0_values(const nngp_grid* grid, double* values) {
    return guarded([&] { write_vector(need(grid, "grid")->result.mu0_values, need(values, "values")); });
}

nngp_status nngp_grid_argmax(const nngp_grid* grid, int constrained, nngp_grid_point* out) {
    return guarded([&] {
        const auto& r = need(grid, "grid")->result;
        const auto& p = constrained ? r.constrained_argmax : r.argmax;
        *need(out, "out") = {static_cast<int>(p.mu_index), static_cast<int>(p.sig2_index), p.mu, p.sigma2, p.value};
    });
}

nngp_status nngp_grid_diagnostics(const nngp_grid* grid, int* failed_cells, int* jittered_cells,
                                  double* max_jitter) {
    return guarded([&] {
        const auto& r = need(grid, "grid")->result;
        if (failed_cells) *failed_cells = r.failed_cells;
        if (jittered_cells) *jittered_cells = r.jittered_cells;
        if (max_jitter) *max_jitter = r.max_jitter;
    });
}

nngp_status nngp_grid_write_csv(const nngp_grid* grid, const char* path) {
    if (!grid) return guarded([] { throw NullPointer{"grid"}; });
    return write_text(nngp::io::grid_csv(grid->result), path);
}

nngp_status nngp_mh_sample(const nngp_network* net, double noise_var, const double* X, size_t n,
                           const double* y, const nngp_hyper_prior* prior, const nngp_mh_config* config,
                           double mu0, double sigma2_0, nngp_chain** out) {
    return guarded([&] {
        need(out, "out");
        const auto& h = hyper_of(net);
        auto chain = nngp::mh_sample(read_matrix(X, n, static_cast<std::size_t>(h.input_dim), "X"),
                                     read_vector(y, n, "y"), h, noise_var, to_prior(prior), to_mh(config),
                                     {mu0, sigma2_0});
        *out = new nngp_chain{std::move(chain)};
    });
}

nngp_status nngp_mh_sample_fn(nngp_log_density_fn log_density, void* user, const nngp_mh_config* config,
                              double mu0, double sigma2_0, nngp_chain** out) {
    return guarded([&] {
        need(out, "out");
        need(log_density, "log_density");
        auto chain = nngp::mh_sample([&](double mu, double s2) { return log_density(mu, s2, user); },
                                     to_mh(config), {mu0, sigma2_0});
        *out = new nngp_chain{std::move(chain)};
    });
}

nngp_status nngp_chain_create(const double* mu, const double* sigma2, const double* log_density, size_t n,
                              nngp_chain** out) {
    return guarded([&] {
        need(out, "out");
        nngp::Chain chain;
        for (std::size_t i = 0; i < n; ++i) {
            nngp::require(need(sigma2, "sigma2")[i] > 0.0, ErrorCode::InvalidArgument,
                          "chain atoms need sigma2 > 0");
            chain.samples.push_back({need(mu, "mu")[i], sigma2[i]});
            chain.log_densities.push_back(log_density ? log_density[i] : 0.0);
        }
        *out = new nngp_chain{std::move(chain)};
    });
}

void nngp_chain_destroy(nngp_chain* chain) { delete chain; }

size_t nngp_chain_size(const nngp_chain* chain) { return chain ? chain->chain.samples.size() : 0; }

nngp_status nngp_chain_samples(const nngp_chain* chain, double* mu, double* sigma2, double* log_density) {
    return guarded([&] {
        const auto& c = need(chain, "chain")->chain;
        for (std::size_t i = 0; i < c.samples.size(); ++i) {
            if (mu) mu[i] = c.samples[i].mu;
            if (sigma2) sigma2[i] = c.samples[i].sigma2;
            if (log_density) log_density[i] = c.log_densities[i];
        }
    });
}

nngp_status nngp_chain_acceptance(const nngp_chain* chain, double* rate) {
    return guarded([&] { *need(rate, "rate") = need(chain, "chain")->chain.acceptance_rate; });
}

nngp_status nngp_chain_map(const nngp_chain* chain, double* mu, double* sigma2) {
    return guarded([&] {
        const auto s = need(chain, "chain")->chain.map();
        *need(mu, "mu") = s.mu;
        *need(sigma2, "sigma2") = s.sigma2;
    });
}

nngp_status nngp_chain_write_csv(const nngp_chain* chain, const char* path) {
    if (!chain) return guarded([] { throw NullPointer{"chain"}; });
    return write_text(nngp::io::chain_csv(chain->chain), path);
}

nngp_status nngp_marginal_predictive(const nngp_network* net, double noise_var, const nngp_chain* chain,
                                     const double* Xstar, size_t m, const double* X, size_t n,
                                     const double* y, double* mean_out, double* var_out) {
    return guarded([&] {
        const auto& h = hyper_of(net);
        const auto d = static_cast<std::size_t>(h.input_dim);
        const auto pred = nngp::marginal_predictive(read_matrix(Xstar, m, d, "Xstar"), read_matrix(X, n, d, "X"),
                                                    read_vector(y, n, "y"), h, need(chain, "chain")->chain,
                                                    noise_var);
        write_vector(pred.mean, need(mean_out, "mean_out"));
        write_vector(pred.variance, var_out);
    });
}

// finite-width networks

void nngp_scheme_default(nngp_scheme_kind kind, nngp_scheme* out) {
    if (!out) return;
    const nngp::WeightScheme s;
    *out = {kind, 0.0, s.sigma, s.edge_sigma, 0};
}

nngp_status nngp_scheme_hyperparams(const nngp_scheme* scheme, double A, double* mu, double* sigma) {
    return guarded([&] {
        const auto hp = nngp::scheme_hyperparams(to_scheme(scheme), A);
        *need(mu, "mu") = hp.mu;
        *need(sigma, "sigma") = hp.sigma;
    });
}

nngp_status nngp_sample_weights(int input_dim, const int* widths, size_t n_hidden, const nngp_scheme* scheme,
                                double slope, uint64_t seed, nngp_sampled_net** out) {
    return guarded([&] {
        need(out, "out");
        auto net = nngp::sample_weights(to_shape(input_dim, widths, n_hidden), to_scheme(scheme), slope, seed);
        *out = new nngp_sampled_net{std::move(net)};
    });
}

void nngp_sampled_net_destroy(nngp_sampled_net* net) { delete net; }

size_t nngp_sampled_net_depth(const nngp_sampled_net* net) { return net ? net->net.weights.size() : 0; }

nngp_status nngp_sampled_net_layer(const nngp_sampled_net* net, size_t layer, size_t* rows, size_t* cols,
                                   double* W) {
    return guarded([&] {
        const auto& n = need(net, "net")->net;
        nngp::require(layer < n.weights.size(), ErrorCode::InvalidArgument, "layer index out of range");
        const Matrix& M = n.weights[layer];
        if (rows) *rows = static_cast<size_t>(M.rows());
        if (cols) *cols = static_cast<size_t>(M.cols());
        if (W) write_matrix(M, W);
    });
}

nngp_status nngp_sampled_net_latent_a(const nngp_sampled_net* net, size_t layer, int* has_latent, double* A) {
    return guarded([&] {
        const auto& n = need(net, "net")->net;
        nngp::require(layer < n.latents.size(), ErrorCode::InvalidArgument, "layer index out of range");
        const auto& rec = n.latents[layer];
        *need(has_latent, "has_latent") = rec.has_value() ? 1 : 0;
        if (A) *A = rec ? rec->a : std::numeric_limits<double>::quiet_NaN();
    });
}

nngp_status nngp_sampled_net_forward(const nngp_sampled_net* net, const double* X, size_t n, double* out) {
    return guarded([&] {
        const auto& sn = need(net, "net")->net;
        nngp::require(!sn.weights.empty(), ErrorCode::InvalidArgument, "network has no layers");
        const auto d = static_cast<std::size_t>(sn.weights.front().cols());
        const Matrix Y = nngp::forward(sn, read_matrix(X, n, d, "X"));
        if (Y.size()) write_matrix(Y, need(out, "out"));
    });
}

nngp_status nngp_sampled_net_features(const nngp_sampled_net* net, const double* X, size_t n, double* out) {
    return guarded([&] {
        const auto& sn = need(net, "net")->net;
        nngp::require(!sn.weights.empty(), ErrorCode::InvalidArgument, "network has no layers");
        const auto d = static_cast<std::size_t>(sn.weights.front().cols());
        const Matrix H = nngp::hidden_features(sn, read_matrix(X, n, d, "X"));
        if (H.size()) write_matrix(H, need(out, "out"));
    });
}

nngp_status nngp_sampled_net_dump(const nngp_sampled_net* net, const char* directory) {
    return guarded([&] { nngp::io::dump_weights(need(net, "net")->net, need(directory, "directory")); });
}

nngp_status nngp_sample_outputs(int input_dim, const int* widths, size_t n_hidden, const nngp_scheme* scheme,
                                double slope, uint64_t seed, const double* X, size_t n, double* out) {
    return guarded([&] {
        const Matrix Y = nngp::sample_outputs(to_shape(input_dim, widths, n_hidden), to_scheme(scheme), slope,
                                              seed, read_matrix(X, n, static_cast<std::size_t>(input_dim), "X"));
        if (Y.size()) write_matrix(Y, need(out, "out"));
    });
}

// MMD

void nngp_convergence_config_default(nngp_convergence_config* out) {
    if (!out) return;
    const nngp::ConvergenceConfig c;
    nngp_scheme_default(NNGP_SCHEME_F1, &out->scheme);
    out->depth = c.depth;
    out->n_probe = c.n_probe;
    out->n_samples = c.n_samples;
    out->input_dim = c.input_dim;
    out->slope = c.slope_a;
    out->n_permutations = c.n_permutations;
    out->seed = c.seed;
}

nngp_status nngp_mmd2_unbiased(const double* xs, size_t n, const double* ys, size_t m, size_t dim, double* out) {
    return guarded([&] {
        *need(out, "out") = nngp::mmd2_unbiased(read_matrix(xs, n, dim, "xs"), read_matrix(ys, m, dim, "ys"));
    });
}

nngp_status nngp_mmd_null_band(const double* xs, size_t n, const double* ys, size_t m, size_t dim,
                               int n_permutations, uint64_t seed, double* low, double* high) {
    return guarded([&] {
        const auto band = nngp::permutation_band(read_matrix(xs, n, dim, "xs"), read_matrix(ys, m, dim, "ys"),
                                                 n_permutations, seed);
        *need(low, "low") = band.low;
        *need(high, "high") = band.high;
    });
}

nngp_status nngp_convergence_experiment(const nngp_convergence_config* config, const int* widths,
                                        size_t n_widths, nngp_curve** out) {
    return guarded([&] {
        need(out, "out");
        const auto& c = *need(config, "config");
        nngp::ConvergenceConfig cc;
        cc.scheme = to_scheme(&c.scheme);
        cc.depth = c.depth;
        cc.widths.assign(n_widths ? need(widths, "widths") : widths, widths + n_widths);
        cc.n_probe = c.n_probe;
        cc.n_samples = c.n_samples;
        cc.input_dim = c.input_dim;
        cc.slope_a = c.slope;
        cc.n_permutations = c.n_permutations;
        cc.seed = c.seed;
        *out = new nngp_curve{nngp::convergence_experiment(cc)};
    });
}

void nngp_curve_destroy(nngp_curve* curve) { delete curve; }

size_t nngp_curve_size(const nngp_curve* curve) { return curve ? curve->curve.points.size() : 0; }

nngp_status nngp_curve_point(const nngp_curve* curve, size_t i, int* width, double* mmd2, double* null_low,
                             double* null_high) {
    return guarded([&] {
        const auto& pts = need(curve, "curve")->curve.points;
        nngp::require(i < pts.size(), ErrorCode::InvalidArgument, "curve index out of range");
        if (width) *width = pts[i].width;
        if (mmd2) *mmd2 = pts[i].mmd2;
        if (null_low) *null_low = pts[i].null.low;
        if (null_high) *null_high = pts[i].null.high;
    });
}

nngp_status nngp_curve_write_csv(const nngp_curve* curve, const char* path) {
    if (!curve) return guarded([] { throw NullPointer{"curve"}; });
    return write_text(nngp::io::curve_csv(curve->curve), path);
}

// datasets

nngp_status nngp_dataset_sine(uint64_t seed, nngp_dataset** out) {
    return guarded([&] { *need(out, "out") = new nngp_dataset{nngp::gen_sine(seed)}; });
}

nngp_status nngp_dataset_smooth_xor(uint64_t seed, nngp_dataset** out) {
    return guarded([&] { *need(out, "out") = new nngp_dataset{nngp::gen_smooth_xor(seed)}; });
}

nngp_status nngp_dataset_snelson(const char* path, nngp_dataset** out) {
    return guarded([&] {
        need(out, "out");
        *out = new nngp_dataset{nngp::load_snelson(need(path, "path"))};
    });
}

nngp_status nngp_dataset_snelson_parse(const char* text, nngp_dataset** out) {
    return guarded([&] {
        need(out, "out");
        *out = new nngp_dataset{nngp::parse_snelson(need(text, "text"))};
    });
}

void nngp_dataset_destroy(nngp_dataset* data) { delete data; }

nngp_status nngp_dataset_dims(const nngp_dataset* data, size_t* n_train, size_t* n_test, size_t* input_dim,
                              double* noise_var) {
    return guarded([&] {
        const auto& d = need(data, "data")->data;
        if (n_train) *n_train = static_cast<size_t>(d.X_train.rows());
        if (n_test) *n_test = static_cast<size_t>(d.X_test.rows());
        if (input_dim) *input_dim = static_cast<size_t>(d.X_train.cols());
        if (noise_var) *noise_var = d.noise_var;
    });
}

nngp_status nngp_dataset_train(const nngp_dataset* data, double* X, double* y) {
    return guarded([&] {
        const auto& d = need(data, "data")->data;
        if (X) write_matrix(d.X_train, X);
        write_vector(d.y_train, y);
    });
}

nngp_status nngp_dataset_test(const nngp_dataset* data, double* X, double* y) {
    return guarded([&] {
        const auto& d = need(data, "data")->data;
        if (X) write_matrix(d.X_test, X);
        write_vector(d.y_test, y);
    });
}

nngp_status nngp_dataset_noise(const nngp_dataset* data, int* has_noise, double* train_noise,
                               double* test_noise) {
    return guarded([&] {
        const auto& d = need(data, "data")->data;
        const bool has = d.train_noise.size() == d.y_train.size() && d.train_noise.size() > 0;
        *need(has_noise, "has_noise") = has ? 1 : 0;
        if (has) {
            write_vector(d.train_noise, train_noise);
            write_vector(d.test_noise, test_noise);
        }
    });
}

nngp_status nngp_dataset_write_csv(const nngp_dataset* data, const char* path) {
    if (!data) return guarded([] { throw NullPointer{"data"}; });
    return write_text(nngp::io::dataset_csv(data->data), path);
}

}  // extern "C"
