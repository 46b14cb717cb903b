#include "nngp/hyper.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nngp/error.hpp"
#include "nngp/rng.hpp"
#include "parallel.hpp"

namespace nngp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Vector linspace(double lo, double hi, int n) {
    if (n == 1) return Vector::Constant(1, lo);
    return Vector::LinSpaced(n, lo, hi);
}

}  // namespace

void HyperPrior::validate() const {
    require(mu_var > 0.0 && ig_shape > 0.0 && ig_scale > 0.0, ErrorCode::InvalidArgument,
            "hyper-prior: variance, shape and scale must be positive");
}

double hyper_prior_logpdf(double mu, double sigma2, const HyperPrior& prior) {
    prior.validate();
    require(sigma2 > 0.0, ErrorCode::InvalidArgument, "hyper-prior: sigma2 must be positive");
    const double dm = mu - prior.mu_mean;
    const double log_normal =
        -0.5 * std::log(2.0 * std::numbers::pi * prior.mu_var) - 0.5 * dm * dm / prior.mu_var;
    const double a = prior.ig_shape;
    const double b = prior.ig_scale;
    const double log_ig = a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(sigma2) - b / sigma2;
    return log_normal + log_ig;
}

void MHConfig::validate() const {
    require(prop_var_mu > 0.0 && prop_var_sig2 > 0.0, ErrorCode::InvalidArgument,
            "MH: proposal variances must be positive");
    require(std::abs(prop_corr) < 1.0, ErrorCode::InvalidArgument,
            "MH: proposal correlation must lie in (-1, 1)");
    require(burn_in >= 0 && thin >= 1 && n_samples >= 1, ErrorCode::InvalidArgument,
            "MH: thin and n_samples must be at least 1, burn_in non-negative");
}

HyperSample Chain::map() const {
    require(!samples.empty(), ErrorCode::InvalidArgument, "chain is empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (log_densities[i] > log_densities[best]) best = i;
    return samples[best];
}

double Chain::map_log_density() const {
    require(!samples.empty(), ErrorCode::InvalidArgument, "chain is empty");
    double best = log_densities.front();
    for (double v : log_densities) best = std::max(best, v);
    return best;
}

void GridSpec::validate() const {
    require(resolution >= 1, ErrorCode::InvalidArgument, "grid resolution must be at least 1");
    require(mu_lo < mu_hi || (resolution == 1 && mu_lo <= mu_hi), ErrorCode::InvalidArgument,
            "grid: mu range must satisfy lo < hi");
    require(sig2_lo < sig2_hi || (resolution == 1 && sig2_lo <= sig2_hi),
            ErrorCode::InvalidArgument, "grid: sigma2 range must satisfy lo < hi");
    require(sig2_lo > 0.0, ErrorCode::InvalidArgument, "grid: sigma2 range must be positive");
}

Vector GridSpec::mu_axis() const { return linspace(mu_lo, mu_hi, resolution); }
Vector GridSpec::sig2_axis() const { return linspace(sig2_lo, sig2_hi, resolution); }

double hyper_log_likelihood(const Matrix& X, const Vector& y, const NetworkHyper& net_template,
                            double noise_var, double mu, double sigma2, double* jitter_used) {
    if (!(sigma2 > 0.0)) return kNegInf;
    try {
        const GPModel model{net_template.with_uniform_layers(mu, std::sqrt(sigma2)), noise_var};
        const double v = log_marginal_likelihood(X, y, model, jitter_used);
        return std::isfinite(v) ? v : kNegInf;
    } catch (const Error&) {
        return kNegInf;
    }
}

GridResult grid_eval(const Matrix& X, const Vector& y, const NetworkHyper& net_template,
                     double noise_var, const GridSpec& spec, GridTarget target,
                     const HyperPrior& prior) {
    spec.validate();
    net_template.validate();
    prior.validate();
    GridResult out;
    out.target = target;
    out.mu_axis = spec.mu_axis();
    out.sig2_axis = spec.sig2_axis();
    const Eigen::Index n = spec.resolution;
    out.values.resize(n, n);
    out.mu0_values.resize(n);
    Matrix jitters = Matrix::Zero(n, n);

    auto cell_value = [&](double mu, double s2, double* jitter) {
        double v = hyper_log_likelihood(X, y, net_template, noise_var, mu, s2, jitter);
        if (target == GridTarget::LogPosterior && std::isfinite(v)) v += hyper_prior_logpdf(mu, s2, prior);
        return v;
    };
    // Rows 0..n-1 are the grid, row n is the mu = 0 constraint line.
    detail::parallel_for(static_cast<std::size_t>((n + 1) * n), [&](std::size_t cell) {
        const Eigen::Index i = static_cast<Eigen::Index>(cell) / n;
        const Eigen::Index j = static_cast<Eigen::Index>(cell) % n;
        const double s2 = out.sig2_axis(j);
        if (i == n) {
            out.mu0_values(j) = cell_value(0.0, s2, nullptr);
            return;
        }
        double jitter = 0.0;
        out.values(i, j) = cell_value(out.mu_axis(i), s2, &jitter);
        jitters(i, j) = jitter;
    });

    out.argmax = GridPoint{0, 0, out.mu_axis(0), out.sig2_axis(0), kNegInf};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = out.values(i, j);
            if (!std::isfinite(v)) {
                ++out.failed_cells;
                continue;
            }
            if (jitters(i, j) > 0.0) ++out.jittered_cells;
            out.max_jitter = std::max(out.max_jitter, jitters(i, j));
            if (v > out.argmax.value) out.argmax = GridPoint{i, j, out.mu_axis(i), out.sig2_axis(j), v};
        }
    }
    Eigen::Index zero_row = -1;
    for (Eigen::Index i = 0; i < n; ++i)
        if (out.mu_axis(i) == 0.0) zero_row = i;
    out.constrained_argmax = GridPoint{zero_row, 0, 0.0, out.sig2_axis(0), kNegInf};
    for (Eigen::Index j = 0; j < n; ++j) {
        const double v = out.mu0_values(j);
        if (std::isfinite(v) && v > out.constrained_argmax.value)
            out.constrained_argmax = GridPoint{zero_row, j, 0.0, out.sig2_axis(j), v};
    }
    return out;
}

Chain mh_sample(const LogDensity& log_target, const MHConfig& config, HyperSample init) {
    config.validate();
    require(init.sigma2 > 0.0, ErrorCode::InvalidArgument, "MH: initial sigma2 must be positive");

    const double l11 = std::sqrt(config.prop_var_mu);
    const double l21 = config.prop_corr * std::sqrt(config.prop_var_sig2);
    const double l22 = std::sqrt(config.prop_var_sig2) *
                       std::sqrt((1.0 - config.prop_corr) * (1.0 + config.prop_corr));

    Engine eng = substream(config.seed, "chain");
    std::normal_distribution<double> normal;

    HyperSample current = init;
    double current_lp = log_target(current.mu, current.sigma2);
    require(std::isfinite(current_lp), ErrorCode::InvalidArgument,
            "MH: target density is zero at the initial point");

    Chain chain;
    chain.samples.reserve(static_cast<std::size_t>(config.n_samples));
    chain.log_densities.reserve(static_cast<std::size_t>(config.n_samples));
    const long total = static_cast<long>(config.burn_in) +
                       static_cast<long>(config.thin) * static_cast<long>(config.n_samples);
    for (long it = 1; it <= total; ++it) {
        const double z1 = normal(eng);
        const double z2 = normal(eng);
        const double u = uniform01(eng);
        const HyperSample proposal{current.mu + l11 * z1, current.sigma2 + l21 * z1 + l22 * z2};
        ++chain.proposals;
        if (proposal.sigma2 > 0.0) {
            const double lp = log_target(proposal.mu, proposal.sigma2);
            if (std::isfinite(lp) && std::log(u) < lp - current_lp) {
                current = proposal;
                current_lp = lp;
                ++chain.accepted;
            }
        }
        if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) {
            chain.samples.push_back(current);
            chain.log_densities.push_back(current_lp);
        }
    }
    chain.acceptance_rate = static_cast<double>(chain.accepted) / static_cast<double>(chain.proposals);
    return chain;
}

Chain mh_sample(const Matrix& X, const Vector& y, const NetworkHyper& net_template,
                double noise_var, const HyperPrior& prior, const MHConfig& config,
                HyperSample init) {
    net_template.validate();
    prior.validate();
    auto target = [&](double mu, double s2) {
        const double ll = hyper_log_likelihood(X, y, net_template, noise_var, mu, s2);
        return std::isfinite(ll) ? ll + hyper_prior_logpdf(mu, s2, prior) : kNegInf;
    };
    return mh_sample(target, config, init);
}

MarginalPredictive marginal_predictive(const Matrix& Xstar, const Matrix& X, const Vector& y,
                                       const NetworkHyper& net_template, const Chain& chain,
                                       double noise_var) {
    require(!chain.samples.empty(), ErrorCode::InvalidArgument,
            "marginal_predictive: chain is empty");
    std::vector<Vector> means;
    std::vector<Vector> vars;
    MarginalPredictive out;
    for (const auto& s : chain.samples) {
        try {
            const GPModel model{net_template.with_uniform_layers(s.mu, std::sqrt(s.sigma2)),
                                noise_var};
            const auto pred = posterior_predictive(Xstar, X, y, model);
            means.push_back(pred.mean);
            vars.push_back(pred.variance());
        } catch (const Error&) {
            ++out.skipped;
        }
    }
    require(!means.empty(), ErrorCode::Factorization,
            "marginal_predictive: every chain sample failed");
    const double count = static_cast<double>(means.size());
    out.mean = Vector::Zero(Xstar.rows());
    out.variance = Vector::Zero(Xstar.rows());
    for (const auto& m : means) out.mean += m;
    out.mean /= count;
    // Law of total variance: E[var] + Var[mean].
    for (std::size_t k = 0; k < means.size(); ++k) {
        out.variance += vars[k];
        out.variance.array() += (means[k] - out.mean).array().square();
    }
    out.variance /= count;
    return out;
}

}  // namespace nngp
