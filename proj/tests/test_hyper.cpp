#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include "nngp/data.hpp"
#include "nngp/error.hpp"
#include "nngp/hyper.hpp"
#include "oracles.hpp"

using namespace nngp;
using doctest::Approx;

namespace {

NetworkHyper sine_net(int depth = 2) { return NetworkHyper::uniform(0.0, 1, depth, 0.0, 1.0); }

double prior_oracle(double mu, double s2) {
    const boost::math::normal_distribution<double> n(-1.0, std::sqrt(2.0));
    const boost::math::inverse_gamma_distribution<double> ig(2.5, 6.0);
    return std::log(boost::math::pdf(n, mu)) + std::log(boost::math::pdf(ig, s2));
}

}  // namespace

TEST_CASE("hyper-prior density") {
    for (double mu : {-3.0, -1.0, 0.0, 0.7})
        for (double s2 : {0.2, 1.7, 5.0})
            CHECK(hyper_prior_logpdf(mu, s2) == Approx(prior_oracle(mu, s2)).epsilon(1e-12));
    const double mode = 6.0 / 3.5;
    CHECK(mode == Approx(1.7143).epsilon(1e-4));
    for (double d : {1e-3, 1e-2, 0.3}) {
        CHECK(hyper_prior_logpdf(-1, mode) > hyper_prior_logpdf(-1, mode + d));
        CHECK(hyper_prior_logpdf(-1, mode) > hyper_prior_logpdf(-1, mode - d));
        CHECK(hyper_prior_logpdf(-1, 2.0) > hyper_prior_logpdf(-1 + d, 2.0));
        CHECK(hyper_prior_logpdf(-1, 2.0) > hyper_prior_logpdf(-1 - d, 2.0));
    }
    CHECK(hyper_prior_logpdf(-1, 1.7143) - hyper_prior_logpdf(-1, 10) > 0);
    CHECK_THROWS_AS(hyper_prior_logpdf(0, 0), Error);
    CHECK_THROWS_AS(hyper_prior_logpdf(0, -1), Error);
    CHECK_THROWS_AS(hyper_prior_logpdf(0, 1, HyperPrior{0, 0, 1, 1}), Error);
}

TEST_CASE("grid evaluation on the sine data") {
    const Dataset d = gen_sine(0);
    // sigma2 axis 0.5, 0.6, ..., 4.5 passes through 2.
    const GridSpec spec{-2.0, 1.0, 0.5, 4.5, 41};
    const GridResult ml = grid_eval(d.X_train, d.y_train, sine_net(), d.noise_var, spec, GridTarget::LogMarginalLikelihood);
    const GridResult lp = grid_eval(d.X_train, d.y_train, sine_net(), d.noise_var, spec, GridTarget::LogPosterior);

    CHECK(ml.values.rows() == 41);
    CHECK(ml.failed_cells == 0);
    CHECK(std::abs(ml.sig2_axis(15) - 2.0) <= 1e-12);

    // The constrained maximum sits near sigma^2 = 2.
    CHECK(ml.constrained_argmax.mu == 0.0);
    CHECK(ml.constrained_argmax.sigma2 >= 1.0);
    CHECK(ml.constrained_argmax.sigma2 <= 3.0);
    // The constrained line is evaluated at mu = 0 exactly.
    for (int j = 0; j < 41; ++j)
        CHECK(ml.mu0_values(j) == hyper_log_likelihood(d.X_train, d.y_train, sine_net(), d.noise_var, 0.0, ml.sig2_axis(j)));
    CHECK(ml.argmax.value >= ml.constrained_argmax.value - 1e-9 * std::abs(ml.argmax.value) - 1e-6);
    CHECK(ml.argmax.value == ml.values.maxCoeff());

    // Posterior minus likelihood is the prior surface, cellwise.
    double worst = 0.0;
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 41; ++j)
            worst = std::max(worst, std::abs(lp.values(i, j) - ml.values(i, j) -
                                             hyper_prior_logpdf(ml.mu_axis(i), ml.sig2_axis(j))));
    CHECK(worst <= 1e-12);

    const GridResult again = grid_eval(d.X_train, d.y_train, sine_net(), d.noise_var, spec, GridTarget::LogMarginalLikelihood);
    CHECK(std::memcmp(again.values.data(), ml.values.data(), sizeof(double) * ml.values.size()) == 0);
}

TEST_CASE("degenerate grids") {
    const Dataset d = gen_sine(3);
    const GridSpec one{-0.5, -0.5, 2.0, 2.0, 1};
    const GridResult g = grid_eval(d.X_train, d.y_train, sine_net(), d.noise_var, one, GridTarget::LogMarginalLikelihood);
    CHECK(g.values.size() == 1);
    CHECK(g.values(0, 0) == hyper_log_likelihood(d.X_train, d.y_train, sine_net(), d.noise_var, -0.5, 2.0));
    CHECK(g.argmax.value == g.values(0, 0));
    CHECK(g.constrained_argmax.mu_index == -1);

    // Cells whose signal explodes are recorded as -inf without aborting.
    const GridSpec wide{-1.0, 1.0, 1.0, 1e200, 3};
    const GridResult w = grid_eval(d.X_train, d.y_train, sine_net(8), d.noise_var, wide, GridTarget::LogMarginalLikelihood);
    CHECK(w.failed_cells > 0);
    CHECK(std::isfinite(w.argmax.value));

    CHECK_THROWS_AS(grid_eval(d.X_train, d.y_train, sine_net(), 0.1, GridSpec{1, 0, 1, 2, 5}, GridTarget::LogPosterior), Error);
    CHECK_THROWS_AS(grid_eval(d.X_train, d.y_train, sine_net(), 0.1, GridSpec{0, 1, 0, 2, 5}, GridTarget::LogPosterior), Error);
}

TEST_CASE("Metropolis-Hastings on an analytic Gaussian target") {
    const double m1 = 0.5, m2 = 3.0, v1 = 1.0, v2 = 0.5;
    auto target = [&](double mu, double s2) {
        return -0.5 * (mu - m1) * (mu - m1) / v1 - 0.5 * (s2 - m2) * (s2 - m2) / v2;
    };
    MHConfig cfg;
    cfg.n_samples = 1000;
    cfg.thin = 5;
    cfg.burn_in = 100;
    oracle::Moments mean_mu, mean_s2;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const Chain c = mh_sample(target, cfg, {m1, m2});
        CHECK(c.samples.size() == 1000);
        double a = 0.0, b = 0.0;
        for (const auto& s : c.samples) {
            a += s.mu;
            b += s.sigma2;
            CHECK(s.sigma2 > 0.0);
        }
        mean_mu.add(a / 1000);
        mean_s2.add(b / 1000);
        CHECK(c.acceptance_rate > 0.0);
        CHECK(c.acceptance_rate < 1.0);
    }
    CHECK(std::abs(mean_mu.mean - m1) <= 3 * mean_mu.se());
    CHECK(std::abs(mean_s2.mean - m2) <= 3 * mean_s2.se());
}

TEST_CASE("Metropolis-Hastings acceptance rule") {
    MHConfig cfg;
    cfg.seed = 4;
    cfg.n_samples = 500;
    cfg.thin = 1;
    cfg.burn_in = 0;
    // Flat target: every proposal with sigma2 > 0 is accepted.
    long calls = 0;
    auto flat = [&](double, double) {
        ++calls;
        return 0.0;
    };
    const Chain c = mh_sample(flat, cfg, {0.0, 1.0});
    CHECK(c.proposals == 500);
    CHECK(c.accepted == calls - 1);
    CHECK(c.acceptance_rate == Approx(static_cast<double>(calls - 1) / 500.0));
    CHECK(c.acceptance_rate < 1.0);  // random walk in sigma2 from 1 does cross 0
    CHECK(c.acceptance_rate > 0.5);
    calls = 0;
    const Chain again = mh_sample(flat, cfg, {0.0, 1.0});
    CHECK(again.acceptance_rate == c.acceptance_rate);

    // Determinism.
    auto g = [](double mu, double s2) { return -mu * mu - (s2 - 2) * (s2 - 2); };
    cfg.seed = 12;
    const Chain a = mh_sample(g, cfg, {0, 2});
    const Chain b = mh_sample(g, cfg, {0, 2});
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].mu == b.samples[i].mu);
        CHECK(a.samples[i].sigma2 == b.samples[i].sigma2);
    }

    CHECK_THROWS_AS(mh_sample(g, cfg, {0, -1}), Error);
    MHConfig bad = cfg;
    bad.prop_corr = 1.0;
    CHECK_THROWS_AS(mh_sample(g, bad, {0, 1}), Error);
}

TEST_CASE("MH chain MAP is consistent with grid refinement") {
    const Dataset d = gen_sine(0);
    MHConfig cfg;
    cfg.seed = 2;
    cfg.n_samples = 60;
    cfg.thin = 5;
    const Chain c = mh_sample(d.X_train, d.y_train, sine_net(), d.noise_var, {}, cfg, {-0.5, 2.0});
    CHECK(c.samples.size() == 60);
    const HyperSample m = c.map();
    for (std::size_t i = 0; i < c.samples.size(); ++i) CHECK(c.log_densities[i] <= c.map_log_density());

    // Nested grids: resolution 2^k * 20 + 1 contains every coarser node, so maxima cannot decrease.
    std::vector<double> maxima;
    for (int res : {21, 41, 81, 161}) {
        const GridSpec spec{-2.5, 1.0, 0.1, 8.0, res};
        maxima.push_back(grid_eval(d.X_train, d.y_train, sine_net(), d.noise_var, spec, GridTarget::LogPosterior).argmax.value);
    }
    for (std::size_t k = 1; k < maxima.size(); ++k) CHECK(maxima[k] >= maxima[k - 1]);
    CHECK(m.mu >= -2.5);
    CHECK(m.mu <= 1.0);
    const double gap = maxima[3] - maxima[2];
    CHECK(c.map_log_density() <= maxima[3] + gap + 1e-12);
}

TEST_CASE("marginal predictive") {
    const Dataset d = gen_sine(1);
    const NetworkHyper net = sine_net();

    Chain point;
    point.samples.assign(5, {-0.4, 2.2});
    point.log_densities.assign(5, 0.0);
    const auto mp = marginal_predictive(d.X_test, d.X_train, d.y_train, net, point, d.noise_var);
    const auto pp = posterior_predictive(d.X_test, d.X_train, d.y_train,
                                         GPModel{net.with_uniform_layers(-0.4, std::sqrt(2.2)), d.noise_var});
    CHECK((mp.mean - pp.mean).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((mp.variance - pp.variance()).cwiseAbs().maxCoeff() <= 1e-12);

    Chain two;
    two.samples = {{-0.4, 2.2}, {0.3, 1.1}, {-1.2, 3.5}};
    two.log_densities = {0, 0, 0};
    const auto mix = marginal_predictive(d.X_test, d.X_train, d.y_train, net, two, d.noise_var);
    Vector m = Vector::Zero(d.X_test.rows()), second = Vector::Zero(d.X_test.rows()),
           min_var = Vector::Constant(d.X_test.rows(), INFINITY);
    for (const auto& s : two.samples) {
        const auto p = posterior_predictive(d.X_test, d.X_train, d.y_train,
                                            GPModel{net.with_uniform_layers(s.mu, std::sqrt(s.sigma2)), d.noise_var});
        m += p.mean / 3.0;
        second.array() += (p.variance().array() + p.mean.array().square()) / 3.0;
        min_var = min_var.cwiseMin(p.variance());
    }
    CHECK((mix.mean - m).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((mix.variance.array() - (second.array() - m.array().square())).abs().maxCoeff() <= 1e-10);
    CHECK((mix.variance - min_var).minCoeff() >= -1e-12);

    Chain empty;
    CHECK_THROWS_AS(marginal_predictive(d.X_test, d.X_train, d.y_train, net, empty, d.noise_var), Error);
}

TEST_CASE("marginal predictive from a real chain fits the sine data") {
    const Dataset d = gen_sine(2);
    MHConfig cfg;
    cfg.seed = 9;
    cfg.n_samples = 20;
    cfg.thin = 5;
    const Chain c = mh_sample(d.X_train, d.y_train, sine_net(), d.noise_var, {}, cfg, {0.0, 2.0});
    const auto mp = marginal_predictive(d.X_test, d.X_train, d.y_train, sine_net(), c, d.noise_var);
    const double mse = (mp.mean - d.y_test).squaredNorm() / static_cast<double>(d.y_test.size());
    const double centred = (d.y_test.array() - d.y_test.mean()).square().mean();
    CHECK(std::isfinite(mse));
    CHECK(mse < centred);
    CHECK(mp.skipped == 0);
}
