#include "nngp/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nngp/error.hpp"
#include "nngp/gp.hpp"
#include "nngp/rng.hpp"
#include "parallel.hpp"

namespace nngp {

namespace {

double gauss_kernel(const SampleSet& a, Eigen::Index i, const SampleSet& b, Eigen::Index j) {
    return std::exp(-(a.row(i) - b.row(j)).squaredNorm());
}

void check_pair(const SampleSet& xs, const SampleSet& ys) {
    require(xs.rows() >= 2 && ys.rows() >= 2, ErrorCode::InvalidArgument,
            "mmd: each sample set needs at least two rows");
    require(xs.cols() == ys.cols(), ErrorCode::InvalidArgument,
            "mmd: sample sets have different dimensions");
}

// Linear interpolation between order statistics, as numpy's default quantile.
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double mmd2_unbiased(const SampleSet& xs, const SampleSet& ys) {
    check_pair(xs, ys);
    const Eigen::Index n = xs.rows();
    const Eigen::Index m = ys.rows();
    double sxx = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) sxx += gauss_kernel(xs, i, xs, j);
    double syy = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) syy += gauss_kernel(ys, i, ys, j);
    double sxy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) sxy += gauss_kernel(xs, i, ys, j);
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return 2.0 * sxx / (dn * (dn - 1.0)) + 2.0 * syy / (dm * (dm - 1.0)) - 2.0 * sxy / (dn * dm);
}

NullBand permutation_band(const SampleSet& xs, const SampleSet& ys, int n_permutations,
                          std::uint64_t seed) {
    check_pair(xs, ys);
    require(n_permutations >= 2, ErrorCode::InvalidArgument,
            "mmd: need at least two permutations for a null band");
    const Eigen::Index n = xs.rows();
    const Eigen::Index m = ys.rows();
    const Eigen::Index N = n + m;
    Matrix pooled(N, xs.cols());
    pooled << xs, ys;

    // Off-diagonal pooled Gram matrix; the diagonal is zeroed so row sums exclude i == j.
    Matrix G(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        G(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < N; ++j) G(i, j) = G(j, i) = gauss_kernel(pooled, i, pooled, j);
    }
    const Vector row_sum = G.rowwise().sum();
    const double total = row_sum.sum();

    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    std::vector<double> stats(static_cast<std::size_t>(n_permutations));
    detail::parallel_for(stats.size(), [&](std::size_t k) {
        Engine eng = substream(seed, "permutation", k);
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(N));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        // Fisher-Yates with explicit draws keeps the permutation platform independent.
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(i + 1));
            std::swap(idx[i], idx[std::min(j, i)]);
        }
        double sxx = 0.0;  // ordered pairs
        double rows_x = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) {
            const Eigen::Index ia = idx[static_cast<std::size_t>(a)];
            rows_x += row_sum(ia);
            for (Eigen::Index b = 0; b < n; ++b) sxx += G(ia, idx[static_cast<std::size_t>(b)]);
        }
        const double sxy = rows_x - sxx;
        const double syy = total - sxx - 2.0 * sxy;
        stats[k] = sxx / (dn * (dn - 1.0)) + syy / (dm * (dm - 1.0)) - 2.0 * sxy / (dn * dm);
    });
    return {quantile(stats, 0.025), quantile(stats, 0.975)};
}

void ConvergenceConfig::validate() const {
    scheme.validate();
    require(depth >= 2, ErrorCode::InvalidArgument, "mmd: depth must be at least 2");
    require(!widths.empty(), ErrorCode::InvalidArgument, "mmd: widths must not be empty");
    for (std::size_t i = 0; i < widths.size(); ++i) {
        require(widths[i] >= 1, ErrorCode::InvalidArgument, "mmd: widths must be positive");
        require(i == 0 || widths[i] >= widths[i - 1], ErrorCode::InvalidArgument,
                "mmd: widths must be nondecreasing");
    }
    require(n_probe >= 1 && input_dim >= 1, ErrorCode::InvalidArgument,
            "mmd: probe count and input dimension must be positive");
    require(n_samples >= 2, ErrorCode::InvalidArgument, "mmd: n_samples must be at least 2");
    require(n_permutations >= 2, ErrorCode::InvalidArgument,
            "mmd: n_permutations must be at least 2");
}

SampleSet limiting_gp_draws(const Matrix& probes, const ConvergenceConfig& config,
                            std::uint64_t stream) {
    const NetworkShape shape{config.input_dim, std::vector<int>(static_cast<std::size_t>(config.depth - 1), 1), 1};
    SampleSet out(config.n_samples, probes.rows());
    const std::uint64_t draw_seed = substream_seed(config.seed, "gp-draws", stream);
    if (!config.scheme.has_random_hyper()) {
        const std::vector<double> no_latent(static_cast<std::size_t>(config.depth), 0.0);
        const OutputMoments mom =
            limiting_output_moments(probes, limiting_hyper(shape, config.scheme, config.slope_a, no_latent));
        return sample_gaussian(mom.mean, mom.cov, config.n_samples, draw_seed);
    }
    detail::parallel_for(static_cast<std::size_t>(config.n_samples), [&](std::size_t d) {
        Engine eng = substream(draw_seed, "latent", d);
        const NetworkHyper net = sample_limiting_hyper(shape, config.scheme, config.slope_a, eng);
        OutputMoments mom;
        try {
            mom = limiting_output_moments(probes, net);
        } catch (const Error& e) {
            // Latents that silence a layer give the zero function, as a finite net would.
            if (e.code() != ErrorCode::VanishedSignal) throw;
            out.row(static_cast<Eigen::Index>(d)).setZero();
            return;
        }
        out.row(static_cast<Eigen::Index>(d)) =
            sample_gaussian(mom.mean, mom.cov, 1, substream_seed(draw_seed, "draw", d)).row(0);
    });
    return out;
}

SampleSet finite_net_draws(const Matrix& probes, const ConvergenceConfig& config, int width,
                           std::uint64_t stream) {
    const NetworkShape shape{config.input_dim,
                             std::vector<int>(static_cast<std::size_t>(config.depth - 1), width), 1};
    SampleSet out(config.n_samples, probes.rows());
    const auto base = static_cast<std::uint64_t>(config.n_samples) * stream;
    detail::parallel_for(static_cast<std::size_t>(config.n_samples), [&](std::size_t d) {
        const std::uint64_t seed = substream_seed(config.seed, "weights", base + d);
        out.row(static_cast<Eigen::Index>(d)) =
            sample_outputs(shape, config.scheme, config.slope_a, seed, probes).col(0).transpose();
    });
    return out;
}

ConvergenceCurve convergence_experiment(const ConvergenceConfig& config) {
    config.validate();
    ConvergenceCurve curve;
    Engine probe_eng = substream(config.seed, "probes");
    std::normal_distribution<double> normal;
    curve.probes.resize(config.n_probe, config.input_dim);
    for (Eigen::Index i = 0; i < curve.probes.rows(); ++i)
        for (Eigen::Index j = 0; j < curve.probes.cols(); ++j) curve.probes(i, j) = normal(probe_eng);

    for (std::size_t w = 0; w < config.widths.size(); ++w) {
        const SampleSet nets = finite_net_draws(curve.probes, config, config.widths[w], w);
        const SampleSet gps = limiting_gp_draws(curve.probes, config, w);
        ConvergencePoint pt;
        pt.width = config.widths[w];
        pt.mmd2 = mmd2_unbiased(nets, gps);
        pt.null = permutation_band(nets, gps, config.n_permutations,
                                   substream_seed(config.seed, "null", w));
        curve.points.push_back(pt);
    }
    return curve;
}

}  // namespace nngp
