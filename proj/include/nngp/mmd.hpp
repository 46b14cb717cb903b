#pragma once

// Unbiased MMD^2 between finite-width network outputs and draws from the
// limiting GP, evaluated at a fixed set of Gaussian probe inputs.

#include <cstdint>
#include <vector>

#include "nngp/finite_net.hpp"

namespace nngp {

/// Rows are samples; columns are function values at the probe points.
using SampleSet = Matrix;

/// U-statistic with kernel exp(-||u - v||^2). Needs at least two rows per set.
double mmd2_unbiased(const SampleSet& xs, const SampleSet& ys);

struct NullBand {
    double low = 0.0;   ///< 2.5% quantile of the permutation distribution
    double high = 0.0;  ///< 97.5% quantile
};

/// Permutation null of mmd2_unbiased under exchangeability of the pooled rows.
NullBand permutation_band(const SampleSet& xs, const SampleSet& ys, int n_permutations,
                          std::uint64_t seed);

struct ConvergenceConfig {
    WeightScheme scheme = WeightScheme::rce(SchemeKind::F1);
    int depth = 4;
    std::vector<int> widths{16, 64, 256, 1024};
    int n_probe = 4;
    int n_samples = 2000;
    int input_dim = 10;
    double slope_a = 0.0;
    int n_permutations = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ConvergencePoint {
    int width = 0;
    double mmd2 = 0.0;
    NullBand null;
};

struct ConvergenceCurve {
    Matrix probes;  ///< n_probe x input_dim
    std::vector<ConvergencePoint> points;
};

/// n_samples draws from the limiting GP at the probes. For schemes whose limit
/// depends on the global latent A, each draw samples its own A per layer.
SampleSet limiting_gp_draws(const Matrix& probes, const ConvergenceConfig& config,
                            std::uint64_t stream);

/// n_samples outputs of freshly sampled networks of the given width.
SampleSet finite_net_draws(const Matrix& probes, const ConvergenceConfig& config, int width,
                           std::uint64_t stream);

ConvergenceCurve convergence_experiment(const ConvergenceConfig& config);

}  // namespace nngp
