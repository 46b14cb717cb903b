#include <cmath>
#include <cstring>

#include <doctest.h>

#include "nngp/error.hpp"
#include "nngp/mmd.hpp"
#include "oracles.hpp"

using namespace nngp;
using doctest::Approx;

namespace {

Matrix gaussian_set(int n, int d, double shift, std::uint64_t seed) {
    oracle::Normal z(seed);
    Matrix S(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) S(i, j) = shift + z();
    return S;
}

// Textbook form: averages over i != j within each set and over all cross pairs.
double mmd2_oracle(const Matrix& X, const Matrix& Y) {
    auto k = [](const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) { return std::exp(-(u - v).squaredNorm()); };
    const auto n = X.rows(), m = Y.rows();
    double xx = 0, yy = 0, xy = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) xx += k(X.row(i), X.row(j));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            if (i != j) yy += k(Y.row(i), Y.row(j));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) xy += k(X.row(i), Y.row(j));
    return xx / double(n * (n - 1)) + yy / double(m * (m - 1)) - 2 * xy / double(n * m);
}

ConvergenceConfig small_config(SchemeKind kind) {
    ConvergenceConfig c;
    c.scheme = WeightScheme::rce(kind);
    c.depth = 3;
    c.widths = {4, 32};
    c.n_samples = 200;
    c.n_permutations = 50;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("mmd2_unbiased against the direct formula") {
    const Matrix X = gaussian_set(30, 4, 0.0, 1);
    const Matrix Y = gaussian_set(25, 4, 0.3, 2);
    CHECK(mmd2_unbiased(X, Y) == Approx(mmd2_oracle(X, Y)).epsilon(1e-12));
    CHECK(mmd2_unbiased(X, Y) == Approx(mmd2_unbiased(Y, X)).epsilon(1e-13));
    const Matrix shift = Eigen::RowVectorXd::LinSpaced(4, -3, 5).replicate(30, 1);
    const Matrix shift_y = Eigen::RowVectorXd::LinSpaced(4, -3, 5).replicate(25, 1);
    CHECK(std::abs(mmd2_unbiased(X + shift, Y + shift_y) - mmd2_unbiased(X, Y)) <= 1e-12);
}

TEST_CASE("mmd2_unbiased special cases") {
    const Matrix U = Eigen::RowVectorXd::Constant(3, 0.0).replicate(10, 1);
    const Matrix V = Eigen::RowVectorXd::Constant(3, 20.0).replicate(12, 1);
    CHECK(std::abs(mmd2_unbiased(U, V) - 2.0) <= 1e-6);

    // X = Y: within terms equal A, the cross term includes the n unit diagonal entries.
    const Matrix X = gaussian_set(15, 2, 0.0, 3);
    double A = 0.0;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            if (i != j) A += std::exp(-(X.row(i) - X.row(j)).squaredNorm());
    A /= 15.0 * 14.0;
    CHECK(mmd2_unbiased(X, X) == Approx(2.0 * (A - 1.0) / 15.0).epsilon(1e-12));

    CHECK_THROWS_AS(mmd2_unbiased(X.topRows(1), X), Error);
    CHECK_THROWS_AS(mmd2_unbiased(X, X.topRows(1)), Error);
    CHECK_THROWS_AS(mmd2_unbiased(X, gaussian_set(5, 3, 0, 1)), Error);
}

TEST_CASE("mmd2_unbiased is centred under the null") {
    oracle::Moments est;
    int positive = 0;
    for (int t = 0; t < 100; ++t) {
        const double v = mmd2_unbiased(gaussian_set(40, 3, 0.0, 1000 + t), gaussian_set(40, 3, 0.0, 5000 + t));
        est.add(v);
        positive += v > 0.0;
    }
    CHECK(std::abs(est.mean) <= 3.0 * est.se());
    CHECK(positive >= 30);
    CHECK(positive <= 70);
    // A real shift is detected.
    CHECK(mmd2_unbiased(gaussian_set(100, 3, 0.0, 1), gaussian_set(100, 3, 0.7, 2)) > 5 * est.se());
}

TEST_CASE("permutation band") {
    const Matrix X = gaussian_set(60, 3, 0.0, 7);
    const Matrix Y = gaussian_set(60, 3, 0.0, 8);
    const NullBand b = permutation_band(X, Y, 200, 1);
    CHECK(b.low < b.high);
    CHECK(b.low < 0.0);
    const NullBand again = permutation_band(X, Y, 200, 1);
    CHECK(again.low == b.low);
    CHECK(again.high == b.high);
    const double v = mmd2_unbiased(X, Y);
    CHECK(v >= b.low);
    CHECK(v <= b.high);
    const Matrix Z = gaussian_set(60, 3, 1.5, 9);
    CHECK(mmd2_unbiased(X, Z) > permutation_band(X, Z, 200, 1).high);
    CHECK_THROWS_AS(permutation_band(X, Y, 1, 1), Error);
}

TEST_CASE("GP against GP falls inside the null band") {
    for (SchemeKind kind : {SchemeKind::F1, SchemeKind::F4}) {
        ConvergenceConfig c = small_config(kind);
        c.n_samples = 400;
        c.n_permutations = 200;
        Matrix probes = gaussian_set(4, c.input_dim, 0.0, 11);
        const SampleSet a = limiting_gp_draws(probes, c, 0);
        const SampleSet b = limiting_gp_draws(probes, c, 1);
        CHECK(a.rows() == 400);
        CHECK(a.cols() == 4);
        const double v = mmd2_unbiased(a, b);
        const NullBand band = permutation_band(a, b, 200, 5);
        CHECK(v >= band.low);
        CHECK(v <= band.high);
        const SampleSet a2 = limiting_gp_draws(probes, c, 0);
        CHECK(std::memcmp(a.data(), a2.data(), sizeof(double) * a.size()) == 0);
    }
}

TEST_CASE("finite-net draws") {
    const ConvergenceConfig c = small_config(SchemeKind::F2);
    const Matrix probes = gaussian_set(4, c.input_dim, 0.0, 12);
    const SampleSet s = finite_net_draws(probes, c, 8, 0);
    CHECK(s.rows() == 200);
    CHECK(s.cols() == 4);
    const SampleSet again = finite_net_draws(probes, c, 8, 0);
    CHECK(std::memcmp(s.data(), again.data(), sizeof(double) * s.size()) == 0);
    // Row d is one freshly sampled network.
    const NetworkShape shape{c.input_dim, {8, 8}, 1};
    const Matrix one = sample_outputs(shape, c.scheme, 0.0, substream_seed(c.seed, "weights", 5), probes);
    CHECK((s.row(5) - one.col(0).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convergence experiment") {
    const ConvergenceConfig c = small_config(SchemeKind::F1);
    const ConvergenceCurve curve = convergence_experiment(c);
    CHECK(curve.probes.rows() == 4);
    CHECK(curve.probes.cols() == 10);
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points[0].width == 4);
    CHECK(curve.points[1].width == 32);
    for (const auto& p : curve.points) CHECK(p.null.low < p.null.high);
    // Width 4 with ReLU is far from Gaussian.
    CHECK(curve.points[0].mmd2 > curve.points[0].null.high);
    const ConvergenceCurve again = convergence_experiment(c);
    CHECK(again.points[1].mmd2 == curve.points[1].mmd2);
    CHECK(again.points[1].null.high == curve.points[1].null.high);

    ConvergenceConfig bad = c;
    bad.widths = {32, 4};
    CHECK_THROWS_AS(convergence_experiment(bad), Error);
    bad = c;
    bad.n_samples = 1;
    CHECK_THROWS_AS(convergence_experiment(bad), Error);
    bad = c;
    bad.depth = 1;
    CHECK_THROWS_AS(convergence_experiment(bad), Error);
}
