#include "nngp/finite_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nngp/error.hpp"

namespace nngp {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt3 = 1.7320508075688772;

double lrelu(double z, double a) { return z > 0.0 ? z : a * z; }

bool is_gaussian_layer(const WeightScheme& scheme, int layer, int depth) {
    return !scheme.is_rce() || layer == 0 || layer == depth - 1;
}

LayerHyper gaussian_layer_hyper(const WeightScheme& scheme) {
    return scheme.is_rce() ? LayerHyper{0.0, scheme.edge_sigma} : LayerHyper{scheme.mu, scheme.sigma};
}

int layer_rows(const NetworkShape& shape, int l) {
    return l + 1 < shape.depth() ? shape.widths[static_cast<std::size_t>(l)] : shape.output_dim;
}

int layer_cols(const NetworkShape& shape, int l) {
    return l == 0 ? shape.input_dim : shape.widths[static_cast<std::size_t>(l - 1)];
}

// acc[p0 + k] = sum_i w[i] h[i * P + p0 + k], summed in increasing i as in forward().
template <std::size_t K>
void dot_block(const double* w, const double* h, std::size_t cols, std::size_t P, std::size_t p0,
               double* acc) {
    double sum[K] = {};
    for (std::size_t i = 0; i < cols; ++i) {
        const double* hi = h + i * P + p0;
        for (std::size_t k = 0; k < K; ++k) sum[k] += w[i] * hi[k];
    }
    for (std::size_t k = 0; k < K; ++k) acc[p0 + k] = sum[k];
}

// Emits the weights of layer `l` one row at a time through sink(j, row) and
// records the RCE latents, if any, through latent_sink(record). Draw order per
// layer: A, B (rows), C (columns), then D row-major.
template <class Sink, class LatentSink>
void generate_layer(const NetworkShape& shape, const WeightScheme& scheme, int l,
                    std::uint64_t seed, Sink&& sink, LatentSink&& latent_sink) {
    const int rows = layer_rows(shape, l);
    const int cols = layer_cols(shape, l);
    const auto ncols = static_cast<std::size_t>(cols);
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(cols));
    Engine eng = substream(seed, "layer", static_cast<std::uint64_t>(l));
    std::vector<double> row(ncols);

    if (is_gaussian_layer(scheme, l, shape.depth())) {
        const LayerHyper hp = gaussian_layer_hyper(scheme);
        const double shift = hp.mu * inv_root_n;
        std::normal_distribution<double> normal;
        for (int j = 0; j < rows; ++j) {
            for (auto& w : row) w = (hp.sigma * normal(eng) + shift) * inv_root_n;
            sink(j, row.data());
        }
        return;
    }

    LatentRecord latent;
    latent.a = unit_uniform(eng);
    latent.b.resize(static_cast<std::size_t>(rows));
    latent.c.resize(ncols);
    for (auto& b : latent.b) b = unit_uniform(eng);
    for (auto& c : latent.c) c = unit_uniform(eng);
    const double A = latent.a;
    const double keep = 1.0 - inv_root_n;
    const double* C = latent.c.data();

    // f_and_mean(B, C_i, D) -> (F, E_D F).
    auto emit = [&](auto&& f_and_mean) {
        for (int j = 0; j < rows; ++j) {
            const double B = latent.b[static_cast<std::size_t>(j)];
            fill_unit_uniform(eng, row.data(), ncols);
            for (std::size_t i = 0; i < ncols; ++i) {
                const auto [f, m] = f_and_mean(B, C[i], row[i]);
                row[i] = (f - m * keep) * inv_root_n;
            }
            sink(j, row.data());
        }
    };

    switch (scheme.kind) {
        case SchemeKind::F1:
            emit([](double, double, double D) { return std::pair{kSqrt2 * D, 0.0}; });
            break;
        case SchemeKind::F2:
            emit([](double, double, double D) { return std::pair{2.0 * kSqrt2 * D - 0.5, -0.5}; });
            break;
        case SchemeKind::F3:
            emit([A](double, double Ci, double D) {
                const double m = -1.5 * A * Ci;
                return std::pair{kSqrt2 * D + m, m};
            });
            break;
        case SchemeKind::F4:
            emit([A](double, double Ci, double D) {
                const double m = -0.1 * A * A * Ci * Ci - 0.4;
                return std::pair{kSqrt2 * D * (A + kSqrt3) + m, m};
            });
            break;
        case SchemeKind::Custom: {
            const CustomScheme& cs = *scheme.custom;
            emit([&cs, A](double B, double Ci, double D) {
                const double g = cs.g(B);
                return std::pair{g * cs.h(A, Ci, D), g * cs.h_mean_d(A, Ci)};
            });
            break;
        }
        case SchemeKind::IidGaussian:
            break;
    }
    latent_sink(std::move(latent));
}

}  // namespace

void NetworkShape::validate() const {
    require(input_dim >= 1 && output_dim >= 1, ErrorCode::InvalidArgument,
            "network shape: input and output dimensions must be positive");
    for (int w : widths)
        require(w >= 1, ErrorCode::InvalidArgument, "network shape: widths must be positive");
}

WeightScheme WeightScheme::iid(double mu, double sigma) {
    WeightScheme s;
    s.kind = SchemeKind::IidGaussian;
    s.mu = mu;
    s.sigma = sigma;
    return s;
}

WeightScheme WeightScheme::rce(SchemeKind kind) {
    WeightScheme s;
    s.kind = kind;
    return s;
}

std::string WeightScheme::name() const {
    switch (kind) {
        case SchemeKind::IidGaussian: return "iid";
        case SchemeKind::F1: return "f1";
        case SchemeKind::F2: return "f2";
        case SchemeKind::F3: return "f3";
        case SchemeKind::F4: return "f4";
        case SchemeKind::Custom: return "custom";
    }
    return "unknown";
}

void WeightScheme::validate() const {
    if (kind == SchemeKind::IidGaussian) {
        require(sigma > 0.0 && std::isfinite(mu), ErrorCode::InvalidArgument,
                "iid scheme: sigma must be positive and mu finite");
    } else {
        require(edge_sigma > 0.0, ErrorCode::InvalidArgument,
                "RCE scheme: edge layer sigma must be positive");
    }
    if (kind == SchemeKind::Custom) {
        require(custom && custom->g && custom->h && custom->h_mean_d && custom->h_mean_c &&
                    custom->h_var_c,
                ErrorCode::InvalidArgument, "custom scheme: every component must be provided");
    }
}

LayerHyper scheme_hyperparams(const WeightScheme& scheme, double A) {
    scheme.validate();
    switch (scheme.kind) {
        case SchemeKind::IidGaussian: return {scheme.mu, scheme.sigma};
        case SchemeKind::F1: return {0.0, kSqrt2};
        case SchemeKind::F2: return {-0.5, std::sqrt(8.0)};
        case SchemeKind::F3: return {0.0, kSqrt2};
        case SchemeKind::F4: {
            const double spread = std::abs(A + kSqrt3);
            const double sigma = scheme.f4_sigma == F4Sigma::Table ? 2.0 * spread : kSqrt2 * spread;
            return {-0.1 * A * A - 0.4, sigma};
        }
        case SchemeKind::Custom: {
            const CustomScheme& cs = *scheme.custom;
            return factored_layer(cs.h_mean_c(A), cs.h_var_c(A), cs.g_abs_mean, cs.g_sq_mean);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown weight scheme");
}

SampledNetwork sample_weights(const NetworkShape& shape, const WeightScheme& scheme, double a,
                              std::uint64_t seed) {
    shape.validate();
    scheme.validate();
    SampledNetwork net;
    net.slope_a = a;
    const int depth = shape.depth();
    net.weights.reserve(static_cast<std::size_t>(depth));
    net.latents.resize(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) {
        Matrix W(layer_rows(shape, l), layer_cols(shape, l));
        generate_layer(
            shape, scheme, l, seed,
            [&W](int j, const double* w) {
                for (Eigen::Index i = 0; i < W.cols(); ++i) W(j, i) = w[i];
            },
            [&](LatentRecord rec) { net.latents[static_cast<std::size_t>(l)] = std::move(rec); });
        net.weights.push_back(std::move(W));
    }
    return net;
}

namespace {

// Applies the first n_layers layers; LReLU on every hidden layer, none on the output.
Matrix propagate(const SampledNetwork& net, const Matrix& X, std::size_t n_layers) {
    require(!net.weights.empty(), ErrorCode::InvalidArgument, "forward: network has no layers");
    require(X.cols() == net.weights.front().cols(), ErrorCode::InvalidArgument,
            "forward: input width does not match the first layer");
    const Eigen::Index P = X.rows();
    const std::size_t depth = net.weights.size();
    Matrix h = X;  // P x n
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Matrix& W = net.weights[l];
        require(W.cols() == h.cols(), ErrorCode::InvalidArgument,
                "forward: layer shapes do not chain");
        const bool hidden = l + 1 < depth;
        Matrix next(P, W.rows());
        for (Eigen::Index p = 0; p < P; ++p) {
            for (Eigen::Index j = 0; j < W.rows(); ++j) {
                double acc = 0.0;
                for (Eigen::Index i = 0; i < W.cols(); ++i) acc += W(j, i) * h(p, i);
                next(p, j) = hidden ? lrelu(acc, net.slope_a) : acc;
            }
        }
        h = std::move(next);
    }
    return h;
}

}  // namespace

Matrix forward(const SampledNetwork& net, const Matrix& X) {
    return propagate(net, X, net.weights.size());
}

Matrix hidden_features(const SampledNetwork& net, const Matrix& X) {
    require(net.weights.size() >= 2, ErrorCode::InvalidArgument,
            "hidden_features: network has no hidden layer");
    return propagate(net, X, net.weights.size() - 1);
}

Matrix sample_outputs(const NetworkShape& shape, const WeightScheme& scheme, double a,
                      std::uint64_t seed, const Matrix& X) {
    shape.validate();
    scheme.validate();
    require(X.cols() == shape.input_dim, ErrorCode::InvalidArgument,
            "sample_outputs: input width does not match the network");
    const std::size_t P = static_cast<std::size_t>(X.rows());
    // Activations stored unit-major: h[i * P + p].
    std::vector<double> h(static_cast<std::size_t>(X.cols()) * P);
    for (std::size_t p = 0; p < P; ++p)
        for (Eigen::Index i = 0; i < X.cols(); ++i)
            h[static_cast<std::size_t>(i) * P + p] = X(static_cast<Eigen::Index>(p), i);

    const int depth = shape.depth();
    std::vector<double> next;
    std::vector<double> acc(P);
    for (int l = 0; l < depth; ++l) {
        const int rows = layer_rows(shape, l);
        const bool hidden = l + 1 < depth;
        next.assign(static_cast<std::size_t>(rows) * P, 0.0);
        const std::size_t cols = static_cast<std::size_t>(layer_cols(shape, l));
        generate_layer(
            shape, scheme, l, seed,
            [&](int j, const double* w) {
                std::size_t p0 = 0;
                for (; p0 + 4 <= P; p0 += 4) dot_block<4>(w, h.data(), cols, P, p0, acc.data());
                for (; p0 < P; ++p0) dot_block<1>(w, h.data(), cols, P, p0, acc.data());
                for (std::size_t p = 0; p < P; ++p)
                    next[static_cast<std::size_t>(j) * P + p] = hidden ? lrelu(acc[p], a) : acc[p];
            },
            [](LatentRecord) {});
        h.swap(next);
    }
    const int out_dim = shape.output_dim;
    Matrix out(static_cast<Eigen::Index>(P), out_dim);
    for (std::size_t p = 0; p < P; ++p)
        for (int j = 0; j < out_dim; ++j)
            out(static_cast<Eigen::Index>(p), j) = h[static_cast<std::size_t>(j) * P + p];
    return out;
}

NetworkHyper limiting_hyper(const NetworkShape& shape, const WeightScheme& scheme, double a,
                            const std::vector<double>& latent_a) {
    shape.validate();
    scheme.validate();
    const int depth = shape.depth();
    require(static_cast<int>(latent_a.size()) == depth || !scheme.is_rce(),
            ErrorCode::InvalidArgument, "limiting_hyper: need one latent A per layer");
    NetworkHyper net;
    net.slope_a = a;
    net.input_dim = shape.input_dim;
    net.final_layer_linear = true;
    for (int l = 0; l < depth; ++l) {
        net.layers.push_back(is_gaussian_layer(scheme, l, depth)
                                 ? gaussian_layer_hyper(scheme)
                                 : scheme_hyperparams(scheme, latent_a[static_cast<std::size_t>(l)]));
    }
    return net;
}

NetworkHyper sample_limiting_hyper(const NetworkShape& shape, const WeightScheme& scheme, double a,
                                   Engine& eng) {
    std::vector<double> latent(static_cast<std::size_t>(shape.depth()), 0.0);
    for (int l = 0; l < shape.depth(); ++l)
        if (!is_gaussian_layer(scheme, l, shape.depth()))
            latent[static_cast<std::size_t>(l)] = unit_uniform(eng);
    return limiting_hyper(shape, scheme, a, latent);
}

OutputMoments limiting_output_moments(const Matrix& X, const NetworkHyper& net) {
    net.validate();
    require(net.final_layer_linear, ErrorCode::InvalidArgument,
            "limiting_output_moments: network needs a linear output layer");
    require(X.cols() == net.input_dim, ErrorCode::InvalidArgument,
            "limiting_output_moments: column count does not match input_dim");
    const Eigen::Index n = X.rows();
    const int hidden = net.depth() - 1;
    const LayerHyper& top = net.layers.back();
    OutputMoments out{Vector(n), Matrix(n, n)};
    std::vector<double> xi(static_cast<std::size_t>(X.cols())), xj(xi.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) xi[static_cast<std::size_t>(c)] = X(i, c);
        for (Eigen::Index j = i; j < n; ++j) {
            for (Eigen::Index c = 0; c < X.cols(); ++c) xj[static_cast<std::size_t>(c)] = X(j, c);
            KernelState s = raw_input_state(xi, xj);
            for (int l = 0; l < hidden; ++l)
                s = layer_step(s, net.layers[static_cast<std::size_t>(l)], net.slope_a, l + 1);
            out.cov(i, j) = out.cov(j, i) = top.sigma * top.sigma * s.k_xy;
            if (j == i) out.mean(i) = top.mu * s.m_x;
        }
    }
    return out;
}

}  // namespace nngp
