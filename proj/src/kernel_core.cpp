#include "nngp/kernel_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nngp/error.hpp"
#include "nngp/special_fns.hpp"

namespace nngp {

using special::bvn_cdf;
using special::bvn_pdf;
using special::std_normal_cdf;
using special::std_normal_pdf;

void NetworkHyper::validate() const {
    require(!layers.empty(), ErrorCode::InvalidArgument, "network needs at least one layer");
    require(slope_a > -1.0 && slope_a < 1.0 && std::isfinite(slope_a), ErrorCode::InvalidArgument,
            "LReLU slope must lie in (-1, 1)");
    require(input_dim >= 1, ErrorCode::InvalidArgument, "input dimension must be positive");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        require(std::isfinite(layer.mu), ErrorCode::InvalidArgument,
                "layer " + std::to_string(l + 1) + ": mean is not finite");
        require(layer.sigma > 0.0 && std::isfinite(layer.sigma), ErrorCode::InvalidArgument,
                "layer " + std::to_string(l + 1) + ": sigma must be positive");
    }
}

NetworkHyper NetworkHyper::uniform(double slope_a, int input_dim, int depth, double mu,
                                   double sigma, bool final_layer_linear) {
    require(depth >= 1, ErrorCode::InvalidArgument, "depth must be at least 1");
    NetworkHyper net;
    net.slope_a = slope_a;
    net.input_dim = input_dim;
    net.layers.assign(static_cast<std::size_t>(depth), LayerHyper{mu, sigma});
    net.final_layer_linear = final_layer_linear;
    return net;
}

NetworkHyper NetworkHyper::with_uniform_layers(double mu, double sigma) const {
    NetworkHyper out = *this;
    for (auto& layer : out.layers) layer = {mu, sigma};
    return out;
}

double linear_kernel(const BivariatePreActivation& p) { return p.s1 * p.s2 * p.rho + p.t1 * p.t2; }

double folded_mean(double mu_tilde, double sigma) {
    return sigma * mu_tilde * std::erf(mu_tilde / std::numbers::sqrt2) +
           2.0 * sigma * std_normal_pdf(mu_tilde);
}

namespace {

// E|Z + a| |Z + b| for standard normal Z.
double abs_product_same_variable(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    // (Z + a)(Z + b) < 0 exactly on (-hi, -lo).
    const double l = -hi;
    const double u = -lo;
    const double mass = std_normal_cdf(u) - std_normal_cdf(l);
    const double pl = std_normal_pdf(l);
    const double pu = std_normal_pdf(u);
    const double second = mass + l * pl - u * pu;
    const double first = pl - pu;
    const double negative_part = second + (a + b) * first + a * b * mass;
    return (1.0 + a * b) - 2.0 * negative_part;
}

}  // namespace

double abs_kernel(const BivariatePreActivation& p) {
    const double m1 = p.t1 / p.s1;
    const double m2 = p.t2 / p.s2;
    const double rho = std::clamp(p.rho, -1.0, 1.0);
    const double sin_theta = std::sqrt((1.0 - rho) * (1.0 + rho));
    const double ss = p.s1 * p.s2;

    if (sin_theta < kDegenerateSin || !std::isfinite(m1) || !std::isfinite(m2)) {
        // G2 is an affine function of the same standard normal as G1.
        const double b = rho > 0.0 ? m2 : -m2;
        return ss * abs_product_same_variable(m1, b);
    }

    const double phi1 = std_normal_pdf(m1);
    const double phi2 = std_normal_pdf(m2);
    const double orthant = 4.0 * bvn_cdf({m1, m2, rho}) - 2.0 * std_normal_cdf(m1) -
                           2.0 * std_normal_cdf(m2) + 1.0;
    const double denom = std::numbers::sqrt2 * sin_theta;
    return ss * ((m1 * m2 + rho) * orthant +
                 2.0 * m1 * phi2 * std::erf((m1 - rho * m2) / denom) +
                 2.0 * m2 * phi1 * std::erf((m2 - rho * m1) / denom) +
                 4.0 * sin_theta * sin_theta * bvn_pdf({m1, m2, rho}));
}

double cross_term(const BivariatePreActivation& p) {
    const double m1 = p.t1 / p.s1;
    const double m2 = p.t2 / p.s2;
    const double rho = std::clamp(p.rho, -1.0, 1.0);
    // Q = Z + m2.
    const double q_abs = folded_mean(m2, 1.0);
    const double q_pos_sq = (1.0 + m2 * m2) * (1.0 - std_normal_cdf(-m2)) + m2 * std_normal_pdf(-m2);
    const double q_signed_sq = 2.0 * q_pos_sq - (1.0 + m2 * m2);
    return p.s1 * p.s2 * (rho * q_signed_sq - rho * m2 * q_abs + m1 * q_abs);
}

namespace {

// Below this ratio of |result| to the size of its terms the four-term sum has
// lost most of its digits (strongly negative means); the orthant form is used.
constexpr double kCancellation = 1e-4;

// E[(Z1 + m1)(Z2 + m2); Z1 > -m1, Z2 > -m2] for standard normals with correlation rho.
// Every term is a truncated moment, so tiny results keep their relative accuracy.
double orthant_product(double m1, double m2, double rho) {
    const double h = -m1;
    const double k = -m2;
    const double r = std::sqrt((1.0 - rho) * (1.0 + rho));
    if (r < kDegenerateSin) {
        if (rho > 0.0) {
            // Z2 = Z1 on Z1 > max(h, k).
            const double c = std::max(h, k);
            const double q = std_normal_cdf(-c);
            const double pc = std_normal_pdf(c);
            return q + c * pc - (h + k) * pc + h * k * q;
        }
        // Z2 = -Z1 on h < Z1 < -k.
        if (h >= -k) return 0.0;
        const double m0 = std_normal_cdf(-k) - std_normal_cdf(h);
        const double m1_ = std_normal_pdf(h) - std_normal_pdf(k);
        const double m2_ = m0 + h * std_normal_pdf(h) + k * std_normal_pdf(k);
        return -(m2_ + (k - h) * m1_ - h * k * m0);
    }
    const double mass = bvn_cdf({m1, m2, rho});
    const double ph = std_normal_pdf(h);
    const double pk = std_normal_pdf(k);
    const double qk = std_normal_cdf(-(k - rho * h) / r);
    const double qh = std_normal_cdf(-(h - rho * k) / r);
    const double e1 = ph * qk + rho * pk * qh;
    const double e2 = pk * qh + rho * ph * qk;
    const double e12 = rho * mass + rho * h * ph * qk + rho * k * pk * qh +
                       r * ph * std_normal_pdf((k - rho * h) / r);
    return e12 - k * e1 - h * e2 + h * k * mass;
}

double lrelu_kernel_orthant(const BivariatePreActivation& p, double a) {
    const double m1 = p.t1 / p.s1;
    const double m2 = p.t2 / p.s2;
    const double rho = std::clamp(p.rho, -1.0, 1.0);
    double sum = orthant_product(m1, m2, rho);
    if (a != 0.0) {
        sum -= a * (orthant_product(m1, -m2, -rho) + orthant_product(-m1, m2, -rho));
        sum += a * a * orthant_product(-m1, -m2, rho);
    }
    return p.s1 * p.s2 * sum;
}

}  // namespace

double lrelu_kernel(const BivariatePreActivation& p, double a) {
    if (a == 1.0) return linear_kernel(p);
    const double up = (1.0 + a) * (1.0 + a);
    const double mixed = 1.0 - a * a;
    const double down = (1.0 - a) * (1.0 - a);
    double sum = up * linear_kernel(p) + down * abs_kernel(p);
    if (mixed != 0.0) sum += mixed * (cross_term(p) + cross_term(p.swapped()));
    const double value = 0.25 * sum;
    const double m1 = p.t1 / p.s1;
    const double m2 = p.t2 / p.s2;
    const double scale = p.s1 * p.s2 * std::sqrt((1.0 + m1 * m1) * (1.0 + m2 * m2));
    if (std::abs(value) < kCancellation * scale && std::isfinite(m1) && std::isfinite(m2))
        return lrelu_kernel_orthant(p, a);
    return value;
}

double lrelu_mean(double mean, double sigma, double a) {
    if (a == 1.0) return mean;
    const double value = 0.5 * ((1.0 + a) * mean + (1.0 - a) * folded_mean(mean / sigma, sigma));
    const double m = mean / sigma;
    if (std::abs(value) < kCancellation * sigma * std::sqrt(1.0 + m * m) && std::isfinite(m)) {
        // E[G; G > 0] + a E[G; G < 0].
        const double pos = m * std_normal_cdf(m) + std_normal_pdf(m);
        const double neg = m * std_normal_cdf(-m) - std_normal_pdf(m);
        return sigma * (pos + a * neg);
    }
    return value;
}

double single_layer_kernel_with_bias(std::span<const double> x1, std::span<const double> x2,
                                     std::span<const double> mu,
                                     std::span<const double> sigma_diag, double a) {
    const std::size_t n = x1.size();
    require(x2.size() == n && mu.size() == n + 1 && sigma_diag.size() == n + 1,
            ErrorCode::InvalidArgument,
            "single_layer_kernel_with_bias: mu and sigma_diag need length dim(x) + 1");
    double v1 = 0.0, v2 = 0.0, c12 = 0.0, t1 = 0.0, t2 = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        require(sigma_diag[i] >= 0.0, ErrorCode::InvalidArgument,
                "single_layer_kernel_with_bias: negative variance");
        const double a1 = i < n ? x1[i] : 1.0;
        const double a2 = i < n ? x2[i] : 1.0;
        v1 += sigma_diag[i] * a1 * a1;
        v2 += sigma_diag[i] * a2 * a2;
        c12 += sigma_diag[i] * a1 * a2;
        t1 += mu[i] * a1;
        t2 += mu[i] * a2;
    }
    require(v1 > 0.0 && v2 > 0.0, ErrorCode::DegenerateInput,
            "single_layer_kernel_with_bias: zero pre-activation variance");
    const double s1 = std::sqrt(v1);
    const double s2 = std::sqrt(v2);
    return lrelu_kernel({s1, s2, std::clamp(c12 / (s1 * s2), -1.0, 1.0), t1, t2}, a);
}

KernelState raw_input_state(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && !x.empty(), ErrorCode::InvalidArgument,
            "input vectors must be non-empty and of equal length");
    const double n = static_cast<double>(x.size());
    KernelState s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.k_xx += x[i] * x[i];
        s.k_yy += y[i] * y[i];
        s.k_xy += x[i] * y[i];
        s.m_x += x[i];
        s.m_y += y[i];
    }
    s.k_xx /= n;
    s.k_yy /= n;
    s.k_xy /= n;
    s.m_x /= n;
    s.m_y /= n;
    return s;
}

KernelState input_state(std::span<const double> x, std::span<const double> y,
                        const LayerHyper& first_layer, double a) {
    const KernelState raw = raw_input_state(x, y);
    require(raw.k_xx > 0.0 && raw.k_yy > 0.0, ErrorCode::DegenerateInput,
            "input vector has zero norm");
    return layer_step(raw, first_layer, a, 1);
}

KernelState layer_step(const KernelState& state, const LayerHyper& layer, double a,
                       int layer_index) {
    if (!(state.k_xx >= kVanishedSignal && state.k_yy >= kVanishedSignal)) {
        throw Error(ErrorCode::VanishedSignal,
                    "signal vanished entering layer " + std::to_string(layer_index));
    }
    const double s1 = layer.sigma * std::sqrt(state.k_xx);
    const double s2 = layer.sigma * std::sqrt(state.k_yy);
    const double rho = std::clamp(state.k_xy / std::sqrt(state.k_xx * state.k_yy), -1.0, 1.0);
    const double t1 = layer.mu * state.m_x;
    const double t2 = layer.mu * state.m_y;

    KernelState out;
    out.k_xx = lrelu_kernel({s1, s1, 1.0, t1, t1}, a);
    out.k_yy = lrelu_kernel({s2, s2, 1.0, t2, t2}, a);
    out.k_xy = lrelu_kernel({s1, s2, rho, t1, t2}, a);
    out.m_x = lrelu_mean(t1, s1, a);
    out.m_y = lrelu_mean(t2, s2, a);
    // Second moments are non-negative and obey Cauchy-Schwarz; rounding may not.
    out.k_xx = std::max(out.k_xx, 0.0);
    out.k_yy = std::max(out.k_yy, 0.0);
    const double bound = std::sqrt(out.k_xx * out.k_yy);
    out.k_xy = std::clamp(out.k_xy, -bound, bound);
    if (!std::isfinite(out.k_xx) || !std::isfinite(out.k_yy)) {
        throw Error(ErrorCode::VanishedSignal,
                    "signal exploded in layer " + std::to_string(layer_index));
    }
    return out;
}

double deep_kernel(std::span<const double> x, std::span<const double> y, const NetworkHyper& net) {
    require(static_cast<int>(x.size()) == net.input_dim && y.size() == x.size(),
            ErrorCode::InvalidArgument, "input length does not match network input_dim");
    const int hidden = net.final_layer_linear ? net.depth() - 1 : net.depth();
    KernelState state = raw_input_state(x, y);
    if (hidden > 0) {
        require(state.k_xx > 0.0 && state.k_yy > 0.0, ErrorCode::DegenerateInput,
                "input vector has zero norm");
    }
    for (int l = 0; l < hidden; ++l) {
        state = layer_step(state, net.layers[static_cast<std::size_t>(l)], net.slope_a, l + 1);
    }
    if (!net.final_layer_linear) return state.k_xy;
    const LayerHyper& out = net.layers.back();
    return out.sigma * out.sigma * state.k_xy + out.mu * out.mu * state.m_x * state.m_y;
}

double arccos_reference(double theta0, double a, int depth) {
    const double pi = std::numbers::pi;
    const double norm = 1.0 + a * a;
    double c = std::cos(theta0);
    double theta = theta0;
    for (int l = 0; l < depth; ++l) {
        // Algebraically the printed map; written as c + O(sin - theta c) so that
        // theta = 0 is an exact fixed point.
        c += (1.0 - a) * (1.0 - a) / (pi * norm) * (std::sin(theta) - theta * c);
        c = std::clamp(c, -1.0, 1.0);
        theta = std::acos(c);
    }
    return c;
}

namespace {

std::span<const double> row_span(const Matrix& X, Eigen::Index i, std::vector<double>& buf) {
    buf.resize(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) buf[static_cast<std::size_t>(j)] = X(i, j);
    return buf;
}

}  // namespace

Matrix kernel_matrix(const Matrix& X, const Matrix& Y, const NetworkHyper& net) {
    net.validate();
    require(X.cols() == net.input_dim && Y.cols() == net.input_dim, ErrorCode::InvalidArgument,
            "kernel_matrix: column count does not match input_dim");
    Matrix K(X.rows(), Y.rows());
    std::vector<double> xb, yb;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto xi = row_span(X, i, xb);
        for (Eigen::Index j = 0; j < Y.rows(); ++j) {
            K(i, j) = deep_kernel(xi, row_span(Y, j, yb), net);
        }
    }
    return K;
}

Matrix kernel_matrix(const Matrix& X, const NetworkHyper& net) {
    net.validate();
    require(X.cols() == net.input_dim, ErrorCode::InvalidArgument,
            "kernel_matrix: column count does not match input_dim");
    Matrix K(X.rows(), X.rows());
    std::vector<double> xb, yb;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto xi = row_span(X, i, xb);
        for (Eigen::Index j = i; j < X.rows(); ++j) {
            K(i, j) = deep_kernel(xi, row_span(X, j, yb), net);
            K(j, i) = K(i, j);
        }
    }
    return K;
}

LayerHyper factored_layer(double mean_c, double var_c, double abs_g_mean, double sq_g_mean) {
    require(var_c > 0.0 && sq_g_mean > 0.0, ErrorCode::InvalidArgument,
            "factored_layer: variances must be positive");
    return {mean_c * abs_g_mean, std::sqrt(var_c * sq_g_mean)};
}

}  // namespace nngp
