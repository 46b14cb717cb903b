#pragma once

// Scalar Gaussian special functions used by every kernel formula.

#include <cmath>
#include <numbers>

namespace nngp::special {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)

inline double erf(double z) { return std::erf(z); }

inline double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Heaviside step with Theta(0) = 1/2.
inline double heaviside(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : 0.5); }

inline double sgn(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

struct BvnArgs {
    double h = 0.0;
    double k = 0.0;
    double rho = 0.0;
};

/// Standard bivariate normal density at (h, k). Throws DegenerateInput when |rho| >= 1.
double bvn_pdf(const BvnArgs& args);

/// P(X <= h, Y <= k) for standard bivariate normal (X, Y) with correlation rho.
///
/// Drezner-Wesolowsky / Genz Gauss-Legendre scheme: 6, 12 or 20 nodes depending
/// on |rho|, with the asymptotic expansion in sqrt(1 - rho^2) for |rho| >= 0.925.
/// |rho| within 1e-15 of 1 is evaluated with the exact degenerate limit.
/// Infinite limits are accepted.
double bvn_cdf(const BvnArgs& args);

}  // namespace nngp::special
