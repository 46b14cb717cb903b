#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library; Monte-Carlo oracles use their own generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

class Xoshiro {
public:
    using result_type = std::uint64_t;
    explicit Xoshiro(std::uint64_t seed) {
        for (auto& w : s_) {
            seed += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() {
        const std::uint64_t r = rotl(s_[1] * 5, 7) * 9;  // xoshiro256**
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Standard normals by Box-Muller, two per pair of uniforms.
class Normal {
public:
    explicit Normal(std::uint64_t seed) : eng_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = eng_.uniform();
        while (u1 <= 0.0) u1 = eng_.uniform();
        const double u2 = eng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        have_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }
    Xoshiro& engine() { return eng_; }

private:
    Xoshiro eng_;
    double spare_ = 0.0;
    bool have_ = false;
};

/// Running mean and standard error.
struct Moments {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double se() const { return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)); }
};

inline double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Phi2(h, k; rho) = Phi(h) Phi(k) + (1 / 2pi) int_0^{asin rho} exp(-(h^2 + k^2 - 2hk sin t) / (2 cos^2 t)) dt,
/// a finite smooth integral for |rho| < 1.
inline double bvn_cdf_quadrature(double h, double k, double rho) {
    auto f = [&](double t) {
        const double s = std::sin(t);
        const double c2 = 1.0 - s * s;
        return std::exp(-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c2));
    };
    using boost::math::quadrature::gauss_kronrod;
    const double v = gauss_kronrod<double, 61>::integrate(f, 0.0, std::asin(rho), 12, 1e-15);
    return Phi(h) * Phi(k) + v / (2.0 * std::numbers::pi);
}

/// E[psi(G1) psi(G2)], E[psi(G1)], E[psi(G2)] and the second moments by Monte Carlo,
/// for G ~ N((t1, t2), [[s1^2, rho s1 s2], [rho s1 s2, s2^2]]).
struct LReluMC {
    Moments k11, k22, k12, m1, m2;
};

inline LReluMC lrelu_mc(double s1, double s2, double rho, double t1, double t2, double a, long n,
                        std::uint64_t seed) {
    Normal z(seed);
    LReluMC out;
    const double c = std::sqrt(std::max(0.0, (1.0 - rho) * (1.0 + rho)));
    auto psi = [a](double v) { return v > 0.0 ? v : a * v; };
    for (long i = 0; i < n; ++i) {
        const double z1 = z();
        const double z2 = z();
        const double g1 = t1 + s1 * z1;
        const double g2 = t2 + s2 * (rho * z1 + c * z2);
        const double p1 = psi(g1);
        const double p2 = psi(g2);
        out.k11.add(p1 * p1);
        out.k22.add(p2 * p2);
        out.k12.add(p1 * p2);
        out.m1.add(p1);
        out.m2.add(p2);
    }
    return out;
}

/// Zero-mean arc-cosine map cos(theta) -> cos(theta') for LReLU(a), derived from
/// psi(z) = ((1 + a) z + (1 - a)|z|) / 2 with E|Z1||Z2| = (2/pi)(sin t + (pi/2 - t) cos t)
/// and E psi(Z)^2 = (1 + a^2) / 2.
inline double arccos_step(double cos_theta, double a) {
    const double c = std::clamp(cos_theta, -1.0, 1.0);
    const double th = std::acos(c);
    const double abs_prod = 2.0 / std::numbers::pi * (std::sin(th) + (std::numbers::pi / 2 - th) * c);
    return ((1 + a) * (1 + a) * c + (1 - a) * (1 - a) * abs_prod) / (2.0 * (1 + a * a));
}

}  // namespace oracle
