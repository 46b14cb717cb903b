#include "nngp/special_fns.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "nngp/error.hpp"

namespace nngp::special {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegenerateRho = 1e-15;

// Half of the symmetric Gauss-Legendre rules on [-1, 1]: 6, 12 and 20 points.
struct HalfRule {
    int size;
    std::array<double, 10> w;
    std::array<double, 10> x;
};

constexpr HalfRule kRules[3] = {
    {3,
     {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
     {0.9324695142031522, 0.6612093864662647, 0.2386191860831970}},
    {6,
     {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
      0.2334925365383547, 0.2491470458134029},
     {0.9815606342467191, 0.9041172563704750, 0.7699026741943050, 0.5873179542866171,
      0.3678314989981802, 0.1252334085114692}},
    {10,
     {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
      0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
      0.1491729864726037, 0.1527533871307259},
     {0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
      0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
      0.2277858511416451, 0.07652652113349733}},
};

// Upper orthant probability P(X > dh, Y > dk) for finite dh, dk.
double upper_orthant(double dh, double dk, double r) {
    const double ar = std::abs(r);
    const HalfRule& rule = ar < 0.3 ? kRules[0] : (ar < 0.75 ? kRules[1] : kRules[2]);

    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;

    if (ar < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = std::asin(r);
        for (int i = 0; i < rule.size; ++i) {
            double sn = std::sin(asr * (1.0 - rule.x[i]) / 2.0);
            bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (1.0 + rule.x[i]) / 2.0);
            bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        bvn = bvn * asr / (2.0 * kTwoPi);
        return bvn + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (ar < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        double asr = -(bs / as + hk) / 2.0;
        if (asr > -100.0) {
            bvn = a * std::exp(asr) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        }
        if (hk > -100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(kTwoPi) * std_normal_cdf(-b / a);
            bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (int i = 0; i < rule.size; ++i) {
            for (int is = -1; is <= 1; is += 2) {
                const double xs = std::pow(a + a * is * rule.x[i], 2);
                const double rs = std::sqrt(1.0 - xs);
                asr = -(bs / xs + hk) / 2.0;
                if (asr > -100.0) {
                    const double sp = 1.0 + c * xs * (1.0 + d * xs);
                    const double ep = std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
                    bvn += a * rule.w[i] * std::exp(asr) * (ep - sp);
                }
            }
        }
        bvn = -bvn / kTwoPi;
    }
    if (r > 0.0) return bvn + std_normal_cdf(-std::max(h, k));
    if (h >= k) return -bvn;
    const double lower = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h)
                                 : std_normal_cdf(-h) - std_normal_cdf(-k);
    return lower - bvn;
}

}  // namespace

double bvn_pdf(const BvnArgs& args) {
    const double one_minus = (1.0 - args.rho) * (1.0 + args.rho);
    require(one_minus > 0.0, ErrorCode::DegenerateInput,
            "bvn_pdf: degenerate correlation |rho| = 1");
    const double q = args.h * args.h - 2.0 * args.rho * args.h * args.k + args.k * args.k;
    return std::exp(-0.5 * q / one_minus) / (kTwoPi * std::sqrt(one_minus));
}

double bvn_cdf(const BvnArgs& args) {
    const double h = args.h;
    const double k = args.k;
    const double rho = std::clamp(args.rho, -1.0, 1.0);
    constexpr double inf = std::numeric_limits<double>::infinity();

    if (h == -inf || k == -inf) return 0.0;
    if (h == inf) return k == inf ? 1.0 : std_normal_cdf(k);
    if (k == inf) return std_normal_cdf(h);

    if (rho >= 1.0 - kDegenerateRho) return std_normal_cdf(std::min(h, k));
    if (rho <= -1.0 + kDegenerateRho)
        return std::max(0.0, std_normal_cdf(h) - std_normal_cdf(-k));

    return std::clamp(upper_orthant(-h, -k, rho), 0.0, 1.0);
}

}  // namespace nngp::special
