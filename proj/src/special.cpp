#include "ougf/special.hpp"

#include <cmath>
#include <stdexcept>

namespace ougf {

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma requires x > 0");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // asymptotic series with Bernoulli coefficients B_2..B_14
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = inv2 * (1.0 / 12.0 +
                    inv2 * (-1.0 / 120.0 +
                    inv2 * (1.0 / 252.0 +
                    inv2 * (-1.0 / 240.0 +
                    inv2 * (1.0 / 132.0 +
                    inv2 * (-691.0 / 32760.0 +
                    inv2 * (1.0 / 12.0)))))));
    result += std::log(x) - 0.5 * inv - series;
    return result;
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma requires x > 0");
    return std::lgamma(x);
}

double pow1m_compensated(double u, double q) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return q - 1.0;  // (1-u)^q = 0 at u = 1 (q > 0)
    if (q * u < 1e-2 && u < 1e-3) {
        // binomial series: C(q,2)u^2 - C(q,3)u^3 + C(q,4)u^4 - C(q,5)u^5
        const double c2 = 0.5 * q * (q - 1.0);
        const double c3 = c2 * (q - 2.0) / 3.0;
        const double c4 = c3 * (q - 3.0) / 4.0;
        const double c5 = c4 * (q - 4.0) / 5.0;
        return u * u * (c2 - u * (c3 - u * (c4 - u * c5)));
    }
    return std::expm1(q * std::log1p(-u)) + q * u;
}

}  // namespace ougf
