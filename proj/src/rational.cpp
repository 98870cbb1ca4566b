#include "selgeo/rational.hpp"

#include <cmath>

namespace selgeo {

std::optional<Rational> Rational::approximate(double x, std::int64_t max_den, double tol) {
    if (!std::isfinite(x)) return std::nullopt;
    // Stern-Brocot / continued-fraction convergents.
    double value = x;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double fl = std::floor(value);
        if (fl > 9e17 || fl < -9e17) break;
        const auto a = static_cast<std::int64_t>(fl);
        const std::int64_t p2 = a * p1 + p0;
        const std::int64_t q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = value - fl;
        if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <=
            tol * std::max(1.0, std::abs(x)))
            break;
        if (frac < 1e-15) break;
        value = 1.0 / frac;
    }
    if (q1 == 0) return std::nullopt;
    const Rational r(p1, q1);
    if (std::abs(x - r.value()) <= tol * std::max(1.0, std::abs(x))) return r;
    return std::nullopt;
}

}  // namespace selgeo
