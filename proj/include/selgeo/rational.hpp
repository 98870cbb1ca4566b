#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace selgeo {

/// Exact ratio of two integers, kept in lowest terms with positive denominator.
/// Used for the imbalance ratio R = n_maj / n_min, where exactness matters for
/// deciding when alpha * R is an integer.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;

    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static Rational from_int(std::int64_t n) { return Rational(n, 1); }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool is_integer() const { return den == 1; }

    /// True when alpha * this is an integer.
    bool integral_multiple(std::int64_t alpha) const { return (alpha * num) % den == 0; }

    /// Smallest positive integer alpha such that alpha * this is an integer.
    std::int64_t smallest_alpha() const { return den; }

    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }

    /// Continued-fraction approximation of x by a rational with denominator at
    /// most max_den. Returns nullopt when no such rational lies within tol.
    static std::optional<Rational> approximate(double x, std::int64_t max_den = 1000000,
                                               double tol = 1e-9);
};

}  // namespace selgeo
