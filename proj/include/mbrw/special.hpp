#ifndef MBRW_SPECIAL_HPP
#define MBRW_SPECIAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "mbrw/error.hpp"

namespace mbrw {

namespace detail {

// Lanczos approximation, g = 7, nine terms.
inline constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

inline double log_gamma_lanczos(double x)
{
    // valid for x >= 0.5
    const double z = x - 1.0;
    double a = kLanczos[0];
    const double t = z + 7.5;
    for (int i = 1; i < 9; ++i) {
        a += kLanczos[i] / (z + i);
    }
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

inline double log_gamma_stirling(double x)
{
    // asymptotic series, truncated after the x^-13 term; accurate to ~1e-17 for x >= 10
    const double r = 1.0 / x;
    const double r2 = r * r;
    double series = 1.0 / 156.0;
    series = series * r2 - 691.0 / 360360.0;
    series = series * r2 + 1.0 / 1188.0;
    series = series * r2 - 1.0 / 1680.0;
    series = series * r2 + 1.0 / 1260.0;
    series = series * r2 - 1.0 / 360.0;
    series = series * r2 + 1.0 / 12.0;
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series * r;
}

} // namespace detail

/// log Gamma(x) for x > 0. Lanczos below 10, Stirling series above.
inline double log_gamma(double x)
{
    if (!(x > 0.0)) {
        fail(ErrorKind::DomainError, "log_gamma requires x > 0");
    }
    if (std::isinf(x)) {
        return x;
    }
    if (x == 1.0 || x == 2.0) {
        return 0.0;
    }
    if (x >= 10.0) {
        return detail::log_gamma_stirling(x);
    }
    if (x < 0.5) {
        return detail::log_gamma_lanczos(x + 1.0) - std::log(x);
    }
    return detail::log_gamma_lanczos(x);
}

/// log(n!) via log_gamma.
inline double log_factorial(double n) { return log_gamma(n + 1.0); }

inline double log_add_exp(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) {
        return b;
    }
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double log_sum_exp(std::span<const double> xs)
{
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : xs) {
        hi = std::max(hi, x);
    }
    if (!std::isfinite(hi)) {
        return hi;
    }
    double acc = 0.0;
    for (double x : xs) {
        acc += std::exp(x - hi);
    }
    return hi + std::log(acc);
}

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

} // namespace mbrw

#endif
