#pragma once

#include <cmath>
#include <numbers>

#include "activeht/rng.hpp"

namespace activeht {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x), computed without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Box-Muller; always consumes exactly two uniforms.
inline double standard_normal(CounterStream& s) {
    const double r = std::sqrt(-2.0 * std::log(s.uniform_pos()));
    const double theta = 2.0 * std::numbers::pi * s.uniform();
    return r * std::cos(theta);
}

/// |N(0, scale^2)|
inline double half_normal(CounterStream& s, double scale) { return scale * std::fabs(standard_normal(s)); }

/// Beta(1, b) by inversion: 1 - U^{1/b}.
inline double beta_one(CounterStream& s, double b) { return 1.0 - std::pow(s.uniform_pos(), 1.0 / b); }

namespace detail {

inline double poisson_inversion(CounterStream& s, double mean) {
    const double u = s.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    double k = 0.0;
    while (u > cdf && k < 1000.0) {
        k += 1.0;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

// Hormann's transformed rejection with squeeze (PTRS), valid for mean >= 10.
inline double poisson_ptrs(CounterStream& s, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = s.uniform() - 0.5;
        const double v = s.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1.0))
            return k;
    }
}

} // namespace detail

/// Poisson(mean): inversion below 10, PTRS above.
inline double poisson(CounterStream& s, double mean) {
    if (mean <= 0.0) return 0.0;
    return mean < 10.0 ? detail::poisson_inversion(s, mean) : detail::poisson_ptrs(s, mean);
}

} // namespace activeht
