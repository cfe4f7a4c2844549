#pragma once

// Smooth cutoff profiles shared by the oscillatory kernels and the
// frequency-zone decomposition.

#include <cmath>

namespace hyplab::cutoffs {

// C^inf one-sided step: 0 for s <= 0, 1 for s >= 1.
inline double smoothstep(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double f = std::exp(-1.0 / s), g = std::exp(-1.0 / (1.0 - s));
    return f / (f + g);
}

// Plateau profile: 1 for |x| <= lo, 0 for |x| >= hi.
inline double plateau(double x, double lo, double hi) {
    const double a = std::abs(x);
    if (a <= lo) return 1.0;
    if (a >= hi) return 0.0;
    return smoothstep((hi - a) / (hi - lo));
}

// Mollifier bump, == 1 at 0, supported on (-r, r).
inline double bump(double x, double r) {
    const double u = x / r;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

}  // namespace hyplab::cutoffs
