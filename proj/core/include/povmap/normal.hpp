#pragma once

#include <cmath>
#include <numbers>

namespace povmap {

inline double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Upper tail 1 - Phi(z), accurate for large positive z.
inline double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// Phi(b) - Phi(a) for a <= b. When both limits sit in the upper tail the
// difference of survival functions is used, so nothing cancels.
inline double std_normal_interval(double a, double b) {
    if (!(a < b)) return 0.0;
    if (a > 0.0) return std_normal_sf(a) - std_normal_sf(b);
    return std_normal_cdf(b) - std_normal_cdf(a);
}

}  // namespace povmap
