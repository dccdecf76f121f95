#pragma once

#include <cmath>
#include <cstddef>
#include <random>

#include "povmap/error.hpp"

namespace povmap {

// Univariate slice sampler with stepping out and shrinkage. Each side of the
// bracket may be extended at most `max_steps` times; exceeding that means the
// target is not normalisable in practice and raises SliceNonConvergence.
template <class LogDensity, class Urbg>
double slice_sample(double x0, LogDensity&& log_density, Urbg& rng, double width = 1.0,
                    std::size_t max_steps = 50) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    const double f0 = log_density(x0);
    if (!std::isfinite(f0)) {
        throw Error(ErrorCode::SliceNonConvergence, "slice sampler started outside the support");
    }
    const double level = f0 - expo(rng);

    double lo = x0 - width * unif(rng);
    double hi = lo + width;
    std::size_t steps = 0;
    while (log_density(lo) > level) {
        lo -= width;
        if (++steps > max_steps) throw Error(ErrorCode::SliceNonConvergence, "left bracket did not close");
    }
    steps = 0;
    while (log_density(hi) > level) {
        hi += width;
        if (++steps > max_steps) throw Error(ErrorCode::SliceNonConvergence, "right bracket did not close");
    }

    for (int iter = 0; iter < 1000; ++iter) {
        const double x1 = lo + (hi - lo) * unif(rng);
        if (log_density(x1) > level) return x1;
        if (x1 < x0) {
            lo = x1;
        } else {
            hi = x1;
        }
    }
    throw Error(ErrorCode::SliceNonConvergence, "shrinkage did not find a point on the slice");
}

}  // namespace povmap
