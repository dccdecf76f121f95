#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "povmap/sampler.hpp"

namespace povmap {

// Split-chain potential scale reduction factor for one scalar. Each chain is
// cut into halves of n = floor(len / 2) draws (the middle draw of an odd
// chain is dropped); with W the mean within-half variance and B/n the
// variance of the half means,
//     V = (n - 1) / n * W + B / n,   R = sqrt(V / W).
// Needs at least one chain of at least 4 draws. Returns NaN when W == 0.
double split_rhat(const std::vector<std::vector<double>>& chains);

struct PsrfEntry {
    std::string param;
    double rhat = 0.0;
};

// Split R-hat for every monitored scalar of the flattened state.
std::vector<PsrfEntry> psrf(const DrawsStore& draws, const ModelData& data, Monitor monitor = Monitor::HyperAndMu);

// Entries with R-hat >= threshold or NaN.
std::size_t count_unconverged(const std::vector<PsrfEntry>& entries, double threshold = 1.1);

}  // namespace povmap
