#include "povmap/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace povmap {

double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) throw Error(ErrorCode::InsufficientDraws, "no chains");
    const std::size_t len = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != len) throw Error(ErrorCode::InsufficientDraws, "chains differ in length");
    }
    if (len < 4) throw Error(ErrorCode::InsufficientDraws, "split R-hat needs at least 4 draws per chain");

    const std::size_t n = len / 2;
    std::vector<double> means;
    std::vector<double> variances;
    for (const auto& c : chains) {
        for (const std::size_t start : {std::size_t{0}, len - n}) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += c[start + i];
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += (c[start + i] - mean) * (c[start + i] - mean);
            means.push_back(mean);
            variances.push_back(ss / static_cast<double>(n - 1));
        }
    }
    const double m = static_cast<double>(means.size());
    double w = 0.0;
    double grand = 0.0;
    for (std::size_t j = 0; j < means.size(); ++j) {
        w += variances[j];
        grand += means[j];
    }
    w /= m;
    grand /= m;
    double b_over_n = 0.0;
    for (const double mean : means) b_over_n += (mean - grand) * (mean - grand);
    b_over_n /= (m - 1.0);

    if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double nd = static_cast<double>(n);
    const double v = (nd - 1.0) / nd * w + b_over_n;
    return std::sqrt(v / w);
}

std::vector<PsrfEntry> psrf(const DrawsStore& draws, const ModelData& data, Monitor monitor) {
    if (draws.n_chains() == 0 || draws.retained() < 4) {
        throw Error(ErrorCode::InsufficientDraws, "split R-hat needs at least 4 retained draws per chain");
    }
    const auto names = parameter_names(data);
    const std::size_t k = monitored_count(data, monitor);

    // series[param][chain][draw]
    std::vector<std::vector<std::vector<double>>> series(
        k, std::vector<std::vector<double>>(draws.n_chains(), std::vector<double>(draws.retained())));
    for (std::size_t c = 0; c < draws.n_chains(); ++c) {
        for (std::size_t r = 0; r < draws.retained(); ++r) {
            const auto flat = flatten(draws.chains[c][r]);
            for (std::size_t j = 0; j < k; ++j) series[j][c][r] = flat[j];
        }
    }
    std::vector<PsrfEntry> out;
    out.reserve(k);
    for (std::size_t j = 0; j < k; ++j) out.push_back({names[j], split_rhat(series[j])});
    return out;
}

std::size_t count_unconverged(const std::vector<PsrfEntry>& entries, double threshold) {
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (std::isnan(e.rhat) || e.rhat >= threshold) ++n;
    }
    return n;
}

}  // namespace povmap
