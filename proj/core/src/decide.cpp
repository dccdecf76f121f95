#include "povmap/decide.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace povmap {

std::vector<PointEstimate> point_estimates(const QMatrix& q) {
    const auto r = q.values.cols();
    if (r < 2) throw Error(ErrorCode::TooFewDraws, "point estimates need at least two draws");
    std::vector<PointEstimate> out(q.comunas());
    for (Eigen::Index c = 0; c < q.values.rows(); ++c) {
        // Welford, so long rows do not lose precision.
        double mean = 0.0;
        double m2 = 0.0;
        for (Eigen::Index j = 0; j < r; ++j) {
            const double x = q.values(c, j);
            const double delta = x - mean;
            mean += delta / static_cast<double>(j + 1);
            m2 += delta * (x - mean);
        }
        out[static_cast<std::size_t>(c)] = {mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(r - 1)))};
    }
    return out;
}

Eigen::MatrixXd exceedance_probabilities(const QMatrix& q, const std::vector<double>& thresholds) {
    for (const double a : thresholds) {
        if (!std::isfinite(a)) throw Error(ErrorCode::InvalidConfig, "thresholds must be finite");
    }
    const auto r = q.values.cols();
    if (r < 1) throw Error(ErrorCode::TooFewDraws, "empty Q-matrix");
    Eigen::MatrixXd out(q.values.rows(), static_cast<Eigen::Index>(thresholds.size()));
    for (Eigen::Index c = 0; c < q.values.rows(); ++c) {
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            const auto count = (q.values.row(c).array() > thresholds[j]).count();
            out(c, static_cast<Eigen::Index>(j)) = static_cast<double>(count) / static_cast<double>(r);
        }
    }
    return out;
}

std::vector<double> make_thresholds(double regional_direct, std::vector<double> multipliers) {
    if (!(regional_direct > 0.0) || !std::isfinite(regional_direct)) {
        throw Error(ErrorCode::NonPositiveRegionalEstimate, "regional direct estimate must be positive");
    }
    for (auto& m : multipliers) {
        if (!(m > 0.0)) throw Error(ErrorCode::InvalidConfig, "threshold multipliers must be positive");
        m *= regional_direct;
    }
    std::sort(multipliers.begin(), multipliers.end());
    return multipliers;
}

std::vector<std::vector<bool>> flag(const Eigen::MatrixXd& probabilities, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw Error(ErrorCode::CutoffOutOfRange, "cutoff must lie in (0, 1)");
    std::vector<std::vector<bool>> out(static_cast<std::size_t>(probabilities.rows()));
    for (Eigen::Index c = 0; c < probabilities.rows(); ++c) {
        for (Eigen::Index j = 0; j < probabilities.cols(); ++j) {
            out[static_cast<std::size_t>(c)].push_back(probabilities(c, j) > cutoff);
        }
    }
    return out;
}

ExtremeProbabilities extreme_probabilities(const QMatrix& q) {
    if (q.values.rows() < 2) throw Error(ErrorCode::SingleComuna, "extreme probabilities need two comunas");
    const auto r = q.values.cols();
    if (r < 1) throw Error(ErrorCode::TooFewDraws, "empty Q-matrix");
    std::vector<std::size_t> max_count(q.comunas(), 0);
    std::vector<std::size_t> min_count(q.comunas(), 0);
    for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::Index hi = 0;
        Eigen::Index lo = 0;
        for (Eigen::Index c = 1; c < q.values.rows(); ++c) {
            if (q.values(c, j) > q.values(hi, j)) hi = c;
            if (q.values(c, j) < q.values(lo, j)) lo = c;
        }
        ++max_count[static_cast<std::size_t>(hi)];
        ++min_count[static_cast<std::size_t>(lo)];
    }
    ExtremeProbabilities out;
    for (std::size_t c = 0; c < q.comunas(); ++c) {
        out.prob_max.push_back(static_cast<double>(max_count[c]) / static_cast<double>(r));
        out.prob_min.push_back(static_cast<double>(min_count[c]) / static_cast<double>(r));
    }
    out.worst = static_cast<std::size_t>(std::max_element(max_count.begin(), max_count.end()) - max_count.begin());
    out.best = static_cast<std::size_t>(std::max_element(min_count.begin(), min_count.end()) - min_count.begin());
    return out;
}

std::vector<std::size_t> DecisionReport::table_order() const {
    std::vector<std::size_t> order(comunas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (thresholds.empty()) return order;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return comunas[a].exceedance.front() > comunas[b].exceedance.front();
    });
    return order;
}

DecisionReport decide(const QMatrix& q, double regional_direct, const std::vector<double>& multipliers,
                      double cutoff) {
    DecisionReport report;
    report.alpha = q.alpha;
    report.regional_direct = regional_direct;
    report.multipliers = multipliers;
    std::sort(report.multipliers.begin(), report.multipliers.end());
    report.thresholds = make_thresholds(regional_direct, multipliers);
    report.cutoff = cutoff;

    const auto points = point_estimates(q);
    const auto exceed = exceedance_probabilities(q, report.thresholds);
    const auto flags = flag(exceed, cutoff);
    const auto extremes = extreme_probabilities(q);

    for (std::size_t c = 0; c < q.comunas(); ++c) {
        ComunaDecision d;
        d.comuna_id = q.comuna_ids[c];
        d.posterior_mean = points[c].mean;
        d.posterior_sd = points[c].sd;
        for (Eigen::Index j = 0; j < exceed.cols(); ++j) d.exceedance.push_back(exceed(static_cast<Eigen::Index>(c), j));
        d.flags = flags[c];
        d.prob_max = extremes.prob_max[c];
        d.prob_min = extremes.prob_min[c];
        report.comunas.push_back(std::move(d));
    }
    report.worst = extremes.worst;
    report.best = extremes.best;
    return report;
}

}  // namespace povmap
