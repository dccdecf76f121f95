#include "povmap/fgt.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "povmap/normal.hpp"
#include "povmap/quadrature.hpp"

namespace povmap {

namespace {

// Half-width, in standard deviations, of the window the quadrature keeps
// around the point of [a, b] closest to the normal mode.
constexpr double kQuadratureWindow = 12.0;

void check_sigma(double sigma_t) {
    if (!(sigma_t > 0.0) || !std::isfinite(sigma_t)) {
        throw Error(ErrorCode::NonPositiveSigma, "sigma_t must be positive");
    }
}

void check_line(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorCode::NonPositiveLine, "poverty line must be positive");
}

}  // namespace

void PovertyLines::validate() const {
    check_line(k_urban);
    check_line(k_rural);
}

double PovertyLines::log_line(int urbanicity) const { return std::log1p(line(urbanicity)); }

double e_g0(double theta, double sigma_t, double l) {
    check_sigma(sigma_t);
    if (!(l > 0.0)) throw Error(ErrorCode::NonPositiveLine, "transformed poverty line must be positive");
    const double v = std_normal_interval(-theta / sigma_t, (l - theta) / sigma_t);
    return std::clamp(v, 0.0, 1.0);
}

double e_g1(double theta, double sigma_t, double k) {
    check_sigma(sigma_t);
    check_line(k);
    const double l = std::log1p(k);
    const double headcount = e_g0(theta, sigma_t, l);
    if (headcount == 0.0) return 0.0;

    const double s2 = sigma_t * sigma_t;
    const double shifted = std_normal_interval((-theta - s2) / sigma_t, (l - theta - s2) / sigma_t);
    // exp(theta + s2/2) * shifted, formed in log space so a large theta cannot
    // overflow before the tiny interval probability scales it back down.
    const double mean_part = shifted > 0.0 ? std::exp(theta + 0.5 * s2 + std::log(shifted)) : 0.0;
    const double v = ((k + 1.0) * headcount - mean_part) / k;
    return std::clamp(v, 0.0, headcount);
}

double e_g_alpha(double theta, double sigma_t, double k, double alpha, std::size_t nodes) {
    check_sigma(sigma_t);
    check_line(k);
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::NegativeAlpha, "alpha must be >= 0");

    const double l = std::log1p(k);
    const double a = -theta / sigma_t;
    const double b = (l - theta) / sigma_t;
    const double nearest = std::clamp(0.0, a, b);
    const double lo = std::max(a, nearest - kQuadratureWindow);
    const double hi = std::min(b, nearest + kQuadratureWindow);
    if (!(lo < hi)) return 0.0;

    const auto integrand = [&](double z) {
        const double gap = std::max(0.0, (k + 1.0 - std::exp(theta + sigma_t * z)) / k);
        const double weight = alpha == 0.0 ? 1.0 : std::pow(gap, alpha);
        return weight * std_normal_pdf(z);
    };
    const double v = integrate(integrand, lo, hi, gauss_legendre(nodes));
    return std::clamp(v, 0.0, 1.0);
}

double expected_fgt(double theta, double sigma_t, double k, double alpha) {
    if (alpha == 0.0) {
        check_line(k);
        return e_g0(theta, sigma_t, std::log1p(k));
    }
    if (alpha == 1.0) return e_g1(theta, sigma_t, k);
    return e_g_alpha(theta, sigma_t, k, alpha);
}

double fgt_term(double income, double k, double alpha) {
    if (!(income < k)) return 0.0;
    if (alpha == 0.0) return 1.0;
    return std::pow((k - income) / k, alpha);
}

Eigen::VectorXd q_tilde(const ModelState& state, const HouseholdTable& households, const PovertyLines& lines,
                        double alpha) {
    if (state.theta.size() != static_cast<Eigen::Index>(households.psus.size())) {
        throw Error(ErrorCode::RosterMismatch, "state has " + std::to_string(state.theta.size()) +
                                                   " PSU effects, roster has " +
                                                   std::to_string(households.psus.size()));
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(households.comunas.size()));
    for (std::size_t i = 0; i < households.psus.size(); ++i) {
        const auto& psu = households.psus[i];
        const auto& stratum = households.strata[psu.stratum];
        const double e = expected_fgt(state.theta[static_cast<Eigen::Index>(i)], state.sigma_t,
                                      lines.line(stratum.urbanicity), alpha);
        out[static_cast<Eigen::Index>(stratum.comuna)] += psu.weight_mass * e;
    }
    return out;
}

QMatrix build_q_matrix(const DrawsStore& draws, const HouseholdTable& households, const PovertyLines& lines,
                       double alpha, unsigned threads) {
    lines.validate();
    if (draws.total() == 0) throw Error(ErrorCode::InsufficientDraws, "no retained draws");
    QMatrix q;
    q.alpha = alpha;
    for (const auto& c : households.comunas) q.comuna_ids.push_back(c.comuna_id);
    const std::size_t total = draws.total();
    q.values.resize(static_cast<Eigen::Index>(households.comunas.size()), static_cast<Eigen::Index>(total));
    q.provenance = "seed=" + std::to_string(draws.seed) + ";chains=" + std::to_string(draws.n_chains()) +
                   ";burn_in=" + std::to_string(draws.burn_in) + ";retained=" + std::to_string(draws.retained()) +
                   ";thin=" + std::to_string(draws.thin);

    const auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            q.values.col(static_cast<Eigen::Index>(r)) = q_tilde(draws.at(r), households, lines, alpha);
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, total);
    if (workers == 1) {
        fill(0, total);
        return q;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t block = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                fill(std::min(total, w * block), std::min(total, (w + 1) * block));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return q;
}

double direct_estimate(const HouseholdTable& households, const PovertyLines& lines, double alpha,
                       const std::vector<std::string>& domain) {
    if (!(alpha >= 0.0)) throw Error(ErrorCode::NegativeAlpha, "alpha must be >= 0");
    const std::set<std::string> wanted(domain.begin(), domain.end());
    double num = 0.0;
    double den = 0.0;
    for (const auto& r : households.records) {
        if (!wanted.empty() && !wanted.count(r.comuna_id)) continue;
        num += r.weight_raw * fgt_term(r.income, lines.line(r.urbanicity), alpha);
        den += r.weight_raw;
    }
    if (!(den > 0.0)) throw Error(ErrorCode::EmptyDomain, "no households in the requested domain");
    return num / den;
}

}  // namespace povmap
