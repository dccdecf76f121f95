#include "povmap/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "povmap/csv.hpp"
#include "povmap/sampler.hpp"

namespace povmap {

namespace {

constexpr std::uint32_t kLayoutSalt = 0x5eed0001u;
constexpr std::uint32_t kSampleSalt = 0x5eed0002u;

std::string padded(const char* prefix, std::size_t value, int width) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%s%0*zu", prefix, width, value);
    return buffer;
}

std::size_t uniform_count(std::size_t lo, std::size_t hi, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// SRS of `m` indices from [0, n) in increasing order (partial Fisher-Yates).
std::vector<std::size_t> srs(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

void SyntheticConfig::validate() const {
    if (comunas < 2) throw Error(ErrorCode::InvalidSizes, "need at least two comunas");
    if (min_psus < 1 || max_psus < min_psus) throw Error(ErrorCode::InvalidSizes, "bad PSU count range");
    if (min_households < 1 || max_households < min_households) {
        throw Error(ErrorCode::InvalidSizes, "bad household count range");
    }
    if (!(rural_fraction >= 0.0 && rural_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidSizes, "rural_fraction must lie in [0, 1]");
    }
    const std::size_t p = 2 + percent_covariates;
    if (beta_urban.size() != p || beta_rural.size() != p) {
        throw Error(ErrorCode::InvalidSizes, "coefficient vectors must have length " + std::to_string(p));
    }
    for (const double s : {sigma_t, sigma_theta, sigma_mu}) {
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidSizes, "true SDs must be positive");
    }
    lines.validate();
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::size_t index, std::uint32_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), salt};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

SyntheticPopulation generate_population(const SyntheticConfig& config) {
    config.validate();
    SyntheticPopulation pop;
    pop.config = config;

    pop.raw_covariates.names.push_back("wage");
    pop.transforms["wage"] = CovariateTransform::Log;
    for (std::size_t j = 0; j < config.percent_covariates; ++j) {
        const auto name = "pct_" + std::to_string(j + 1);
        pop.raw_covariates.names.push_back(name);
        pop.transforms[name] = CovariateTransform::ArcsinSqrt;
    }

    // Layout and raw covariates first: the design needs standardising across
    // all comunas before any mean can be formed.
    std::vector<Rng> streams;
    std::vector<std::array<bool, 2>> has_stratum;
    for (std::size_t c = 0; c < config.comunas; ++c) {
        Rng rng(derive_stream_seed(config.seed, c, kLayoutSalt));
        pop.comuna_ids.push_back(padded("c", c + 1, 3));
        std::vector<double> raw;
        raw.push_back(std::exp(std::normal_distribution<double>(6.0, 0.3)(rng)));
        for (std::size_t j = 0; j < config.percent_covariates; ++j) {
            raw.push_back(std::uniform_real_distribution<double>(0.05, 0.6)(rng));
        }
        pop.raw_covariates.comuna_ids.push_back(pop.comuna_ids.back());
        pop.raw_covariates.values.push_back(std::move(raw));
        const bool rural = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < config.rural_fraction;
        has_stratum.push_back({true, rural});
        streams.push_back(std::move(rng));
    }
    pop.covariates = transform_covariates(pop.raw_covariates, pop.transforms);

    const Eigen::Map<const Eigen::VectorXd> beta_u(config.beta_urban.data(),
                                                   static_cast<Eigen::Index>(config.beta_urban.size()));
    const Eigen::Map<const Eigen::VectorXd> beta_r(config.beta_rural.data(),
                                                   static_cast<Eigen::Index>(config.beta_rural.size()));
    pop.households_per_comuna.assign(config.comunas, 0);
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t c = 0; c < config.comunas; ++c) {
        Rng& rng = streams[c];
        for (int u = kUrban; u <= kRural; ++u) {
            if (!has_stratum[c][static_cast<std::size_t>(u - 1)]) continue;
            SyntheticStratum stratum;
            stratum.comuna = c;
            stratum.urbanicity = u;
            const double mean =
                pop.covariates.x.row(static_cast<Eigen::Index>(c)).dot(u == kUrban ? beta_u : beta_r);
            stratum.mu = mean + config.sigma_mu * z(rng);
            const std::size_t m = uniform_count(config.min_psus, config.max_psus, rng);
            for (std::size_t p = 0; p < m; ++p) {
                SyntheticPsu psu;
                psu.psu_id = padded(u == kUrban ? "u" : "r", p + 1, 3);
                psu.theta = stratum.mu + config.sigma_theta * z(rng);
                const std::size_t n = uniform_count(config.min_households, config.max_households, rng);
                psu.incomes.reserve(n);
                for (std::size_t h = 0; h < n; ++h) {
                    double t = psu.theta + config.sigma_t * z(rng);
                    while (t < 0.0) {
                        ++pop.negative_redraws;
                        t = psu.theta + config.sigma_t * z(rng);
                    }
                    psu.incomes.push_back(std::expm1(t));
                }
                pop.households_per_comuna[c] += n;
                stratum.psus.push_back(std::move(psu));
            }
            pop.strata.push_back(std::move(stratum));
        }
    }
    return pop;
}

HouseholdTable draw_sample(const SyntheticPopulation& population, const SampleDesign& design, std::uint64_t seed) {
    std::vector<HouseholdRecord> records;
    for (std::size_t s = 0; s < population.strata.size(); ++s) {
        const auto& stratum = population.strata[s];
        Rng rng(derive_stream_seed(seed, s, kSampleSalt));
        const std::size_t big_m = stratum.psus.size();
        const std::size_t m = design.psus_per_stratum == 0 ? big_m : design.psus_per_stratum;
        if (m > big_m) {
            throw Error(ErrorCode::InfeasibleDesign, "stratum of comuna " + population.comuna_ids[stratum.comuna] +
                                                         " has only " + std::to_string(big_m) + " PSUs");
        }
        for (const auto p : srs(big_m, m, rng)) {
            const auto& psu = stratum.psus[p];
            const std::size_t big_n = psu.incomes.size();
            const std::size_t n = design.households_per_psu == 0 ? big_n : design.households_per_psu;
            if (n > big_n) {
                throw Error(ErrorCode::InfeasibleDesign, "PSU " + psu.psu_id + " has only " +
                                                             std::to_string(big_n) + " households");
            }
            const double weight = (static_cast<double>(big_m) / static_cast<double>(m)) *
                                  (static_cast<double>(big_n) / static_cast<double>(n));
            for (const auto h : srs(big_n, n, rng)) {
                HouseholdRecord r;
                r.comuna_id = population.comuna_ids[stratum.comuna];
                r.urbanicity = stratum.urbanicity;
                r.psu_id = psu.psu_id;
                r.household_id = padded("h", h + 1, 5);
                r.income = psu.incomes[h];
                r.weight_raw = weight;
                records.push_back(std::move(r));
            }
        }
    }
    return build_household_table(std::move(records));
}

std::vector<double> true_fgt(const SyntheticPopulation& population, const PovertyLines& lines, double alpha) {
    std::vector<double> sums(population.comuna_ids.size(), 0.0);
    for (const auto& stratum : population.strata) {
        const double k = lines.line(stratum.urbanicity);
        for (const auto& psu : stratum.psus) {
            for (const double y : psu.incomes) sums[stratum.comuna] += fgt_term(y, k, alpha);
        }
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
        sums[c] /= static_cast<double>(population.households_per_comuna[c]);
    }
    return sums;
}

McEstimate mc_oracle_e_g(double theta, double sigma_t, double k, double alpha, std::size_t n_draws,
                         std::uint64_t seed) {
    if (n_draws < 10000) throw Error(ErrorCode::InvalidSizes, "Monte Carlo oracle needs at least 1e4 draws");
    if (!(sigma_t > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma_t must be positive");
    if (!(k > 0.0)) throw Error(ErrorCode::NonPositiveLine, "poverty line must be positive");
    Rng rng(seed);
    std::normal_distribution<double> normal(theta, sigma_t);
    const double l = std::log1p(k);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        const double t = normal(rng);
        if (t < 0.0 || !(t < l)) continue;
        const double g = fgt_term(std::expm1(t), k, alpha);
        sum += g;
        sum_sq += g * g;
    }
    const double n = static_cast<double>(n_draws);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

void write_population(std::ostream& out, const SyntheticPopulation& population) {
    out << "comuna_id,urbanicity,psu_id,household_id,income,weight\n";
    for (const auto& stratum : population.strata) {
        for (const auto& psu : stratum.psus) {
            for (std::size_t h = 0; h < psu.incomes.size(); ++h) {
                out << population.comuna_ids[stratum.comuna] << ',' << stratum.urbanicity << ',' << psu.psu_id
                    << ',' << padded("h", h + 1, 5) << ',' << csv::format_number(psu.incomes[h]) << ",1\n";
            }
        }
    }
}

void write_true_params(std::ostream& out, const SyntheticPopulation& population) {
    const auto& cfg = population.config;
    const auto join = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += csv::format_number(v[i]);
        }
        return s;
    };
    out << "seed = " << cfg.seed << '\n';
    out << "comunas = " << cfg.comunas << '\n';
    out << "beta_urban = " << join(cfg.beta_urban) << '\n';
    out << "beta_rural = " << join(cfg.beta_rural) << '\n';
    out << "sigma_t = " << csv::format_number(cfg.sigma_t) << '\n';
    out << "sigma_theta = " << csv::format_number(cfg.sigma_theta) << '\n';
    out << "sigma_mu = " << csv::format_number(cfg.sigma_mu) << '\n';
    out << "poverty_line_urban = " << csv::format_number(cfg.lines.k_urban) << '\n';
    out << "poverty_line_rural = " << csv::format_number(cfg.lines.k_rural) << '\n';
    out << "negative_redraws = " << population.negative_redraws << '\n';
    for (const auto& stratum : population.strata) {
        out << "mu." << population.comuna_ids[stratum.comuna] << '.' << stratum.urbanicity << " = "
            << csv::format_number(stratum.mu) << '\n';
    }
}

}  // namespace povmap
