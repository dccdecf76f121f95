#pragma once

// Synthetic finite populations drawn from the three-level model, a simple
// two-stage sample design, and brute-force ground truth for validation.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povmap/data.hpp"
#include "povmap/fgt.hpp"

namespace povmap {

struct SyntheticConfig {
    std::size_t comunas = 30;
    double rural_fraction = 0.4;  // share of comunas that also have a rural stratum
    std::size_t min_psus = 4;     // M_cu range per stratum
    std::size_t max_psus = 8;
    std::size_t min_households = 150;  // N_cup range per PSU
    std::size_t max_households = 250;
    std::size_t percent_covariates = 2;  // plus one wage covariate

    // Coefficients on the standardised design (intercept first); length must
    // be 2 + percent_covariates.
    std::vector<double> beta_urban = {5.0, 0.25, -0.2, 0.15};
    std::vector<double> beta_rural = {4.7, 0.2, -0.15, 0.1};
    double sigma_t = 0.8;
    double sigma_theta = 0.2;
    double sigma_mu = 0.25;

    PovertyLines lines{80.0, 60.0};
    std::uint64_t seed = 20240601;

    void validate() const;
};

struct SyntheticPsu {
    std::string psu_id;
    double theta = 0.0;
    std::vector<double> incomes;
};

struct SyntheticStratum {
    std::size_t comuna = 0;
    int urbanicity = kUrban;
    double mu = 0.0;
    std::vector<SyntheticPsu> psus;
};

struct SyntheticPopulation {
    SyntheticConfig config;
    std::vector<std::string> comuna_ids;
    std::vector<std::size_t> households_per_comuna;  // N_c
    std::vector<SyntheticStratum> strata;              // comuna order, urban first
    RawCovariateTable raw_covariates;
    std::map<std::string, CovariateTransform> transforms;
    CovariateTable covariates;
    std::size_t negative_redraws = 0;  // T < 0 draws that were rejected
};

// Per-comuna RNG stream used by the generators: seed_seq{lo32, hi32, comuna, salt}.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::size_t index, std::uint32_t salt);

SyntheticPopulation generate_population(const SyntheticConfig& config);

struct SampleDesign {
    std::size_t psus_per_stratum = 0;    // 0 = every PSU
    std::size_t households_per_psu = 0;  // 0 = every household
};

// SRS of PSUs within each stratum, then SRS of households within each chosen
// PSU; weight_raw = (M_cu / m_cu) * (N_cup / n_cup).
HouseholdTable draw_sample(const SyntheticPopulation& population, const SampleDesign& design, std::uint64_t seed);

// Exact finite-population index per comuna, population comuna order.
std::vector<double> true_fgt(const SyntheticPopulation& population, const PovertyLines& lines, double alpha);

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

// Plain Monte Carlo of E{g_alpha(e^T - 1) 1(0 <= T < l)}, T ~ N(theta, sigma_t^2).
McEstimate mc_oracle_e_g(double theta, double sigma_t, double k, double alpha, std::size_t n_draws,
                         std::uint64_t seed);

// Household-schema CSV of the whole population (weights 1).
void write_population(std::ostream& out, const SyntheticPopulation& population);

// Flat key=value record of the generative truth.
void write_true_params(std::ostream& out, const SyntheticPopulation& population);

}  // namespace povmap
