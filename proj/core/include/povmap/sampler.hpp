#pragma once

// MCMC for the three-level model
//
//   T_cuph | theta_cup, sigma_t      ~ N(theta_cup, sigma_t^2)
//   theta_cup | mu_cu, sigma_theta   ~ N(mu_cu, sigma_theta^2)
//   mu_cu | beta_u, sigma_mu         ~ N(x_c' beta_u, sigma_mu^2)
//
// with beta_u ~ N(0, beta_prior_sd^2 I) and independent half-normal priors on
// the three standard deviations. Locations are updated from their conjugate
// normal full conditionals; each standard deviation is updated by slice
// sampling on log(sigma). One sweep is theta -> mu -> beta -> sigmas.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povmap/data.hpp"

namespace povmap {

using Rng = std::mt19937_64;

// States never hold a standard deviation below this.
inline constexpr double kSigmaFloor = 1e-12;

struct PriorConfig {
    double beta_prior_sd = 1.0;
    // Half-normal scales for sigma_t, sigma_theta, sigma_mu.
    std::array<double, 3> sd_prior_scale{1.0, 1.0, 1.0};

    void validate() const;
};

struct ModelState {
    Eigen::VectorXd theta;              // one per PSU, HouseholdTable::psus order
    Eigen::VectorXd mu;                 // one per stratum, HouseholdTable::strata order
    std::array<Eigen::VectorXd, 2> beta;  // beta_1 (urban), beta_2 (rural)
    double sigma_t = 1.0;
    double sigma_theta = 1.0;
    double sigma_mu = 1.0;

    bool operator==(const ModelState& other) const;
};

// Throws InvalidConfig when dimensions disagree with `data` or an SD is not
// strictly positive and finite.
void check_state(const ModelState& state, const ModelData& data);

struct McmcConfig {
    std::size_t burn_in = 10000;
    std::size_t draws = 10000;  // retained states per chain
    std::size_t thin = 1;
    std::size_t chains = 4;
    // Starting-point spread: 0 starts every chain at the moment-based
    // initialisation, larger values jitter it (in units of the initial SDs).
    double init_dispersion = 0.5;
    bool update_sigmas = true;  // false freezes the SDs at their initial values
    unsigned threads = 0;       // 0 = one thread per chain, capped by hardware

    void validate() const;
};

struct DrawsStore {
    std::vector<std::vector<ModelState>> chains;  // chains x retained
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    std::size_t thin = 1;

    std::size_t n_chains() const { return chains.size(); }
    std::size_t retained() const { return chains.empty() ? 0 : chains.front().size(); }
    std::size_t total() const { return n_chains() * retained(); }
    // r-th retained state with chains concatenated in chain order.
    const ModelState& at(std::size_t r) const;
};

// Chain `chain` of a run seeded with `master_seed` draws from
// mt19937_64(seed_seq{lo32(master), hi32(master), chain}).
Rng make_chain_rng(std::uint64_t master_seed, std::size_t chain);

// theta at within-PSU means, mu at within-stratum household means, beta_u by
// ridge least squares of mu on x, SDs at the matching residual SDs (floored at
// 1e-3). With dispersion > 0 the start is jittered using `seed`.
ModelState init_state(const ModelData& data, const PriorConfig& priors, std::uint64_t seed = 0,
                      double dispersion = 0.0);

// Conjugate normal full conditional N(mean, variance).
struct NormalConditional {
    double mean = 0.0;
    double variance = 1.0;
};

NormalConditional theta_conditional(const ModelState& state, const ModelData& data, std::size_t psu);
NormalConditional mu_conditional(const ModelState& state, const ModelData& data, std::size_t stratum);

struct BetaConditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

BetaConditional beta_conditional(const ModelState& state, const ModelData& data, const PriorConfig& priors,
                                 int urbanicity);

void update_theta(ModelState& state, const ModelData& data, Rng& rng);
void update_mu(ModelState& state, const ModelData& data, Rng& rng);
void update_beta(ModelState& state, const ModelData& data, const PriorConfig& priors, Rng& rng);
void update_sigmas(ModelState& state, const ModelData& data, const PriorConfig& priors, Rng& rng);

// Log target of one standard deviation on the eta = log(sigma) scale:
// half-normal prior x normal likelihood of `n_terms` residuals with sum of
// squares `sum_sq` x Jacobian sigma.
double log_sigma_target(double eta, double sum_sq, std::size_t n_terms, double prior_scale);

// Residual sums of squares feeding each SD update.
struct SigmaSufficient {
    double ss_t = 0.0;
    std::size_t n_t = 0;
    double ss_theta = 0.0;
    std::size_t n_theta = 0;
    double ss_mu = 0.0;
    std::size_t n_mu = 0;
};

SigmaSufficient sigma_sufficient(const ModelState& state, const ModelData& data);

void sweep(ModelState& state, const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc, Rng& rng);

DrawsStore run_chain(const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc,
                     std::uint64_t seed);

// Independent chains, chain i seeded via make_chain_rng(master_seed, i).
// Results do not depend on the thread count.
DrawsStore run_chains(const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc,
                      std::uint64_t master_seed);

// -- flattened parameter view -------------------------------------------------

// Scalar order: sigma_t, sigma_theta, sigma_mu, beta_1[0..p), beta_2[0..p),
// mu[...] (strata order), theta[...] (PSU order).
std::vector<std::string> parameter_names(const ModelData& data);
std::vector<double> flatten(const ModelState& state);
ModelState unflatten(const std::vector<double>& values, const ModelData& data);

enum class Monitor { Hyper, HyperAndMu, All };

// Number of leading flattened scalars covered by the selector.
std::size_t monitored_count(const ModelData& data, Monitor monitor);

}  // namespace povmap
