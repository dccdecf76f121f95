#include "povmap/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "povmap/slice.hpp"

namespace povmap {

namespace {

constexpr double kInitSigmaFloor = 1e-3;
constexpr double kInitRidge = 1e-6;

std::size_t strata_count(const ModelData& data) { return data.households.strata.size(); }
std::size_t psu_count(const ModelData& data) { return data.households.psus.size(); }

double design_mean(const ModelState& state, const ModelData& data, std::size_t stratum) {
    const auto& s = data.households.strata[stratum];
    return data.design.row(static_cast<Eigen::Index>(s.comuna)).dot(state.beta[static_cast<std::size_t>(s.urbanicity - 1)]);
}

// Rows of the design matrix (and the matching mu entries) for urbanicity u.
std::vector<std::size_t> strata_with(const ModelData& data, int urbanicity) {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < data.households.strata.size(); ++s) {
        if (data.households.strata[s].urbanicity == urbanicity) out.push_back(s);
    }
    return out;
}

void jitter(ModelState& state, double dispersion, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i = 0; i < state.theta.size(); ++i) state.theta[i] += dispersion * state.sigma_theta * z(rng);
    for (Eigen::Index i = 0; i < state.mu.size(); ++i) state.mu[i] += dispersion * state.sigma_mu * z(rng);
    for (auto& b : state.beta) {
        for (Eigen::Index j = 0; j < b.size(); ++j) b[j] += dispersion * state.sigma_mu * z(rng);
    }
    state.sigma_t *= std::exp(dispersion * z(rng));
    state.sigma_theta *= std::exp(dispersion * z(rng));
    state.sigma_mu *= std::exp(dispersion * z(rng));
}

double draw_sigma(double sigma, double sum_sq, std::size_t n, double prior_scale, Rng& rng) {
    const double eta = slice_sample(
        std::log(sigma), [&](double e) { return log_sigma_target(e, sum_sq, n, prior_scale); }, rng, 1.0, 50);
    const double out = std::exp(eta);
    if (!std::isfinite(out) || out < kSigmaFloor) {
        throw Error(ErrorCode::SliceNonConvergence, "standard deviation draw left the support");
    }
    return out;
}

std::vector<ModelState> run_single(const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc,
                                   std::uint64_t master_seed, std::size_t chain) {
    Rng rng = make_chain_rng(master_seed, chain);
    ModelState state = init_state(data, priors);
    if (mcmc.init_dispersion > 0.0) jitter(state, mcmc.init_dispersion, rng);

    for (std::size_t i = 0; i < mcmc.burn_in; ++i) sweep(state, data, priors, mcmc, rng);
    std::vector<ModelState> kept;
    kept.reserve(mcmc.draws);
    for (std::size_t r = 0; r < mcmc.draws; ++r) {
        for (std::size_t t = 0; t < mcmc.thin; ++t) sweep(state, data, priors, mcmc, rng);
        kept.push_back(state);
    }
    return kept;
}

}  // namespace

void PriorConfig::validate() const {
    if (!(beta_prior_sd > 0.0) || !std::isfinite(beta_prior_sd)) {
        throw Error(ErrorCode::InvalidConfig, "beta_prior_sd must be positive");
    }
    for (const double s : sd_prior_scale) {
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidConfig, "sd_prior_scale must be positive");
    }
}

void McmcConfig::validate() const {
    if (draws < 1) throw Error(ErrorCode::InvalidConfig, "draws must be at least 1");
    if (thin < 1) throw Error(ErrorCode::InvalidConfig, "thin must be at least 1");
    if (chains < 1) throw Error(ErrorCode::InvalidConfig, "chains must be at least 1");
    if (!(init_dispersion >= 0.0)) throw Error(ErrorCode::InvalidConfig, "init_dispersion must be >= 0");
}

bool ModelState::operator==(const ModelState& other) const {
    return theta == other.theta && mu == other.mu && beta[0] == other.beta[0] && beta[1] == other.beta[1] &&
           sigma_t == other.sigma_t && sigma_theta == other.sigma_theta && sigma_mu == other.sigma_mu;
}

void check_state(const ModelState& state, const ModelData& data) {
    const auto p = static_cast<Eigen::Index>(data.n_covariates());
    if (state.theta.size() != static_cast<Eigen::Index>(psu_count(data)) ||
        state.mu.size() != static_cast<Eigen::Index>(strata_count(data)) || state.beta[0].size() != p ||
        state.beta[1].size() != p) {
        throw Error(ErrorCode::RosterMismatch, "model state does not match the household roster");
    }
    for (const double s : {state.sigma_t, state.sigma_theta, state.sigma_mu}) {
        if (!(s >= kSigmaFloor) || !std::isfinite(s)) {
            throw Error(ErrorCode::InvalidConfig, "standard deviations must be positive and finite");
        }
    }
}

const ModelState& DrawsStore::at(std::size_t r) const {
    const std::size_t per_chain = retained();
    return chains.at(r / per_chain).at(r % per_chain);
}

Rng make_chain_rng(std::uint64_t master_seed, std::size_t chain) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(master_seed >> 32), static_cast<std::uint32_t>(chain)};
    return Rng(seq);
}

ModelState init_state(const ModelData& data, const PriorConfig& priors, std::uint64_t seed, double dispersion) {
    priors.validate();
    const auto& hh = data.households;
    const auto p = static_cast<Eigen::Index>(data.n_covariates());

    ModelState state;
    state.theta.resize(static_cast<Eigen::Index>(hh.psus.size()));
    state.mu.resize(static_cast<Eigen::Index>(hh.strata.size()));

    double ss_t = 0.0;
    std::size_t n_t = 0;
    for (std::size_t i = 0; i < hh.psus.size(); ++i) {
        const auto& psu = hh.psus[i];
        if (psu.rows.empty()) throw Error(ErrorCode::EmptyGroup, "PSU " + psu.psu_id + " has no households");
        const double mean = psu.sum_t / static_cast<double>(psu.rows.size());
        state.theta[static_cast<Eigen::Index>(i)] = mean;
        for (const auto row : psu.rows) {
            const double d = hh.records[row].t_income - mean;
            ss_t += d * d;
        }
        n_t += psu.rows.size();
    }

    double ss_theta = 0.0;
    for (std::size_t s = 0; s < hh.strata.size(); ++s) {
        const auto& stratum = hh.strata[s];
        if (stratum.psus.empty()) throw Error(ErrorCode::EmptyGroup, "stratum without PSUs");
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto i : stratum.psus) {
            sum += hh.psus[i].sum_t;
            n += hh.psus[i].rows.size();
        }
        const double mean = sum / static_cast<double>(n);
        state.mu[static_cast<Eigen::Index>(s)] = mean;
        for (const auto i : stratum.psus) {
            const double d = state.theta[static_cast<Eigen::Index>(i)] - mean;
            ss_theta += d * d;
        }
    }

    double ss_mu = 0.0;
    for (int u = kUrban; u <= kRural; ++u) {
        auto& beta = state.beta[static_cast<std::size_t>(u - 1)];
        const auto rows = strata_with(data, u);
        if (rows.empty()) {
            beta = Eigen::VectorXd::Zero(p);
            continue;
        }
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), p);
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            x.row(static_cast<Eigen::Index>(i)) =
                data.design.row(static_cast<Eigen::Index>(hh.strata[rows[i]].comuna));
            y[static_cast<Eigen::Index>(i)] = state.mu[static_cast<Eigen::Index>(rows[i])];
        }
        const Eigen::MatrixXd gram = x.transpose() * x + kInitRidge * Eigen::MatrixXd::Identity(p, p);
        beta = gram.ldlt().solve(x.transpose() * y);
        ss_mu += (y - x * beta).squaredNorm();
    }

    state.sigma_t = std::max(kInitSigmaFloor, std::sqrt(ss_t / static_cast<double>(n_t)));
    state.sigma_theta = std::max(kInitSigmaFloor, std::sqrt(ss_theta / static_cast<double>(hh.psus.size())));
    state.sigma_mu = std::max(kInitSigmaFloor, std::sqrt(ss_mu / static_cast<double>(hh.strata.size())));

    if (dispersion > 0.0) {
        Rng rng(seed);
        jitter(state, dispersion, rng);
    }
    return state;
}

NormalConditional theta_conditional(const ModelState& state, const ModelData& data, std::size_t psu) {
    const auto& group = data.households.psus[psu];
    const double vt = state.sigma_t * state.sigma_t;
    const double vth = state.sigma_theta * state.sigma_theta;
    const double precision = static_cast<double>(group.rows.size()) / vt + 1.0 / vth;
    const double variance = 1.0 / precision;
    const double mu = state.mu[static_cast<Eigen::Index>(group.stratum)];
    return {variance * (group.sum_t / vt + mu / vth), variance};
}

NormalConditional mu_conditional(const ModelState& state, const ModelData& data, std::size_t stratum) {
    const auto& group = data.households.strata[stratum];
    const double vth = state.sigma_theta * state.sigma_theta;
    const double vmu = state.sigma_mu * state.sigma_mu;
    double sum_theta = 0.0;
    for (const auto i : group.psus) sum_theta += state.theta[static_cast<Eigen::Index>(i)];
    const double precision = static_cast<double>(group.psus.size()) / vth + 1.0 / vmu;
    const double variance = 1.0 / precision;
    return {variance * (sum_theta / vth + design_mean(state, data, stratum) / vmu), variance};
}

namespace {

struct BetaSystem {
    Eigen::MatrixXd precision;
    Eigen::VectorXd rhs;
};

BetaSystem beta_system(const ModelState& state, const ModelData& data, const PriorConfig& priors, int urbanicity) {
    const auto p = static_cast<Eigen::Index>(data.n_covariates());
    const double vmu = state.sigma_mu * state.sigma_mu;
    BetaSystem sys;
    sys.precision = Eigen::MatrixXd::Identity(p, p) / (priors.beta_prior_sd * priors.beta_prior_sd);
    sys.rhs = Eigen::VectorXd::Zero(p);
    for (const auto s : strata_with(data, urbanicity)) {
        const auto x = data.design.row(static_cast<Eigen::Index>(data.households.strata[s].comuna)).transpose();
        sys.precision.noalias() += x * x.transpose() / vmu;
        sys.rhs += x * (state.mu[static_cast<Eigen::Index>(s)] / vmu);
    }
    return sys;
}

}  // namespace

BetaConditional beta_conditional(const ModelState& state, const ModelData& data, const PriorConfig& priors,
                                 int urbanicity) {
    const auto sys = beta_system(state, data, priors, urbanicity);
    Eigen::LLT<Eigen::MatrixXd> llt(sys.precision);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularPosteriorCovariance, "beta precision is not positive definite");
    }
    BetaConditional out;
    out.covariance = llt.solve(Eigen::MatrixXd::Identity(sys.precision.rows(), sys.precision.cols()));
    out.mean = llt.solve(sys.rhs);
    return out;
}

void update_theta(ModelState& state, const ModelData& data, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < data.households.psus.size(); ++i) {
        const auto cond = theta_conditional(state, data, i);
        state.theta[static_cast<Eigen::Index>(i)] = cond.mean + std::sqrt(cond.variance) * z(rng);
    }
}

void update_mu(ModelState& state, const ModelData& data, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t s = 0; s < data.households.strata.size(); ++s) {
        const auto cond = mu_conditional(state, data, s);
        state.mu[static_cast<Eigen::Index>(s)] = cond.mean + std::sqrt(cond.variance) * z(rng);
    }
}

void update_beta(ModelState& state, const ModelData& data, const PriorConfig& priors, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (int u = kUrban; u <= kRural; ++u) {
        const auto sys = beta_system(state, data, priors, u);
        Eigen::LLT<Eigen::MatrixXd> llt(sys.precision);
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorCode::SingularPosteriorCovariance, "beta precision is not positive definite");
        }
        Eigen::VectorXd noise(sys.precision.rows());
        for (Eigen::Index j = 0; j < noise.size(); ++j) noise[j] = z(rng);
        // precision = L L', so L'^{-1} noise has covariance precision^{-1}.
        state.beta[static_cast<std::size_t>(u - 1)] = llt.solve(sys.rhs) + llt.matrixU().solve(noise);
    }
}

double log_sigma_target(double eta, double sum_sq, std::size_t n_terms, double prior_scale) {
    const double sigma = std::exp(eta);
    if (!(sigma >= kSigmaFloor) || !std::isfinite(sigma)) return -std::numeric_limits<double>::infinity();
    const double inv_var = 1.0 / (sigma * sigma);
    return -static_cast<double>(n_terms) * eta - 0.5 * sum_sq * inv_var -
           0.5 * sigma * sigma / (prior_scale * prior_scale) + eta;
}

SigmaSufficient sigma_sufficient(const ModelState& state, const ModelData& data) {
    const auto& hh = data.households;
    SigmaSufficient out;
    for (std::size_t i = 0; i < hh.psus.size(); ++i) {
        const double theta = state.theta[static_cast<Eigen::Index>(i)];
        for (const auto row : hh.psus[i].rows) {
            const double d = hh.records[row].t_income - theta;
            out.ss_t += d * d;
        }
        out.n_t += hh.psus[i].rows.size();
        const double d = theta - state.mu[static_cast<Eigen::Index>(hh.psus[i].stratum)];
        out.ss_theta += d * d;
    }
    out.n_theta = hh.psus.size();
    for (std::size_t s = 0; s < hh.strata.size(); ++s) {
        const double d = state.mu[static_cast<Eigen::Index>(s)] - design_mean(state, data, s);
        out.ss_mu += d * d;
    }
    out.n_mu = hh.strata.size();
    return out;
}

void update_sigmas(ModelState& state, const ModelData& data, const PriorConfig& priors, Rng& rng) {
    const auto suff = sigma_sufficient(state, data);
    state.sigma_t = draw_sigma(state.sigma_t, suff.ss_t, suff.n_t, priors.sd_prior_scale[0], rng);
    state.sigma_theta = draw_sigma(state.sigma_theta, suff.ss_theta, suff.n_theta, priors.sd_prior_scale[1], rng);
    state.sigma_mu = draw_sigma(state.sigma_mu, suff.ss_mu, suff.n_mu, priors.sd_prior_scale[2], rng);
}

void sweep(ModelState& state, const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc, Rng& rng) {
    update_theta(state, data, rng);
    update_mu(state, data, rng);
    update_beta(state, data, priors, rng);
    if (mcmc.update_sigmas) update_sigmas(state, data, priors, rng);
}

DrawsStore run_chain(const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc, std::uint64_t seed) {
    priors.validate();
    mcmc.validate();
    DrawsStore store;
    store.seed = seed;
    store.burn_in = mcmc.burn_in;
    store.thin = mcmc.thin;
    store.chains.push_back(run_single(data, priors, mcmc, seed, 0));
    return store;
}

DrawsStore run_chains(const ModelData& data, const PriorConfig& priors, const McmcConfig& mcmc,
                      std::uint64_t master_seed) {
    priors.validate();
    mcmc.validate();
    DrawsStore store;
    store.seed = master_seed;
    store.burn_in = mcmc.burn_in;
    store.thin = mcmc.thin;
    store.chains.resize(mcmc.chains);

    unsigned workers = mcmc.threads;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, mcmc.chains));

    if (workers <= 1) {
        for (std::size_t c = 0; c < mcmc.chains; ++c) store.chains[c] = run_single(data, priors, mcmc, master_seed, c);
        return store;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(mcmc.chains);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < mcmc.chains; c = next++) {
                try {
                    store.chains[c] = run_single(data, priors, mcmc, master_seed, c);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return store;
}

std::vector<std::string> parameter_names(const ModelData& data) {
    const auto& hh = data.households;
    std::vector<std::string> names = {"sigma_t", "sigma_theta", "sigma_mu"};
    for (int u = 1; u <= 2; ++u) {
        for (std::size_t j = 0; j < data.n_covariates(); ++j) {
            names.push_back("beta_" + std::to_string(u) + "[" + std::to_string(j) + "]");
        }
    }
    for (const auto& s : hh.strata) {
        names.push_back("mu[" + hh.comunas[s.comuna].comuna_id + ":" + std::to_string(s.urbanicity) + "]");
    }
    for (const auto& psu : hh.psus) {
        const auto& s = hh.strata[psu.stratum];
        names.push_back("theta[" + hh.comunas[s.comuna].comuna_id + ":" + std::to_string(s.urbanicity) + ":" +
                        psu.psu_id + "]");
    }
    return names;
}

std::vector<double> flatten(const ModelState& state) {
    std::vector<double> out = {state.sigma_t, state.sigma_theta, state.sigma_mu};
    for (const auto& b : state.beta) out.insert(out.end(), b.data(), b.data() + b.size());
    out.insert(out.end(), state.mu.data(), state.mu.data() + state.mu.size());
    out.insert(out.end(), state.theta.data(), state.theta.data() + state.theta.size());
    return out;
}

ModelState unflatten(const std::vector<double>& values, const ModelData& data) {
    const auto p = static_cast<Eigen::Index>(data.n_covariates());
    const auto n_mu = static_cast<Eigen::Index>(strata_count(data));
    const auto n_theta = static_cast<Eigen::Index>(psu_count(data));
    if (values.size() != static_cast<std::size_t>(3 + 2 * p + n_mu + n_theta)) {
        throw Error(ErrorCode::RosterMismatch, "flattened state has the wrong length");
    }
    ModelState state;
    state.sigma_t = values[0];
    state.sigma_theta = values[1];
    state.sigma_mu = values[2];
    const double* cursor = values.data() + 3;
    for (auto& b : state.beta) {
        b = Eigen::Map<const Eigen::VectorXd>(cursor, p);
        cursor += p;
    }
    state.mu = Eigen::Map<const Eigen::VectorXd>(cursor, n_mu);
    cursor += n_mu;
    state.theta = Eigen::Map<const Eigen::VectorXd>(cursor, n_theta);
    check_state(state, data);
    return state;
}

std::size_t monitored_count(const ModelData& data, Monitor monitor) {
    const std::size_t hyper = 3 + 2 * data.n_covariates();
    switch (monitor) {
        case Monitor::Hyper: return hyper;
        case Monitor::HyperAndMu: return hyper + strata_count(data);
        case Monitor::All: return hyper + strata_count(data) + psu_count(data);
    }
    return hyper;
}

}  // namespace povmap
