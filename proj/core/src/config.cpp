#include "povmap/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "povmap/csv.hpp"

namespace povmap {

namespace {

double to_double(const std::string& key, const std::string& value) {
    const auto v = csv::parse_double(value);
    if (!v || !std::isfinite(*v)) throw Error(ErrorCode::InvalidConfig, key + ": expected a number, got '" + value + "'");
    return *v;
}

std::size_t to_count(const std::string& key, const std::string& value) {
    const auto v = csv::parse_integer(value);
    if (!v || *v < 0) throw Error(ErrorCode::InvalidConfig, key + ": expected a count, got '" + value + "'");
    return static_cast<std::size_t>(*v);
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& field : csv::split(value)) out.push_back(to_double(key, field));
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, key + ": empty list");
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += csv::format_number(v[i]);
    }
    return s;
}

std::string monitor_name(Monitor m) {
    switch (m) {
        case Monitor::Hyper: return "hyper";
        case Monitor::HyperAndMu: return "hyper_mu";
        case Monitor::All: return "all";
    }
    return "hyper_mu";
}

std::string resolve(const std::string& base, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "households") {
        households_path = value;
    } else if (key == "covariates") {
        covariates_path = value;
    } else if (key.rfind("transform.", 0) == 0) {
        transforms[key.substr(10)] = parse_transform(value);
    } else if (key == "poverty_line_urban") {
        lines.k_urban = to_double(key, value);
    } else if (key == "poverty_line_rural") {
        lines.k_rural = to_double(key, value);
    } else if (key == "alphas") {
        alphas = to_list(key, value);
    } else if (key == "burn_in") {
        mcmc.burn_in = to_count(key, value);
    } else if (key == "draws") {
        mcmc.draws = to_count(key, value);
    } else if (key == "thin") {
        mcmc.thin = to_count(key, value);
    } else if (key == "chains") {
        mcmc.chains = to_count(key, value);
    } else if (key == "threads") {
        mcmc.threads = static_cast<unsigned>(to_count(key, value));
        qmatrix_threads = std::max(1u, mcmc.threads);
    } else if (key == "init_dispersion") {
        mcmc.init_dispersion = to_double(key, value);
    } else if (key == "seed") {
        const auto v = csv::parse_integer(value);
        if (!v || *v < 0) throw Error(ErrorCode::InvalidConfig, "seed: expected a nonnegative integer");
        seed = static_cast<std::uint64_t>(*v);
        simulation.seed = seed;
    } else if (key == "beta_prior_sd") {
        priors.beta_prior_sd = to_double(key, value);
    } else if (key == "sd_prior_scale") {
        priors.sd_prior_scale.fill(to_double(key, value));
    } else if (key == "sd_prior_scale_t") {
        priors.sd_prior_scale[0] = to_double(key, value);
    } else if (key == "sd_prior_scale_theta") {
        priors.sd_prior_scale[1] = to_double(key, value);
    } else if (key == "sd_prior_scale_mu") {
        priors.sd_prior_scale[2] = to_double(key, value);
    } else if (key == "monitor") {
        if (value == "hyper") {
            monitor = Monitor::Hyper;
        } else if (value == "hyper_mu") {
            monitor = Monitor::HyperAndMu;
        } else if (value == "all") {
            monitor = Monitor::All;
        } else {
            throw Error(ErrorCode::InvalidConfig, "monitor must be hyper, hyper_mu or all");
        }
    } else if (key == "rhat_threshold") {
        rhat_threshold = to_double(key, value);
    } else if (key == "multipliers") {
        multipliers = to_list(key, value);
    } else if (key == "cutoff") {
        cutoff = to_double(key, value);
    } else if (key == "out") {
        out_dir = value;
    } else if (key == "sim.comunas") {
        simulation.comunas = to_count(key, value);
    } else if (key == "sim.rural_fraction") {
        simulation.rural_fraction = to_double(key, value);
    } else if (key == "sim.min_psus") {
        simulation.min_psus = to_count(key, value);
    } else if (key == "sim.max_psus") {
        simulation.max_psus = to_count(key, value);
    } else if (key == "sim.min_households") {
        simulation.min_households = to_count(key, value);
    } else if (key == "sim.max_households") {
        simulation.max_households = to_count(key, value);
    } else if (key == "sim.percent_covariates") {
        simulation.percent_covariates = to_count(key, value);
    } else if (key == "sim.beta_urban") {
        simulation.beta_urban = to_list(key, value);
    } else if (key == "sim.beta_rural") {
        simulation.beta_rural = to_list(key, value);
    } else if (key == "sim.sigma_t") {
        simulation.sigma_t = to_double(key, value);
    } else if (key == "sim.sigma_theta") {
        simulation.sigma_theta = to_double(key, value);
    } else if (key == "sim.sigma_mu") {
        simulation.sigma_mu = to_double(key, value);
    } else if (key == "sim.psus_per_stratum") {
        design.psus_per_stratum = to_count(key, value);
    } else if (key == "sim.households_per_psu") {
        design.households_per_psu = to_count(key, value);
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
    if (key == "poverty_line_urban" || key == "poverty_line_rural") simulation.lines = lines;
}

void RunConfig::validate() const {
    lines.validate();
    priors.validate();
    mcmc.validate();
    for (const double a : alphas) {
        if (!(a >= 0.0)) throw Error(ErrorCode::NegativeAlpha, "alpha values must be >= 0");
    }
    for (const double m : multipliers) {
        if (!(m > 0.0)) throw Error(ErrorCode::InvalidConfig, "multipliers must be positive");
    }
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw Error(ErrorCode::CutoffOutOfRange, "cutoff must lie in (0, 1)");
}

RunConfig parse_run_config(std::istream& in, const std::string& base_dir) {
    RunConfig config;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = csv::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(row) + " is not 'key = value'", row);
        }
        config.set(csv::trim(text.substr(0, eq)), csv::trim(text.substr(eq + 1)));
    }
    config.households_path = resolve(base_dir, config.households_path);
    config.covariates_path = resolve(base_dir, config.covariates_path);
    config.out_dir = resolve(base_dir, config.out_dir);
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
    const auto base = std::filesystem::path(path).parent_path().string();
    return parse_run_config(in, base.empty() ? "." : base);
}

void write_run_config(std::ostream& out, const RunConfig& c) {
    out << "households = " << c.households_path << '\n';
    out << "covariates = " << c.covariates_path << '\n';
    for (const auto& [name, t] : c.transforms) out << "transform." << name << " = " << to_string(t) << '\n';
    out << "poverty_line_urban = " << csv::format_number(c.lines.k_urban) << '\n';
    out << "poverty_line_rural = " << csv::format_number(c.lines.k_rural) << '\n';
    out << "alphas = " << join(c.alphas) << '\n';
    out << "burn_in = " << c.mcmc.burn_in << '\n';
    out << "draws = " << c.mcmc.draws << '\n';
    out << "thin = " << c.mcmc.thin << '\n';
    out << "chains = " << c.mcmc.chains << '\n';
    out << "init_dispersion = " << csv::format_number(c.mcmc.init_dispersion) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "beta_prior_sd = " << csv::format_number(c.priors.beta_prior_sd) << '\n';
    out << "sd_prior_scale_t = " << csv::format_number(c.priors.sd_prior_scale[0]) << '\n';
    out << "sd_prior_scale_theta = " << csv::format_number(c.priors.sd_prior_scale[1]) << '\n';
    out << "sd_prior_scale_mu = " << csv::format_number(c.priors.sd_prior_scale[2]) << '\n';
    out << "monitor = " << monitor_name(c.monitor) << '\n';
    out << "rhat_threshold = " << csv::format_number(c.rhat_threshold) << '\n';
    out << "multipliers = " << join(c.multipliers) << '\n';
    out << "cutoff = " << csv::format_number(c.cutoff) << '\n';
    out << "out = " << c.out_dir << '\n';
}

}  // namespace povmap
