#include "povmap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "povmap/csv.hpp"
#include "povmap/diagnostics.hpp"
#include "povmap/io.hpp"

namespace povmap {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    return out;
}

std::ifstream open_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "missing artifact " + path + " (run the earlier stage first)");
    return in;
}

void ensure_out_dir(const RunConfig& config) { std::filesystem::create_directories(config.out_dir); }

void report_error(std::ostream& log, const Error& e) {
    log << "error," << to_string(e.code()) << ',' << (e.row() ? std::to_string(*e.row()) : "") << ','
        << e.what() << '\n';
}

bool is_validation(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn:
        case ErrorCode::MalformedRow:
        case ErrorCode::NegativeIncome:
        case ErrorCode::NonFiniteInput:
        case ErrorCode::NonPositiveWeight:
        case ErrorCode::UrbanicityOutOfRange:
        case ErrorCode::DuplicateHousehold:
        case ErrorCode::PercentOutOfRange:
        case ErrorCode::NonPositiveWage:
        case ErrorCode::ZeroVarianceColumn:
        case ErrorCode::UnknownTransform:
        case ErrorCode::RosterMismatch:
        case ErrorCode::InvalidConfig:
        case ErrorCode::CutoffOutOfRange:
        case ErrorCode::NegativeAlpha:
        case ErrorCode::NonPositiveLine:
            return true;
        default:
            return false;
    }
}

// Runs a stage body, mapping library errors onto exit codes.
template <class Body>
int guarded(std::ostream& log, bool inputs_loaded_first, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        report_error(log, e);
        if (inputs_loaded_first && is_validation(e.code())) return kExitValidation;
        return kExitRuntime;
    } catch (const std::exception& e) {
        log << "error,Runtime,," << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace

std::string artifact_path(const RunConfig& config, const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
}

ModelData load_model_data(const RunConfig& config) {
    auto households = load_households(config.households_path);
    const auto raw = load_covariates(config.covariates_path);
    auto covariates = transform_covariates(raw, config.transforms);
    return make_model_data(std::move(households), std::move(covariates));
}

int cmd_validate(const RunConfig& config, std::ostream& log) {
    std::vector<Error> issues;
    try {
        config.validate();
    } catch (const Error& e) {
        issues.push_back(e);
    }

    HouseholdTable households;
    bool households_ok = false;
    if (std::ifstream in(config.households_path); !in) {
        issues.emplace_back(ErrorCode::Io, "cannot open " + config.households_path);
    } else {
        const auto before = issues.size();
        households = read_households(in, issues);
        households_ok = issues.size() == before;
    }

    RawCovariateTable raw;
    bool covariates_ok = false;
    if (std::ifstream in(config.covariates_path); !in) {
        issues.emplace_back(ErrorCode::Io, "cannot open " + config.covariates_path);
    } else {
        const auto before = issues.size();
        raw = read_covariates(in, issues);
        covariates_ok = issues.size() == before;
    }

    if (covariates_ok) {
        for (const auto& [name, transform] : config.transforms) {
            if (std::find(raw.names.begin(), raw.names.end(), name) == raw.names.end()) {
                issues.emplace_back(ErrorCode::MissingColumn, "transform given for unknown covariate '" + name + "'");
            }
        }
        try {
            transform_covariates(raw, config.transforms);
        } catch (const Error& e) {
            issues.push_back(e);
        }
    }
    if (households_ok && covariates_ok) {
        for (const auto& id : missing_covariate_rows(households, raw)) {
            issues.emplace_back(ErrorCode::RosterMismatch, "comuna " + id + " has no covariate row");
        }
    }

    for (const auto& e : issues) report_error(log, e);
    if (!issues.empty()) {
        log << "validation failed: " << issues.size() << " error(s)\n";
        return kExitValidation;
    }
    log << "validation ok: " << households.records.size() << " households, " << households.comunas.size()
        << " comunas, " << households.psus.size() << " PSUs\n";
    return kExitOk;
}

int cmd_fit(const RunConfig& config, std::ostream& log) {
    ModelData data;
    const int loaded = guarded(log, true, [&] {
        config.validate();
        data = load_model_data(config);
        return kExitOk;
    });
    if (loaded != kExitOk) return loaded;

    return guarded(log, false, [&] {
        ensure_out_dir(config);
        const auto draws = run_chains(data, config.priors, config.mcmc, config.seed);
        {
            auto out = open_output(artifact_path(config, "draws.csv"));
            write_draws(out, draws, data);
        }
        const auto entries = psrf(draws, data, config.monitor);
        {
            auto out = open_output(artifact_path(config, "psrf.csv"));
            write_psrf(out, entries);
        }
        {
            // out = . keeps the record independent of where the run was written
            RunConfig record = config;
            record.out_dir = ".";
            auto out = open_output(artifact_path(config, "run_config.txt"));
            write_run_config(out, record);
        }
        const auto bad = count_unconverged(entries, config.rhat_threshold);
        log << "fit: " << draws.n_chains() << " chains x " << draws.retained() << " retained draws\n";
        if (bad > 0) {
            log << "warning: " << bad << " monitored parameter(s) with R-hat >= "
                << config.rhat_threshold << '\n';
            for (const auto& e : entries) {
                if (std::isnan(e.rhat) || e.rhat >= config.rhat_threshold) {
                    log << "warning: " << e.param << " R-hat " << e.rhat << '\n';
                }
            }
        }
        return kExitOk;
    });
}

int cmd_qmatrix(const RunConfig& config, std::ostream& log) {
    ModelData data;
    const int loaded = guarded(log, true, [&] {
        config.validate();
        data = load_model_data(config);
        return kExitOk;
    });
    if (loaded != kExitOk) return loaded;

    return guarded(log, false, [&] {
        auto in = open_artifact(artifact_path(config, "draws.csv"));
        const auto draws = read_draws(in, data);
        for (const double alpha : config.alphas) {
            auto q = build_q_matrix(draws, data.households, config.lines, alpha, config.qmatrix_threads);
            const auto path = artifact_path(config, "qmatrix_a" + alpha_tag(alpha) + ".csv");
            auto out = open_output(path);
            write_q_matrix(out, q);
            log << "qmatrix: alpha=" << alpha_tag(alpha) << ' ' << q.comunas() << " x " << q.draws() << " -> "
                << path << '\n';
        }
        return kExitOk;
    });
}

int cmd_report(const RunConfig& config, std::ostream& log) {
    HouseholdTable households;
    const int loaded = guarded(log, true, [&] {
        config.validate();
        households = load_households(config.households_path);
        return kExitOk;
    });
    if (loaded != kExitOk) return loaded;

    return guarded(log, false, [&] {
        for (const double alpha : config.alphas) {
            const auto tag = alpha_tag(alpha);
            auto in = open_artifact(artifact_path(config, "qmatrix_a" + tag + ".csv"));
            const auto q = read_q_matrix(in, alpha);
            const double regional = direct_estimate(households, config.lines, alpha);
            const auto report = decide(q, regional, config.multipliers, config.cutoff);

            std::vector<double> direct;
            for (const auto& id : q.comuna_ids) direct.push_back(direct_estimate(households, config.lines, alpha, {id}));
            {
                auto out = open_output(artifact_path(config, "point_a" + tag + ".csv"));
                write_point(out, report, direct);
            }
            {
                auto out = open_output(artifact_path(config, "flags_a" + tag + ".csv"));
                write_flags(out, report);
            }
            {
                auto out = open_output(artifact_path(config, "extremes_a" + tag + ".csv"));
                write_extremes(out, report);
            }
            const auto& worst = report.comunas[report.worst];
            const auto& best = report.comunas[report.best];
            log << "alpha=" << tag << " regional direct " << regional << '\n';
            log << "  worst comuna " << worst.comuna_id << " prob_max " << worst.prob_max << '\n';
            log << "  best comuna " << best.comuna_id << " prob_min " << best.prob_min << '\n';
        }
        return kExitOk;
    });
}

int cmd_diagnose(const RunConfig& config, std::ostream& log) {
    ModelData data;
    const int loaded = guarded(log, true, [&] {
        data = load_model_data(config);
        return kExitOk;
    });
    if (loaded != kExitOk) return loaded;

    return guarded(log, false, [&] {
        auto in = open_artifact(artifact_path(config, "draws.csv"));
        const auto draws = read_draws(in, data);
        const auto entries = psrf(draws, data, config.monitor);
        auto out = open_output(artifact_path(config, "psrf.csv"));
        write_psrf(out, entries);
        double worst = 0.0;
        std::string worst_name;
        for (const auto& e : entries) {
            if (std::isnan(e.rhat) || e.rhat > worst) {
                worst = e.rhat;
                worst_name = e.param;
                if (std::isnan(e.rhat)) break;
            }
        }
        const auto bad = count_unconverged(entries, config.rhat_threshold);
        log << "diagnose: " << entries.size() << " monitored, max R-hat " << worst << " ("
            << worst_name << "), " << bad << " >= " << config.rhat_threshold << '\n';
        return kExitOk;
    });
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
    return guarded(log, false, [&] {
        ensure_out_dir(config);
        auto sim = config.simulation;
        sim.seed = config.seed;
        sim.lines = config.lines;
        const auto pop = generate_population(sim);
        const auto sample = draw_sample(pop, config.design, config.seed);

        {
            auto out = open_output(artifact_path(config, "households.csv"));
            write_households(out, sample);
        }
        {
            auto out = open_output(artifact_path(config, "covariates.csv"));
            write_covariates(out, pop.raw_covariates);
        }
        {
            auto out = open_output(artifact_path(config, "population.csv"));
            write_population(out, pop);
        }
        {
            auto out = open_output(artifact_path(config, "true_params.txt"));
            write_true_params(out, pop);
        }
        {
            auto out = open_output(artifact_path(config, "true_fgt.csv"));
            out << "comuna_id";
            std::vector<std::vector<double>> truth;
            for (const double alpha : config.alphas) {
                out << ",q_a" << alpha_tag(alpha);
                truth.push_back(true_fgt(pop, config.lines, alpha));
            }
            out << '\n';
            for (std::size_t c = 0; c < pop.comuna_ids.size(); ++c) {
                out << pop.comuna_ids[c];
                for (const auto& t : truth) out << ',' << csv::format_number(t[c]);
                out << '\n';
            }
        }
        {
            RunConfig run = config;
            run.households_path = "households.csv";
            run.covariates_path = "covariates.csv";
            run.transforms = pop.transforms;
            run.out_dir = "run";
            auto out = open_output(artifact_path(config, "config.txt"));
            write_run_config(out, run);
        }
        log << "simulate: " << pop.comuna_ids.size() << " comunas, " << sample.records.size()
            << " sampled households, " << pop.negative_redraws << " negative draws redrawn -> " << config.out_dir
            << '\n';
        return kExitOk;
    });
}

}  // namespace povmap
