#include "povmap/io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "povmap/csv.hpp"

namespace povmap {

void write_draws(std::ostream& out, const DrawsStore& draws, const ModelData& data) {
    const auto names = parameter_names(data);
    out << "chain,iter,param,value\n";
    for (std::size_t c = 0; c < draws.n_chains(); ++c) {
        for (std::size_t r = 0; r < draws.retained(); ++r) {
            const auto flat = flatten(draws.chains[c][r]);
            for (std::size_t j = 0; j < flat.size(); ++j) {
                out << c << ',' << (r + 1) << ',' << names[j] << ',' << csv::format_number(flat[j]) << '\n';
            }
        }
    }
}

DrawsStore read_draws(std::istream& in, const ModelData& data) {
    const auto names = parameter_names(data);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < names.size(); ++j) index.emplace(names[j], j);

    std::string line;
    if (!csv::next_line(in, line) || csv::split(line) != std::vector<std::string>{"chain", "iter", "param", "value"}) {
        throw Error(ErrorCode::MissingColumn, "draws file must start with 'chain,iter,param,value'");
    }
    // flat values per (chain, iter)
    std::vector<std::vector<std::vector<double>>> values;
    std::vector<std::vector<std::vector<bool>>> seen;
    std::size_t row = 0;
    while (csv::next_line(in, line)) {
        ++row;
        const auto f = csv::split(line);
        if (f.size() != 4) throw Error(ErrorCode::MalformedRow, "bad draws row " + std::to_string(row), row);
        const long long chain = csv::parse_integer(f[0]).value_or(-1);
        const long long iter = csv::parse_integer(f[1]).value_or(0);
        const auto value = csv::parse_double(f[3]);
        if (!value || chain < 0 || iter < 1) {
            throw Error(ErrorCode::MalformedRow, "bad draws row " + std::to_string(row), row);
        }
        const auto it = index.find(f[2]);
        if (it == index.end()) {
            throw Error(ErrorCode::RosterMismatch, "draws parameter '" + f[2] + "' is not in the model", row);
        }
        const auto c = static_cast<std::size_t>(chain);
        const auto r = static_cast<std::size_t>(iter - 1);
        if (values.size() <= c) {
            values.resize(c + 1);
            seen.resize(c + 1);
        }
        if (values[c].size() <= r) {
            values[c].resize(r + 1, std::vector<double>(names.size(), 0.0));
            seen[c].resize(r + 1, std::vector<bool>(names.size(), false));
        }
        values[c][r][it->second] = *value;
        seen[c][r][it->second] = true;
    }
    if (values.empty()) throw Error(ErrorCode::InsufficientDraws, "draws file has no rows");

    DrawsStore store;
    const std::size_t retained = values.front().size();
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (values[c].size() != retained) throw Error(ErrorCode::InsufficientDraws, "chains differ in length");
        std::vector<ModelState> chain;
        for (std::size_t r = 0; r < retained; ++r) {
            if (std::find(seen[c][r].begin(), seen[c][r].end(), false) != seen[c][r].end()) {
                throw Error(ErrorCode::InsufficientDraws, "incomplete state at chain " + std::to_string(c) +
                                                              " iter " + std::to_string(r + 1));
            }
            chain.push_back(unflatten(values[c][r], data));
        }
        store.chains.push_back(std::move(chain));
    }
    return store;
}

void write_q_matrix(std::ostream& out, const QMatrix& q) {
    out << "comuna_id";
    char buffer[32];
    for (std::size_t r = 0; r < q.draws(); ++r) {
        std::snprintf(buffer, sizeof buffer, ",draw_%04zu", r + 1);
        out << buffer;
    }
    out << '\n';
    for (std::size_t c = 0; c < q.comunas(); ++c) {
        out << q.comuna_ids[c];
        for (std::size_t r = 0; r < q.draws(); ++r) {
            out << ',' << csv::format_number(q.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)));
        }
        out << '\n';
    }
}

QMatrix read_q_matrix(std::istream& in, double alpha) {
    std::string line;
    if (!csv::next_line(in, line)) throw Error(ErrorCode::MissingColumn, "Q-matrix file is empty");
    const auto header = csv::split(line);
    if (header.size() < 2 || header.front() != "comuna_id") {
        throw Error(ErrorCode::MissingColumn, "Q-matrix header must start with 'comuna_id'");
    }
    const std::size_t r = header.size() - 1;
    QMatrix q;
    q.alpha = alpha;
    std::vector<std::vector<double>> rows;
    std::size_t row = 0;
    while (csv::next_line(in, line)) {
        ++row;
        const auto f = csv::split(line);
        if (f.size() != header.size()) throw Error(ErrorCode::MalformedRow, "bad Q-matrix row", row);
        std::vector<double> values(r);
        for (std::size_t j = 0; j < r; ++j) {
            const auto v = csv::parse_double(f[j + 1]);
            if (!v) throw Error(ErrorCode::MalformedRow, "bad Q-matrix value", row);
            values[j] = *v;
        }
        q.comuna_ids.push_back(f.front());
        rows.push_back(std::move(values));
    }
    q.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(r));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        for (std::size_t j = 0; j < r; ++j) {
            q.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = rows[c][j];
        }
    }
    return q;
}

void write_psrf(std::ostream& out, const std::vector<PsrfEntry>& entries) {
    out << "param,rhat\n";
    for (const auto& e : entries) out << e.param << ',' << csv::format_number(e.rhat) << '\n';
}

void write_point(std::ostream& out, const DecisionReport& report, const std::vector<double>& direct) {
    out << "comuna_id,posterior_mean,posterior_sd,direct_estimate\n";
    for (const auto c : report.table_order()) {
        const auto& d = report.comunas[c];
        out << d.comuna_id << ',' << csv::format_number(d.posterior_mean) << ','
            << csv::format_number(d.posterior_sd) << ',' << csv::format_number(direct.at(c)) << '\n';
    }
}

void write_flags(std::ostream& out, const DecisionReport& report) {
    const std::size_t n = report.thresholds.size();
    out << "comuna_id";
    for (std::size_t j = 0; j < n; ++j) out << ",p_gt_t" << (j + 1);
    for (std::size_t j = 0; j < n; ++j) out << ",flag_t" << (j + 1);
    out << '\n';
    for (const auto c : report.table_order()) {
        const auto& d = report.comunas[c];
        out << d.comuna_id;
        for (const double p : d.exceedance) out << ',' << csv::format_number(p);
        for (const bool f : d.flags) out << ',' << (f ? 1 : 0);
        out << '\n';
    }
}

void write_extremes(std::ostream& out, const DecisionReport& report) {
    std::vector<std::size_t> order(report.comunas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = report.comunas[a];
        const auto& y = report.comunas[b];
        if (x.prob_max != y.prob_max) return x.prob_max > y.prob_max;
        return x.prob_min < y.prob_min;
    });
    out << "comuna_id,prob_max,prob_min\n";
    for (const auto c : order) {
        const auto& d = report.comunas[c];
        out << d.comuna_id << ',' << csv::format_number(d.prob_max) << ',' << csv::format_number(d.prob_min)
            << '\n';
    }
}

std::string alpha_tag(double alpha) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%g", alpha);
    return buffer;
}

}  // namespace povmap
