#include "povmap/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "povmap/csv.hpp"

namespace povmap {

namespace {

constexpr std::array<const char*, 6> kHouseholdColumns = {
    "comuna_id", "urbanicity", "psu_id", "household_id", "income", "weight"};

void check_record(const HouseholdRecord& r, std::size_t row, std::vector<Error>& issues) {
    if (!std::isfinite(r.income)) {
        issues.emplace_back(ErrorCode::NonFiniteInput, "income is not finite at row " + std::to_string(row), row);
    } else if (r.income < 0.0) {
        issues.emplace_back(ErrorCode::NegativeIncome,
                            "income " + csv::format_number(r.income) + " at row " + std::to_string(row), row);
    }
    if (!(r.weight_raw > 0.0) || !std::isfinite(r.weight_raw)) {
        issues.emplace_back(ErrorCode::NonPositiveWeight,
                            "weight " + csv::format_number(r.weight_raw) + " at row " + std::to_string(row), row);
    }
    if (r.urbanicity != kUrban && r.urbanicity != kRural) {
        issues.emplace_back(ErrorCode::UrbanicityOutOfRange,
                            "urbanicity " + std::to_string(r.urbanicity) + " at row " + std::to_string(row), row);
    }
}

std::string household_key(const HouseholdRecord& r) {
    std::string key = r.comuna_id;
    key += '\x1f';
    key += std::to_string(r.urbanicity);
    key += '\x1f';
    key += r.psu_id;
    key += '\x1f';
    key += r.household_id;
    return key;
}

void check_duplicates(const std::vector<HouseholdRecord>& records, std::vector<Error>& issues) {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto [it, inserted] = seen.emplace(household_key(records[i]), i + 1);
        if (!inserted) {
            issues.emplace_back(ErrorCode::DuplicateHousehold,
                                "household " + records[i].household_id + " in comuna " + records[i].comuna_id +
                                    " repeats row " + std::to_string(it->second),
                                i + 1);
        }
    }
}

HouseholdTable group_records(std::vector<HouseholdRecord> records) {
    HouseholdTable table;
    table.records = std::move(records);

    struct Cell {
        std::vector<std::string> psu_order;
        std::unordered_map<std::string, std::vector<std::size_t>> rows;
    };
    std::vector<std::string> comuna_order;
    std::unordered_map<std::string, std::size_t> comuna_lookup;
    std::vector<std::array<Cell, 2>> cells;

    for (std::size_t i = 0; i < table.records.size(); ++i) {
        const auto& r = table.records[i];
        auto [it, inserted] = comuna_lookup.emplace(r.comuna_id, comuna_order.size());
        if (inserted) {
            comuna_order.push_back(r.comuna_id);
            cells.emplace_back();
        }
        Cell& cell = cells[it->second][static_cast<std::size_t>(r.urbanicity - 1)];
        auto& rows = cell.rows[r.psu_id];
        if (rows.empty()) cell.psu_order.push_back(r.psu_id);
        rows.push_back(i);
    }

    for (std::size_t c = 0; c < comuna_order.size(); ++c) {
        ComunaGroup comuna;
        comuna.comuna_id = comuna_order[c];
        for (int u = kUrban; u <= kRural; ++u) {
            Cell& cell = cells[c][static_cast<std::size_t>(u - 1)];
            if (cell.psu_order.empty()) continue;
            StratumGroup stratum;
            stratum.comuna = c;
            stratum.urbanicity = u;
            const std::size_t stratum_index = table.strata.size();
            for (const auto& psu_id : cell.psu_order) {
                PsuGroup psu;
                psu.stratum = stratum_index;
                psu.psu_id = psu_id;
                psu.rows = std::move(cell.rows[psu_id]);
                for (const auto row : psu.rows) {
                    psu.sum_t += table.records[row].t_income;
                }
                comuna.n_households += psu.rows.size();
                stratum.psus.push_back(table.psus.size());
                table.psus.push_back(std::move(psu));
            }
            comuna.strata.push_back(stratum_index);
            table.strata.push_back(std::move(stratum));
        }
        table.comunas.push_back(std::move(comuna));
    }
    return table;
}

std::vector<std::size_t> header_positions(const std::vector<std::string>& header,
                                          const std::vector<std::string>& required, std::vector<Error>& issues) {
    std::vector<std::size_t> positions;
    for (const auto& name : required) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            issues.emplace_back(ErrorCode::MissingColumn, "column '" + name + "' not found");
            positions.push_back(0);
        } else {
            positions.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }
    return positions;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return in;
}

}  // namespace

std::size_t HouseholdTable::comuna_index(const std::string& comuna_id) const {
    for (std::size_t c = 0; c < comunas.size(); ++c) {
        if (comunas[c].comuna_id == comuna_id) return c;
    }
    throw Error(ErrorCode::RosterMismatch, "comuna " + comuna_id + " is not in the household roster");
}

double transform_income(double income) {
    if (!std::isfinite(income)) throw Error(ErrorCode::NonFiniteInput, "income is not finite");
    if (income < 0.0) throw Error(ErrorCode::NegativeIncome, "income " + csv::format_number(income));
    return std::log1p(income);
}

double inverse_transform_income(double t) { return std::expm1(t); }

HouseholdTable scale_weights(HouseholdTable table) {
    std::vector<double> totals(table.comunas.size(), 0.0);
    std::vector<std::size_t> comuna_of_row(table.records.size(), 0);
    for (const auto& psu : table.psus) {
        const std::size_t c = table.strata[psu.stratum].comuna;
        for (const auto row : psu.rows) {
            const double w = table.records[row].weight_raw;
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw Error(ErrorCode::NonPositiveWeight, "weight " + csv::format_number(w), row + 1);
            }
            comuna_of_row[row] = c;
            totals[c] += w;
        }
    }
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        auto& r = table.records[i];
        r.weight_scaled = r.weight_raw / totals[comuna_of_row[i]];
    }
    for (auto& psu : table.psus) {
        psu.weight_mass = 0.0;
        for (const auto row : psu.rows) psu.weight_mass += table.records[row].weight_scaled;
    }
    return table;
}

HouseholdTable build_household_table(std::vector<HouseholdRecord> records) {
    std::vector<Error> issues;
    for (std::size_t i = 0; i < records.size(); ++i) check_record(records[i], i + 1, issues);
    check_duplicates(records, issues);
    if (!issues.empty()) throw issues.front();
    for (auto& r : records) r.t_income = transform_income(r.income);
    return scale_weights(group_records(std::move(records)));
}

HouseholdTable read_households(std::istream& in, std::vector<Error>& issues) {
    std::string line;
    if (!csv::next_line(in, line)) {
        issues.emplace_back(ErrorCode::MissingColumn, "households file is empty");
        return {};
    }
    const auto header = csv::split(line);
    const std::vector<std::string> required(kHouseholdColumns.begin(), kHouseholdColumns.end());
    const std::size_t before = issues.size();
    const auto pos = header_positions(header, required, issues);
    if (issues.size() != before) return {};

    std::vector<HouseholdRecord> records;
    std::size_t row = 0;
    while (csv::next_line(in, line)) {
        ++row;
        const auto fields = csv::split(line);
        if (fields.size() != header.size()) {
            issues.emplace_back(ErrorCode::MalformedRow,
                                "expected " + std::to_string(header.size()) + " fields at row " + std::to_string(row),
                                row);
            continue;
        }
        HouseholdRecord r;
        r.comuna_id = fields[pos[0]];
        r.psu_id = fields[pos[2]];
        r.household_id = fields[pos[3]];
        const auto urbanicity = csv::parse_integer(fields[pos[1]]);
        const auto income = csv::parse_double(fields[pos[4]]);
        const auto weight = csv::parse_double(fields[pos[5]]);
        if (!urbanicity || !income || !weight || r.comuna_id.empty() || r.psu_id.empty() ||
            r.household_id.empty()) {
            issues.emplace_back(ErrorCode::MalformedRow, "unparseable field at row " + std::to_string(row), row);
            continue;
        }
        r.urbanicity = static_cast<int>(*urbanicity);
        r.income = *income;
        r.weight_raw = *weight;
        check_record(r, row, issues);
        records.push_back(std::move(r));
    }
    check_duplicates(records, issues);
    if (!issues.empty()) return {};
    for (auto& r : records) r.t_income = transform_income(r.income);
    return scale_weights(group_records(std::move(records)));
}

HouseholdTable read_households(std::istream& in) {
    std::vector<Error> issues;
    auto table = read_households(in, issues);
    if (!issues.empty()) throw issues.front();
    return table;
}

HouseholdTable load_households(const std::string& path) {
    auto in = open_input(path);
    return read_households(in);
}

void write_households(std::ostream& out, const HouseholdTable& table) {
    out << "comuna_id,urbanicity,psu_id,household_id,income,weight\n";
    for (const auto& r : table.records) {
        out << r.comuna_id << ',' << r.urbanicity << ',' << r.psu_id << ',' << r.household_id << ','
            << csv::format_number(r.income) << ',' << csv::format_number(r.weight_raw) << '\n';
    }
}

// -- covariates ---------------------------------------------------------------

CovariateTransform parse_transform(const std::string& tag) {
    if (tag == "log") return CovariateTransform::Log;
    if (tag == "arcsin_sqrt") return CovariateTransform::ArcsinSqrt;
    if (tag == "identity") return CovariateTransform::Identity;
    throw Error(ErrorCode::UnknownTransform, "transform tag '" + tag + "'");
}

std::string to_string(CovariateTransform transform) {
    switch (transform) {
        case CovariateTransform::Log: return "log";
        case CovariateTransform::ArcsinSqrt: return "arcsin_sqrt";
        case CovariateTransform::Identity: return "identity";
    }
    return "identity";
}

std::ptrdiff_t CovariateTable::find(const std::string& comuna_id) const {
    const auto it = std::find(comuna_ids.begin(), comuna_ids.end(), comuna_id);
    return it == comuna_ids.end() ? -1 : it - comuna_ids.begin();
}

RawCovariateTable read_covariates(std::istream& in, std::vector<Error>& issues) {
    RawCovariateTable raw;
    std::string line;
    if (!csv::next_line(in, line)) {
        issues.emplace_back(ErrorCode::MissingColumn, "covariates file is empty");
        return raw;
    }
    auto header = csv::split(line);
    if (header.empty() || header.front() != "comuna_id") {
        issues.emplace_back(ErrorCode::MissingColumn, "first covariate column must be 'comuna_id'");
        return raw;
    }
    raw.names.assign(header.begin() + 1, header.end());
    std::set<std::string> seen;
    std::size_t row = 0;
    while (csv::next_line(in, line)) {
        ++row;
        const auto fields = csv::split(line);
        if (fields.size() != header.size() || fields.front().empty()) {
            issues.emplace_back(ErrorCode::MalformedRow, "malformed covariate row " + std::to_string(row), row);
            continue;
        }
        if (!seen.insert(fields.front()).second) {
            issues.emplace_back(ErrorCode::DuplicateHousehold, "comuna " + fields.front() + " has two covariate rows",
                                row);
            continue;
        }
        std::vector<double> values;
        bool ok = true;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const auto v = csv::parse_double(fields[j]);
            if (!v || !std::isfinite(*v)) {
                issues.emplace_back(ErrorCode::NonFiniteInput,
                                    "covariate '" + header[j] + "' at row " + std::to_string(row), row);
                ok = false;
                break;
            }
            values.push_back(*v);
        }
        if (!ok) continue;
        raw.comuna_ids.push_back(fields.front());
        raw.values.push_back(std::move(values));
    }
    return raw;
}

RawCovariateTable read_covariates(std::istream& in) {
    std::vector<Error> issues;
    auto raw = read_covariates(in, issues);
    if (!issues.empty()) throw issues.front();
    return raw;
}

RawCovariateTable load_covariates(const std::string& path) {
    auto in = open_input(path);
    return read_covariates(in);
}

void write_covariates(std::ostream& out, const RawCovariateTable& raw) {
    out << "comuna_id";
    for (const auto& name : raw.names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < raw.comuna_ids.size(); ++i) {
        out << raw.comuna_ids[i];
        for (const double v : raw.values[i]) out << ',' << csv::format_number(v);
        out << '\n';
    }
}

CovariateTable transform_covariates(const RawCovariateTable& raw,
                                    const std::map<std::string, CovariateTransform>& transforms) {
    const std::size_t n = raw.comuna_ids.size();
    const std::size_t q = raw.names.size();
    if (n < 2 && q > 0) {
        throw Error(ErrorCode::ZeroVarianceColumn, "at least two comunas are needed to standardize covariates");
    }

    CovariateTable table;
    table.comuna_ids = raw.comuna_ids;
    table.names.push_back("intercept");
    table.names.insert(table.names.end(), raw.names.begin(), raw.names.end());
    table.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q + 1));
    table.x.col(0).setOnes();

    for (std::size_t j = 0; j < q; ++j) {
        const auto it = transforms.find(raw.names[j]);
        const auto transform = it == transforms.end() ? CovariateTransform::Identity : it->second;
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = raw.values[i][j];
            switch (transform) {
                case CovariateTransform::Log:
                    if (!(v > 0.0)) {
                        throw Error(ErrorCode::NonPositiveWage, "column '" + raw.names[j] + "' value " +
                                                                    csv::format_number(v) + " for comuna " +
                                                                    raw.comuna_ids[i]);
                    }
                    column[i] = std::log(v);
                    break;
                case CovariateTransform::ArcsinSqrt:
                    if (!(v >= 0.0 && v <= 1.0)) {
                        throw Error(ErrorCode::PercentOutOfRange, "column '" + raw.names[j] + "' value " +
                                                                      csv::format_number(v) + " for comuna " +
                                                                      raw.comuna_ids[i] + " is not a proportion");
                    }
                    column[i] = std::asin(std::sqrt(v));
                    break;
                case CovariateTransform::Identity:
                    column[i] = v;
                    break;
            }
        }
        double mean = 0.0;
        for (const double v : column) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const double v : column) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            throw Error(ErrorCode::ZeroVarianceColumn, "column '" + raw.names[j] + "' is constant");
        }
        table.column_means.push_back(mean);
        table.column_sds.push_back(sd);
        for (std::size_t i = 0; i < n; ++i) {
            table.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = (column[i] - mean) / sd;
        }
    }
    return table;
}

std::vector<std::string> missing_covariate_rows(const HouseholdTable& households,
                                                const RawCovariateTable& covariates) {
    std::set<std::string> known(covariates.comuna_ids.begin(), covariates.comuna_ids.end());
    std::vector<std::string> missing;
    for (const auto& comuna : households.comunas) {
        if (!known.count(comuna.comuna_id)) missing.push_back(comuna.comuna_id);
    }
    return missing;
}

ModelData make_model_data(HouseholdTable households, CovariateTable covariates) {
    ModelData data;
    data.design.resize(static_cast<Eigen::Index>(households.comunas.size()), covariates.x.cols());
    for (std::size_t c = 0; c < households.comunas.size(); ++c) {
        const auto row = covariates.find(households.comunas[c].comuna_id);
        if (row < 0) {
            throw Error(ErrorCode::RosterMismatch,
                        "comuna " + households.comunas[c].comuna_id + " has no covariate row");
        }
        data.design.row(static_cast<Eigen::Index>(c)) = covariates.x.row(row);
    }
    data.households = std::move(households);
    data.covariates = std::move(covariates);
    return data;
}

}  // namespace povmap
