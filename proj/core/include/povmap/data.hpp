#pragma once

// Household survey ingestion and comuna-level covariates.
//
// Households are grouped comuna -> urbanicity stratum -> PSU. Group order is
// first appearance in the input (strata within a comuna are ordered urban
// before rural), which makes every downstream layout a deterministic function
// of the input rows.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povmap/error.hpp"

namespace povmap {

inline constexpr int kUrban = 1;
inline constexpr int kRural = 2;

struct HouseholdRecord {
    std::string comuna_id;
    int urbanicity = kUrban;
    std::string psu_id;
    std::string household_id;
    double income = 0.0;         // per-capita, currency units
    double weight_raw = 1.0;     // survey weight as supplied
    double t_income = 0.0;       // ln(income + 1)
    double weight_scaled = 0.0;  // weight_raw / comuna weight total
};

struct PsuGroup {
    std::size_t stratum = 0;
    std::string psu_id;
    std::vector<std::size_t> rows;  // indices into HouseholdTable::records
    double sum_t = 0.0;             // sum of t_income over rows
    double weight_mass = 0.0;       // sum of weight_scaled over rows
};

struct StratumGroup {
    std::size_t comuna = 0;
    int urbanicity = kUrban;
    std::vector<std::size_t> psus;
};

struct ComunaGroup {
    std::string comuna_id;
    std::vector<std::size_t> strata;  // U_c entries, urban first
    std::size_t n_households = 0;
};

struct HouseholdTable {
    std::vector<HouseholdRecord> records;
    std::vector<ComunaGroup> comunas;
    std::vector<StratumGroup> strata;
    std::vector<PsuGroup> psus;

    std::size_t comuna_index(const std::string& comuna_id) const;
};

// ln(y + 1). Throws NegativeIncome / NonFiniteInput.
double transform_income(double income);
double inverse_transform_income(double t);

// Validates the records, computes t_income, groups them and scales weights.
// Row order is preserved.
HouseholdTable build_household_table(std::vector<HouseholdRecord> records);

// weight_scaled = weight_raw / (sum of weight_raw in the same comuna). Also
// refreshes the PSU weight masses. Idempotent.
HouseholdTable scale_weights(HouseholdTable table);

// Reads households.csv. `issues` receives every problem found; the returned
// table is only meaningful when `issues` is empty.
HouseholdTable read_households(std::istream& in, std::vector<Error>& issues);

// Throwing variants: the first issue found is raised.
HouseholdTable read_households(std::istream& in);
HouseholdTable load_households(const std::string& path);

// Writes the households.csv schema with 17 significant digits.
void write_households(std::ostream& out, const HouseholdTable& table);

// -- covariates ---------------------------------------------------------------

enum class CovariateTransform { Log, ArcsinSqrt, Identity };

CovariateTransform parse_transform(const std::string& tag);
std::string to_string(CovariateTransform transform);

struct RawCovariateTable {
    std::vector<std::string> comuna_ids;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // [row][column]
};

struct CovariateTable {
    std::vector<std::string> comuna_ids;
    std::vector<std::string> names;      // "intercept" followed by raw names
    Eigen::MatrixXd x;                   // comunas x p, first column all ones
    std::vector<double> column_means;    // of the transformed columns
    std::vector<double> column_sds;

    std::ptrdiff_t find(const std::string& comuna_id) const;  // -1 if absent
};

RawCovariateTable read_covariates(std::istream& in, std::vector<Error>& issues);
RawCovariateTable read_covariates(std::istream& in);
RawCovariateTable load_covariates(const std::string& path);
void write_covariates(std::ostream& out, const RawCovariateTable& raw);

// Applies the per-column transform (columns without a tag are Identity),
// z-scores every transformed column across comunas and prepends the intercept.
CovariateTable transform_covariates(const RawCovariateTable& raw,
                                    const std::map<std::string, CovariateTransform>& transforms);

// Model-ready inputs: the household table plus one design row per sampled
// comuna, aligned with HouseholdTable::comunas.
struct ModelData {
    HouseholdTable households;
    CovariateTable covariates;
    Eigen::MatrixXd design;  // households.comunas.size() x p

    std::size_t n_covariates() const { return static_cast<std::size_t>(design.cols()); }
};

// Throws RosterMismatch when a sampled comuna has no covariate row.
ModelData make_model_data(HouseholdTable households, CovariateTable covariates);

// Sampled comunas lacking a covariate row, in roster order.
std::vector<std::string> missing_covariate_rows(const HouseholdTable& households,
                                                const RawCovariateTable& covariates);

}  // namespace povmap
