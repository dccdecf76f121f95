#pragma once

#include <string>
#include <vector>

#include "povmap/data.hpp"

namespace povmap::fixture {

inline HouseholdRecord household(std::string comuna, int urbanicity, std::string psu, std::string id, double income,
                                 double weight = 1.0) {
    HouseholdRecord r;
    r.comuna_id = std::move(comuna);
    r.urbanicity = urbanicity;
    r.psu_id = std::move(psu);
    r.household_id = std::move(id);
    r.income = income;
    r.weight_raw = weight;
    return r;
}

// Covariate table with the given design rows (intercept included by caller).
inline CovariateTable design(const std::vector<std::string>& ids, const Eigen::MatrixXd& x) {
    CovariateTable t;
    t.comuna_ids = ids;
    t.x = x;
    t.names.push_back("intercept");
    for (Eigen::Index j = 1; j < x.cols(); ++j) t.names.push_back("x" + std::to_string(j));
    return t;
}

// Model data whose comunas all share an intercept-only design.
inline ModelData intercept_only(std::vector<HouseholdRecord> records) {
    auto table = build_household_table(std::move(records));
    std::vector<std::string> ids;
    for (const auto& c : table.comunas) ids.push_back(c.comuna_id);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(ids.size()), 1);
    return make_model_data(std::move(table), design(ids, x));
}

}  // namespace povmap::fixture
