#pragma once

// Posterior decisions from a Q-matrix: point estimates, exceedance flags
// against policy standards, and worst/best comuna identification.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povmap/fgt.hpp"

namespace povmap {

inline const std::vector<double> kDefaultMultipliers = {1.10, 1.25, 1.50};
inline constexpr double kDefaultCutoff = 0.5;

struct PointEstimate {
    double mean = 0.0;
    double sd = 0.0;  // denominator R - 1
};

std::vector<PointEstimate> point_estimates(const QMatrix& q);

// Entry (c, j) = #{r : q(c, r) > thresholds[j]} / R.
Eigen::MatrixXd exceedance_probabilities(const QMatrix& q, const std::vector<double>& thresholds);

// regional_direct x multipliers, sorted ascending.
std::vector<double> make_thresholds(double regional_direct, std::vector<double> multipliers = kDefaultMultipliers);

// probability > cutoff, element-wise.
std::vector<std::vector<bool>> flag(const Eigen::MatrixXd& probabilities, double cutoff = kDefaultCutoff);

struct ExtremeProbabilities {
    std::vector<double> prob_max;
    std::vector<double> prob_min;
    std::size_t worst = 0;  // argmax of prob_max
    std::size_t best = 0;   // argmax of prob_min
};

// Per column the largest (smallest) entry scores one; ties go to the lowest
// row index. Probabilities are column averages of those indicators.
ExtremeProbabilities extreme_probabilities(const QMatrix& q);

struct ComunaDecision {
    std::string comuna_id;
    double posterior_mean = 0.0;
    double posterior_sd = 0.0;
    std::vector<double> exceedance;
    std::vector<bool> flags;
    double prob_max = 0.0;
    double prob_min = 0.0;
};

struct DecisionReport {
    double alpha = 0.0;
    double regional_direct = 0.0;
    std::vector<double> multipliers;
    std::vector<double> thresholds;
    double cutoff = kDefaultCutoff;
    std::vector<ComunaDecision> comunas;  // Q-matrix row order
    std::size_t worst = 0;
    std::size_t best = 0;

    // Row indices by descending first-threshold exceedance; ties keep row order.
    std::vector<std::size_t> table_order() const;
};

DecisionReport decide(const QMatrix& q, double regional_direct, const std::vector<double>& multipliers,
                      double cutoff = kDefaultCutoff);

}  // namespace povmap
