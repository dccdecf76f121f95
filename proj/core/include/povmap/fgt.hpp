#pragma once

// Foster-Greer-Thorbecke indices under the log-normal household model.
//
// For a household with transformed income T ~ N(theta, sigma_t^2) and poverty
// line k (l = ln(k + 1) on the transformed scale) the expected contribution is
//
//   E{ ((k - (e^T - 1)) / k)^alpha * 1(0 <= T < l) }.
//
// alpha = 0 and alpha = 1 have closed forms in Phi; other alpha are integrated
// numerically over z in [-theta / sigma_t, (l - theta) / sigma_t].

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povmap/data.hpp"
#include "povmap/sampler.hpp"

namespace povmap {

struct PovertyLines {
    double k_urban = 0.0;
    double k_rural = 0.0;

    void validate() const;
    double line(int urbanicity) const { return urbanicity == kRural ? k_rural : k_urban; }
    // l_u = ln(k_u + 1)
    double log_line(int urbanicity) const;
};

inline constexpr std::size_t kDefaultQuadratureNodes = 128;

// Headcount: Phi((l - theta)/sigma_t) - Phi(-theta/sigma_t), in [0, 1].
double e_g0(double theta, double sigma_t, double l);

// Normalised gap, clamped to [0, e_g0(theta, sigma_t, ln(k + 1))].
double e_g1(double theta, double sigma_t, double k);

// Gauss-Legendre evaluation for any alpha >= 0 (no closed-form shortcut).
double e_g_alpha(double theta, double sigma_t, double k, double alpha,
                 std::size_t nodes = kDefaultQuadratureNodes);

// Dispatches to e_g0 / e_g1 for alpha in {0, 1}, quadrature otherwise.
double expected_fgt(double theta, double sigma_t, double k, double alpha);

// g_alpha on the income scale: ((k - y)/k)^alpha * 1(y < k).
double fgt_term(double income, double k, double alpha);

// Survey-weighted index per sampled comuna at one model state: sum over PSUs
// of (scaled weight mass) x expected_fgt(theta_cup, sigma_t, k_u, alpha).
Eigen::VectorXd q_tilde(const ModelState& state, const HouseholdTable& households, const PovertyLines& lines,
                        double alpha);

struct QMatrix {
    Eigen::MatrixXd values;  // comunas x draws
    std::vector<std::string> comuna_ids;
    double alpha = 0.0;
    std::string provenance;

    std::size_t comunas() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t draws() const { return static_cast<std::size_t>(values.cols()); }
};

// Column r is q_tilde at DrawsStore::at(r). Columns are split across
// `threads` workers by contiguous blocks; output does not depend on threads.
QMatrix build_q_matrix(const DrawsStore& draws, const HouseholdTable& households, const PovertyLines& lines,
                       double alpha, unsigned threads = 1);

// Hajek ratio sum(w_raw * g_alpha(y)) / sum(w_raw) over the listed comunas
// (all comunas when `domain` is empty), on the original income scale.
double direct_estimate(const HouseholdTable& households, const PovertyLines& lines, double alpha,
                       const std::vector<std::string>& domain = {});

}  // namespace povmap
