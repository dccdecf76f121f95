#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "povmap/data.hpp"

namespace povmap::oracle {

// Gaussian posterior assembled term by term from squared linear residuals:
// each residual (a' z - b) with variance v adds a a' / v to the precision and
// a b / v to the linear term.
class GaussianAssembler {
public:
    explicit GaussianAssembler(Eigen::Index dim)
        : precision_(Eigen::MatrixXd::Zero(dim, dim)), linear_(Eigen::VectorXd::Zero(dim)) {}

    void add(const Eigen::VectorXd& a, double b, double variance) {
        precision_ += a * a.transpose() / variance;
        linear_ += a * (b / variance);
    }

    Eigen::MatrixXd covariance() const {
        return precision_.inverse();
    }
    Eigen::VectorXd mean() const { return precision_.fullPivLu().solve(linear_); }

private:
    Eigen::MatrixXd precision_;
    Eigen::VectorXd linear_;
};

// Exact joint posterior of (theta, mu, beta_1, beta_2) with the SDs fixed.
// Layout matches flatten() minus the three leading SDs.
struct LinearGaussianPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

inline LinearGaussianPosterior linear_gaussian_posterior(const ModelData& data, double sigma_t, double sigma_theta,
                                                         double sigma_mu, double beta_prior_sd) {
    const auto& hh = data.households;
    const auto p = static_cast<Eigen::Index>(data.design.cols());
    const auto n_theta = static_cast<Eigen::Index>(hh.psus.size());
    const auto n_mu = static_cast<Eigen::Index>(hh.strata.size());
    // order: beta_1, beta_2, mu, theta
    const Eigen::Index dim = 2 * p + n_mu + n_theta;
    const auto beta_at = [&](int u) { return static_cast<Eigen::Index>((u - 1)) * p; };
    const auto mu_at = [&](std::size_t s) { return 2 * p + static_cast<Eigen::Index>(s); };
    const auto theta_at = [&](std::size_t i) { return 2 * p + n_mu + static_cast<Eigen::Index>(i); };

    GaussianAssembler g(dim);
    for (std::size_t i = 0; i < hh.psus.size(); ++i) {
        for (const auto row : hh.psus[i].rows) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
            a[theta_at(i)] = 1.0;
            g.add(a, hh.records[row].t_income, sigma_t * sigma_t);
        }
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
        a[theta_at(i)] = 1.0;
        a[mu_at(hh.psus[i].stratum)] = -1.0;
        g.add(a, 0.0, sigma_theta * sigma_theta);
    }
    for (std::size_t s = 0; s < hh.strata.size(); ++s) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
        a[mu_at(s)] = 1.0;
        const auto x = data.design.row(static_cast<Eigen::Index>(hh.strata[s].comuna));
        a.segment(beta_at(hh.strata[s].urbanicity), p) = -x.transpose();
        g.add(a, 0.0, sigma_mu * sigma_mu);
    }
    for (Eigen::Index j = 0; j < 2 * p; ++j) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
        a[j] = 1.0;
        g.add(a, 0.0, beta_prior_sd * beta_prior_sd);
    }
    return {g.mean(), g.covariance()};
}

// Two-pass sample mean and SD (denominator n - 1).
inline std::pair<double, double> two_pass_mean_sd(const std::vector<double>& v) {
    double mean = 0.0;
    for (const double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

// Monte Carlo standard error of the mean of an autocorrelated series from
// non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& v, std::size_t batches = 50) {
    const std::size_t size = v.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < size; ++i) means[b] += v[b * size + i];
        means[b] /= static_cast<double>(size);
    }
    return two_pass_mean_sd(means).second / std::sqrt(static_cast<double>(batches));
}

// Column-wise argmax/argmin counts by exhaustive comparison against every
// other row (ties to the lowest index).
struct ExtremeCounts {
    std::vector<std::size_t> max_count;
    std::vector<std::size_t> min_count;
};

inline ExtremeCounts count_extremes(const Eigen::MatrixXd& m) {
    ExtremeCounts out{std::vector<std::size_t>(static_cast<std::size_t>(m.rows()), 0),
                      std::vector<std::size_t>(static_cast<std::size_t>(m.rows()), 0)};
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index c = 0; c < m.rows(); ++c) {
            bool is_max = true;
            bool is_min = true;
            for (Eigen::Index k = 0; k < m.rows(); ++k) {
                if (k == c) continue;
                if (k < c ? m(k, j) >= m(c, j) : m(k, j) > m(c, j)) is_max = false;
                if (k < c ? m(k, j) <= m(c, j) : m(k, j) < m(c, j)) is_min = false;
            }
            if (is_max) ++out.max_count[static_cast<std::size_t>(c)];
            if (is_min) ++out.min_count[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

inline std::size_t count_above(const Eigen::MatrixXd& m, Eigen::Index row, double threshold) {
    std::size_t n = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m(row, j) > threshold) ++n;
    }
    return n;
}

}  // namespace povmap::oracle
