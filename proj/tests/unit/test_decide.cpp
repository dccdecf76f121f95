#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "povmap/decide.hpp"
#include "povmap/error.hpp"

using namespace povmap;

namespace {

QMatrix make_q(const Eigen::MatrixXd& values) {
    QMatrix q;
    q.values = values;
    for (Eigen::Index c = 0; c < values.rows(); ++c) q.comuna_ids.push_back("c" + std::to_string(c));
    return q;
}

}  // namespace

TEST_CASE("point estimates") {
    Eigen::MatrixXd m(2, 2);
    m << 0.2, 0.4, 0.5, 0.5;
    const auto p = point_estimates(make_q(m));
    CHECK(p[0].mean == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(p[0].sd == doctest::Approx(0.1414213562373095).epsilon(1e-14));
    CHECK(p[1].mean == 0.5);
    CHECK(p[1].sd == 0.0);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd r(3, 500);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = 1e3 + u(rng);
    const auto pr = point_estimates(make_q(r));
    for (Eigen::Index c = 0; c < 3; ++c) {
        std::vector<double> row;
        for (Eigen::Index j = 0; j < r.cols(); ++j) row.push_back(r(c, j));
        const auto [mean, sd] = oracle::two_pass_mean_sd(row);
        CHECK(pr[static_cast<std::size_t>(c)].mean == doctest::Approx(mean).epsilon(1e-13));
        CHECK(pr[static_cast<std::size_t>(c)].sd == doctest::Approx(sd).epsilon(1e-9));
    }
}

TEST_CASE("thresholds and exceedance") {
    const auto t = make_thresholds(0.2, {1.5, 1.1, 1.25});
    REQUIRE(t.size() == 3);
    CHECK(t[0] == doctest::Approx(0.22));
    CHECK(t[1] == doctest::Approx(0.25));
    CHECK(t[2] == doctest::Approx(0.30));
    CHECK(make_thresholds(0.2) == make_thresholds(0.2, {1.10, 1.25, 1.50}));

    Eigen::MatrixXd m(1, 4);
    m << 0.1, 0.22, 0.26, 0.4;
    const auto p = exceedance_probabilities(make_q(m), {0.22, 0.25, 0.30});
    // strict: the draw equal to 0.22 does not count
    CHECK(p(0, 0) == 0.5);
    CHECK(p(0, 1) == 0.5);
    CHECK(p(0, 2) == 0.25);
    const auto all = exceedance_probabilities(make_q(m), {-1.0, 1.0});
    CHECK(all(0, 0) == 1.0);
    CHECK(all(0, 1) == 0.0);
}

TEST_CASE("flags are strict") {
    Eigen::MatrixXd p(3, 1);
    p << 0.6172, 0.5, 0.0314;
    const auto f = flag(p);
    CHECK(f[0][0]);
    CHECK(!f[1][0]);
    CHECK(!f[2][0]);
    CHECK(flag(p, 0.01)[2][0]);
}

TEST_CASE("extreme probabilities by hand") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 3, 2, 2, 1, 1;
    const auto e = extreme_probabilities(make_q(m));
    CHECK(e.prob_max[0] == doctest::Approx(2.0 / 3.0));
    CHECK(e.prob_max[1] == doctest::Approx(1.0 / 3.0));
    CHECK(e.prob_min[0] == doctest::Approx(1.0 / 3.0));
    CHECK(e.prob_min[1] == doctest::Approx(2.0 / 3.0));
    CHECK(e.worst == 0);
    CHECK(e.best == 1);

    // a tied column goes to the lowest index for both
    Eigen::MatrixXd tie = Eigen::MatrixXd::Constant(3, 2, 0.5);
    const auto t = extreme_probabilities(make_q(tie));
    CHECK(t.prob_max == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(t.prob_min == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("decision layer equals the counting oracle") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> grid(0, 20);
    for (int trial = 0; trial < 100; ++trial) {
        // coarse grid values so ties and threshold hits actually occur
        Eigen::MatrixXd m(10, 50);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = grid(rng) / 40.0;
        const auto q = make_q(m);
        const double regional = 0.2;
        const auto report = decide(q, regional, kDefaultMultipliers);
        const auto counts = oracle::count_extremes(m);
        double sum_max = 0.0;
        double sum_min = 0.0;
        for (std::size_t c = 0; c < 10; ++c) {
            const auto& d = report.comunas[c];
            for (std::size_t j = 0; j < 3; ++j) {
                const auto above = oracle::count_above(m, static_cast<Eigen::Index>(c), report.thresholds[j]);
                REQUIRE(d.exceedance[j] == static_cast<double>(above) / 50.0);
                REQUIRE(d.flags[j] == (2 * above > 50));
            }
            REQUIRE(d.exceedance[0] >= d.exceedance[1]);
            REQUIRE(d.exceedance[1] >= d.exceedance[2]);
            REQUIRE(d.prob_max == static_cast<double>(counts.max_count[c]) / 50.0);
            REQUIRE(d.prob_min == static_cast<double>(counts.min_count[c]) / 50.0);
            sum_max += d.prob_max;
            sum_min += d.prob_min;
        }
        CHECK(std::abs(sum_max - 1.0) <= 1e-12);
        CHECK(std::abs(sum_min - 1.0) <= 1e-12);
    }
}

TEST_CASE("extremes are invariant to positive rescaling") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(6, 40);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    const auto a = extreme_probabilities(make_q(m));
    const auto b = extreme_probabilities(make_q(m * 3.7 + Eigen::MatrixXd::Constant(6, 40, 0.1)));
    CHECK(a.prob_max == b.prob_max);
    CHECK(a.prob_min == b.prob_min);
    // reversing the order swaps the roles
    const auto c = extreme_probabilities(make_q(-m));
    CHECK(a.prob_max == c.prob_min);
}

TEST_CASE("report assembly and ordering") {
    Eigen::MatrixXd m(4, 4);
    m << 0.10, 0.10, 0.10, 0.10,  //
        0.50, 0.50, 0.50, 0.10,   //
        0.30, 0.30, 0.10, 0.10,   //
        0.50, 0.50, 0.50, 0.10;
    const auto report = decide(make_q(m), 0.2, {1.5, 1.1}, 0.5);
    CHECK(report.thresholds == make_thresholds(0.2, {1.1, 1.5}));
    CHECK(report.comunas[1].exceedance[0] == 0.75);
    CHECK(report.comunas[1].flags[0]);
    CHECK(!report.comunas[2].flags[0]);
    // descending first-threshold probability, ties in row order
    CHECK(report.table_order() == std::vector<std::size_t>{1, 3, 2, 0});
    CHECK(report.worst == 1);
    CHECK(report.best == 0);
    CHECK(report.comunas[0].comuna_id == "c0");
    CHECK(report.comunas[2].posterior_mean == doctest::Approx(0.2));
}

TEST_CASE("decision inputs are checked") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(2, 3, 0.1);
    CHECK_THROWS_AS(decide(make_q(m), 0.0, kDefaultMultipliers), Error);
    CHECK_THROWS_AS(decide(make_q(m), 0.2, kDefaultMultipliers, 1.5), Error);
    try {
        decide(make_q(Eigen::MatrixXd::Constant(1, 3, 0.1)), 0.2, kDefaultMultipliers);
        FAIL("expected SingleComuna");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingleComuna);
    }
}
