#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "vdlr/errors.hpp"
#include "vdlr/screening.hpp"
#include "vdlr/simgen.hpp"

using namespace vdlr;

namespace {

Dataset from_columns(const std::vector<double>& y, const std::vector<std::vector<double>>& cols) {
    const std::size_t m = y.size(), p = cols.size();
    std::vector<double> x(m * p);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < p; ++l) x[i * p + l] = cols[l][i];
    std::vector<std::string> names;
    for (std::size_t l = 0; l < p; ++l) names.push_back("x" + std::to_string(l + 1));
    return Dataset(y, x, std::vector<std::uint8_t>(m * p, 1), p, names);
}

Eigen::MatrixXd gaussian_blobs(std::mt19937_64& g, int n, const std::vector<double>& centres) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd d(n, 2);
    for (int i = 0; i < n; ++i) {
        const double c = centres[i % centres.size()];
        d(i, 0) = c + z(g);
        d(i, 1) = c + z(g);
    }
    return d;
}

}  // namespace

TEST_CASE("complete_cases: drops rows with any missing covariate") {
    const std::vector<double> y = {1, 2, 3, 4};
    const std::vector<double> x = {1, 2, 3, 0, 0, 0, 7, 8};
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0, 0, 0, 1, 1};
    const Dataset ds(y, x, mask, 2, {"a", "b"});
    const Dataset cc = complete_cases(ds);
    std::size_t naive = 0;
    for (std::size_t i = 0; i < 4; ++i) naive += (mask[2 * i] && mask[2 * i + 1]) ? 1 : 0;
    REQUIRE(cc.size() == naive);
    CHECK(cc.y(0) == 1.0);
    CHECK(cc.y(1) == 4.0);
    CHECK(cc.row(1)[1] == 8.0);

    const Dataset full = from_columns({1, 2}, {{3, 4}});
    CHECK(complete_cases(full).size() == 2);
    const Dataset none({1.0}, {0.0}, {0}, 1, {"a"});
    CHECK_THROWS_AS(complete_cases(none), DataError);
}

TEST_CASE("gmm_fit: log-likelihood never decreases across EM iterations") {
    std::mt19937_64 g(4);
    const Eigen::MatrixXd d = gaussian_blobs(g, 300, {-2.0, 0.0, 2.5});
    for (int k = 1; k <= 4; ++k) {
        const GmmModel m = gmm_fit(d, k, 500, 1e-10, 7);
        for (std::size_t t = 1; t < m.loglik_trace.size(); ++t)
            CHECK(m.loglik_trace[t] >= m.loglik_trace[t - 1] - 1e-9 * std::abs(m.loglik_trace[t - 1]));
        double wsum = 0.0;
        for (const auto& c : m.components) {
            wsum += c.weight;
            CHECK((c.cov - c.cov.transpose()).norm() < 1e-10);
            CHECK(Eigen::LLT<Eigen::MatrixXd>(c.cov).info() == Eigen::Success);
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gmm_fit_bic: selects the generating number of components") {
    int one = 0, two = 0;
    for (int r = 0; r < 100; ++r) {
        std::mt19937_64 g(1000 + r);
        GmmOptions opts;
        opts.seed = r + 1;
        if (gmm_fit_bic(gaussian_blobs(g, 200, {0.0}), opts).k == 1) ++one;
        if (gmm_fit_bic(gaussian_blobs(g, 200, {-10.0, 10.0}), opts).k == 2) ++two;
    }
    CHECK(one >= 90);
    CHECK(two >= 90);
}

TEST_CASE("gmm_fit_bic: too few observations") {
    Eigen::MatrixXd d(3, 2);
    d << 1, 2, 3, 4, 5, 7;
    CHECK_THROWS_AS(gmm_fit_bic(d, GmmOptions{}), DataError);
}

TEST_CASE("ols_fit: exact linear data") {
    Eigen::VectorXd y(30);
    Eigen::MatrixXd x(30, 1);
    for (int i = 0; i < 30; ++i) {
        x(i, 0) = -1.0 + 0.1 * i;
        y(i) = 2.0 * x(i, 0);
    }
    const OlsFit f = ols_fit(y, x);
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.p_value < 1e-12);
    CHECK(f.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(f.coefficients(0)) < 1e-12);
}

TEST_CASE("ols_fit: agrees with the normal equations") {
    std::mt19937_64 g(8);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(40, 3);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        for (int l = 0; l < 3; ++l) x(i, l) = z(g);
        y(i) = 1.0 + 0.5 * x(i, 0) - 2.0 * x(i, 2) + z(g);
    }
    const OlsFit f = ols_fit(y, x);
    Eigen::MatrixXd design(40, 4);
    design.col(0).setOnes();
    design.rightCols(3) = x;
    const Eigen::VectorXd naive = (design.transpose() * design).inverse() * (design.transpose() * y);
    for (int c = 0; c < 4; ++c) CHECK(std::abs(f.coefficients(c) - naive(c)) <= 1e-8 * std::max(1.0, std::abs(naive(c))));
    // adjusted coefficient with the cluster-size formula, bounded by R^2
    CHECK(f.adj_r2 == doctest::Approx(1.0 - (1.0 - f.r2) * 39.0 / 37.0).epsilon(1e-14));
    CHECK(f.adj_r2 <= f.r2);
}

TEST_CASE("ols_fit: global F-test p-value") {
    // y = x1 + c e with e orthogonal to the design, c chosen so that F = 3.2 on (2, 17) df
    std::mt19937_64 g(12);
    std::normal_distribution<double> z;
    const int n = 20;
    Eigen::MatrixXd x(n, 2), design(n, 3);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = z(g);
        x(i, 1) = z(g);
        r(i) = z(g);
    }
    design.col(0).setOnes();
    design.rightCols(2) = x;
    const Eigen::VectorXd e = r - design * design.colPivHouseholderQr().solve(r);
    const double ssr = (x.col(0).array() - x.col(0).mean()).square().sum();
    const double target_f = 3.2;
    const double sse = ssr / 2.0 / target_f * 17.0;
    const Eigen::VectorXd y = x.col(0) + std::sqrt(sse / e.squaredNorm()) * e;
    const OlsFit f = ols_fit(y, x);
    // reference: upper tail of F(2, 17) at 3.2
    CHECK(f.p_value == doctest::Approx(0.06614256666642138).epsilon(1e-9));
}

TEST_CASE("weighted_indicator: size weighting and indeterminate result") {
    CHECK(*weighted_indicator({10, 30}, {0.2, 0.6}, {true, true}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(*weighted_indicator({30, 10}, {0.6, 0.2}, {true, true}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(*weighted_indicator({20, 60}, {0.2, 0.6}, {true, true}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(*weighted_indicator({10, 30, 3}, {0.2, 0.6, 0.9}, {true, true, false}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_FALSE(weighted_indicator({3, 2}, {0.1, 0.2}, {false, false}).has_value());
}

TEST_CASE("linearity_indicator: single exact linear cluster") {
    std::vector<double> y, x1;
    for (int i = 0; i < 50; ++i) {
        x1.push_back(-1.0 + 0.04 * i);
        y.push_back(2.0 * x1.back());
    }
    GmmOptions opts;
    opts.k_max = 1;
    const auto res = linearity_indicator(from_columns(y, {x1}), opts);
    CHECK(res.gmm.k == 1);
    CHECK(*res.indicator(LinearityMeasure::r2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*res.indicator(LinearityMeasure::p_value) < 1e-12);
}

TEST_CASE("linearity_indicator: no eligible cluster is indeterminate") {
    // two well separated groups of three with p = 2: neither is above p + 2
    const Dataset ds = from_columns({1, 2, 0.5, 31, 32, 30.5},
                                    {{0.1, 0.7, 0.3, 30.1, 30.7, 30.3}, {1.0, -1.0, 0.4, 31.0, 29.0, 30.4}});
    GmmOptions opts;
    opts.k_min = opts.k_max = 2;
    const auto res = linearity_indicator(ds, opts);
    REQUIRE(res.gmm.k == 2);
    for (const auto& c : res.clusters) CHECK_FALSE(c.eligible);
    CHECK_FALSE(res.q_p_value.has_value());
    CHECK_FALSE(res.q_r2.has_value());
    CHECK_FALSE(res.q_adj_r2.has_value());
}

TEST_CASE("linearity_indicator: too few complete rows is indeterminate") {
    // eight rows but only three are complete, with p = 1
    const std::vector<double> y = {1, 2, 3, 4, 5, 6, 7, 8};
    const std::vector<double> x = {0.1, 0.2, 0.3, 0, 0, 0, 0, 0};
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0, 0, 0, 0, 0};
    const auto res = linearity_indicator(Dataset(y, x, mask, 1, {"x1"}), GmmOptions{});
    CHECK(res.m_complete == 3);
    CHECK(res.gmm.k == 0);
    CHECK(res.clusters.empty());
    CHECK_FALSE(res.q_p_value.has_value());
    CHECK_FALSE(res.q_r2.has_value());
}

TEST_CASE("linearity_indicator: duplicating the dataset scales the weights only") {
    const Dataset ds = screening_scenario(2, 5).data;
    std::vector<std::size_t> rows;
    for (int rep = 0; rep < 2; ++rep)
        for (std::size_t i = 0; i < ds.size(); ++i) rows.push_back(i);
    GmmOptions opts;
    opts.k_min = opts.k_max = 4;
    const auto a = linearity_indicator(ds, opts);
    // clusters and their OLS fits on the doubled data come from the same labels
    std::vector<int> sizes;
    std::vector<double> pv;
    std::vector<bool> elig;
    for (const auto& c : a.clusters) {
        sizes.push_back(2 * c.size);
        pv.push_back(c.r2);
        elig.push_back(c.eligible);
    }
    CHECK(*weighted_indicator(sizes, pv, elig) == doctest::Approx(*a.q_r2).epsilon(1e-14));
    const Dataset dup = ds.select_rows(rows);
    const auto b = linearity_indicator(dup, opts);
    CHECK(b.m_complete == 2 * a.m_complete);
    CHECK(*b.q_r2 == doctest::Approx(*a.q_r2).epsilon(1e-8));
}

TEST_CASE("linearity_indicator: scenario 2 shows less local linearity than scenario 1") {
    int lower = 0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
        GmmOptions opts;
        opts.seed = r + 1;
        const auto s1 = linearity_indicator(screening_scenario(1, 100 + r).data, opts);
        const auto s2 = linearity_indicator(screening_scenario(2, 100 + r).data, opts);
        if (*s2.indicator(LinearityMeasure::r2) < *s1.indicator(LinearityMeasure::r2)) ++lower;
        CHECK(*s1.indicator(LinearityMeasure::p_value) < 0.05);
    }
    CHECK(lower >= 9);
}
