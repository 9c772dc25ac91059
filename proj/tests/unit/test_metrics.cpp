#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "vdlr/metrics.hpp"

using namespace vdlr;

TEST_CASE("mspe: worked values and a two-pass oracle") {
    const std::vector<double> y = {0.0, 0.0}, yh = {1.0, -1.0};
    CHECK(mspe(y, yh) == 1.0);
    CHECK(mspe(y, y) == 0.0);

    std::mt19937_64 g(3);
    std::normal_distribution<double> n;
    std::vector<double> a(1000), b(1000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = n(g);
        b[i] = a[i] + 0.3 * n(g);
    }
    std::vector<double> sq(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sq[i] = std::pow(a[i] - b[i], 2);
    double s = 0.0;
    for (double v : sq) s += v;
    CHECK(std::abs(mspe(a, b) - s / a.size()) < 1e-12);

    std::vector<std::size_t> perm(a.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), g);
    std::vector<double> pa, pb;
    for (auto i : perm) {
        pa.push_back(a[i]);
        pb.push_back(b[i]);
    }
    CHECK(std::abs(mspe(pa, pb) - mspe(a, b)) < 1e-14);
    CHECK(mspe(a, b) >= 0.0);
}

TEST_CASE("mspe: bad input") {
    const std::vector<double> a = {1.0, 2.0}, b = {1.0};
    CHECK_THROWS_AS(mspe(a, b), std::invalid_argument);
    CHECK_THROWS_AS(mspe(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("predictive_deviance: worked values and invariances") {
    const double l0 = -0.5 * std::log(2.0 * M_PI);
    CHECK(predictive_deviance({{l0, l0, l0}}) == doctest::Approx(1.8378770664).epsilon(1e-10));
    CHECK(predictive_deviance({{l0, l0}, {l0, l0}}) == doctest::Approx(1.8378770664).epsilon(1e-10));

    const std::vector<std::vector<double>> ll = {{-1.0, -2.0, -0.5}, {-3.0, -0.1, -0.2}};
    auto permuted = ll;
    std::reverse(permuted[0].begin(), permuted[0].end());
    std::swap(permuted[1][0], permuted[1][2]);
    CHECK(predictive_deviance(permuted) == predictive_deviance(ll));
    const double means[] = {-3.5 / 3.0, -3.3 / 3.0};
    CHECK(predictive_deviance_from_means(means) == doctest::Approx(predictive_deviance(ll)).epsilon(1e-14));
    CHECK(predictive_deviance(ll) == doctest::Approx(-2.0 * (-3.5 / 3.0 - 3.3 / 3.0) / 2.0).epsilon(1e-14));

    CHECK_THROWS_AS(predictive_deviance({}), std::invalid_argument);
    CHECK_THROWS_AS(predictive_deviance({{}}), std::invalid_argument);
}

TEST_CASE("ks_uniform: worked values") {
    const double half[] = {0.5};
    CHECK(ks_uniform(half) == 0.5);
    for (int n : {1, 7, 100}) {
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i) q[i] = (i + 0.5) / n;
        CHECK(ks_uniform(q) == doctest::Approx(0.5 / n).epsilon(1e-12));
    }
    const std::vector<double> zeros(10, 0.0);
    CHECK(ks_uniform(zeros) == 1.0);
}

TEST_CASE("ks_uniform: range, permutation invariance, bad input") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u;
    std::vector<double> q(257);
    for (auto& v : q) v = u(g);
    const double d = ks_uniform(q);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    std::shuffle(q.begin(), q.end(), g);
    CHECK(ks_uniform(q) == d);

    // naive oracle: sup over a fine grid of |ECDF - u|, including left limits at the jumps
    std::vector<double> s = q;
    std::sort(s.begin(), s.end());
    double naive = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        naive = std::max(naive, std::abs((i + 1.0) / s.size() - s[i]));
        naive = std::max(naive, std::abs(s[i] - static_cast<double>(i) / s.size()));
    }
    CHECK(d == doctest::Approx(naive).epsilon(1e-15));

    const double bad[] = {0.2, 1.5};
    CHECK_THROWS_AS(ks_uniform(bad), std::invalid_argument);
    const double nan[] = {NAN};
    CHECK_THROWS_AS(ks_uniform(nan), std::invalid_argument);
    CHECK_THROWS_AS(ks_uniform(std::vector<double>{}), std::invalid_argument);
}
