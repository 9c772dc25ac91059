#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "oracles.hpp"
#include "vdlr/numerics.hpp"
#include "vdlr/random.hpp"

using namespace vdlr;

namespace {

// E[X] and E[X^2] of GIG(lambda, a, b) from modified Bessel functions.
std::pair<double, double> gig_moments(double lambda, double a, double b) {
    const double w = std::sqrt(a * b);
    const double r = std::sqrt(b / a);
    const double k0 = boost::math::cyl_bessel_k(lambda, w);
    return {r * boost::math::cyl_bessel_k(lambda + 1.0, w) / k0, r * r * boost::math::cyl_bessel_k(lambda + 2.0, w) / k0};
}

}  // namespace

TEST_CASE("Rng: uniform stays in the open unit interval and streams are reproducible") {
    Rng a(5, 3), b(5, 3), c(5, 4);
    bool differs = false;
    for (int i = 0; i < 100000; ++i) {
        const double u = a.uniform();
        CHECK_UNARY(u > 0.0);
        CHECK_UNARY(u < 1.0);
        CHECK(u == b.uniform());
        if (u != c.uniform()) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("Rng: permutation and categorical") {
    Rng r(1);
    auto perm = r.permutation(50);
    std::sort(perm.begin(), perm.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(perm[i] == i);

    const double lw[] = {std::log(1.0), std::log(3.0), kNegInf};
    int counts[3] = {0, 0, 0};
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++counts[r.categorical_log(lw)];
    CHECK(counts[2] == 0);
    const double p1 = counts[1] / static_cast<double>(n);
    CHECK(std::abs(p1 - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / n));
    CHECK_THROWS(r.categorical_log(std::span<const double>{}));
}

TEST_CASE("gig_sample: means and second moments match Bessel-function values") {
    struct Case {
        double lambda, a, b;
    };
    const Case cases[] = {{-0.5, 1.0, 1.0}, {2.5, 2.0, 3.0}, {-3.0, 0.01, 0.02}, {0.3, 0.5, 0.1},
                          {-4.0, 10.0, 0.5}, {-0.8, 1.0, 1e-3}, {0.0, 4.0, 4.0}, {1.0, 0.2, 30.0}};
    Rng rng(17);
    const int n = 1000000;
    for (const auto& c : cases) {
        std::vector<double> x(n), x2(n);
        for (int i = 0; i < n; ++i) {
            x[i] = gig_sample(rng, c.lambda, c.a, c.b);
            x2[i] = x[i] * x[i];
        }
        const auto [m1, m2] = gig_moments(c.lambda, c.a, c.b);
        const auto s1 = oracle::iid_mean(x);
        const auto s2 = oracle::iid_mean(x2);
        CAPTURE(c.lambda);
        CAPTURE(c.a);
        CAPTURE(c.b);
        CHECK(std::abs(s1.mean - m1) < 3.0 * s1.se);
        CHECK(std::abs(s2.mean - m2) < 3.0 * s2.se);
    }
}

TEST_CASE("gig_sample: half-integer orders agree with inverse-Gaussian constructions") {
    Rng rng(23);
    const int n = 1000000;
    const double a = 1.7, b = 0.6;
    // GIG(-1/2, a, b) is IG(sqrt(b/a), b); GIG(1/2, a, b) is its reciprocal with a and b swapped.
    std::vector<double> g_neg(n), ig(n), g_pos(n), rig(n);
    for (int i = 0; i < n; ++i) {
        g_neg[i] = gig_sample(rng, -0.5, a, b);
        ig[i] = invgauss_sample(rng, std::sqrt(b / a), b);
        g_pos[i] = gig_sample(rng, 0.5, a, b);
        rig[i] = 1.0 / invgauss_sample(rng, std::sqrt(a / b), a);
    }
    auto close = [](std::span<const double> u, std::span<const double> v) {
        const auto su = oracle::iid_mean(u), sv = oracle::iid_mean(v);
        return std::abs(su.mean - sv.mean) / std::hypot(su.se, sv.se);
    };
    CHECK(close(g_neg, ig) < 3.0);
    CHECK(close(g_pos, rig) < 3.0);
    std::vector<double> inv_a(n), inv_b(n);
    for (int i = 0; i < n; ++i) {
        inv_a[i] = 1.0 / g_pos[i];
        inv_b[i] = 1.0 / rig[i];
    }
    CHECK(close(inv_a, inv_b) < 3.0);
}

TEST_CASE("gig_sample / invgauss_sample: invalid parameters") {
    Rng rng(1);
    CHECK_THROWS_AS(gig_sample(rng, 0.5, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gig_sample(rng, 0.5, 1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(invgauss_sample(rng, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(invgauss_sample(rng, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("invgauss_sample: mean and variance") {
    Rng rng(29);
    const int n = 1000000;
    const double mu = 0.8, lam = 2.5;
    std::vector<double> x(n), x2(n);
    for (int i = 0; i < n; ++i) {
        x[i] = invgauss_sample(rng, mu, lam);
        x2[i] = x[i] * x[i];
    }
    const auto s1 = oracle::iid_mean(x), s2 = oracle::iid_mean(x2);
    CHECK(std::abs(s1.mean - mu) < 3.0 * s1.se);
    CHECK(std::abs(s2.mean - (mu * mu * mu / lam + mu * mu)) < 3.0 * s2.se);
}

TEST_CASE("dirichlet_symmetric: simplex, floor and mean") {
    Rng rng(31);
    const std::size_t p = 4;
    std::vector<double> first(100000);
    for (std::size_t r = 0; r < first.size(); ++r) {
        const auto d = dirichlet_symmetric(rng, p, 0.25, 1e-12);
        double s = 0.0;
        for (double v : d) {
            CHECK_UNARY(v >= 1e-12 * 0.999);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        first[r] = d[0];
    }
    const auto m = oracle::iid_mean(first);
    CHECK(std::abs(m.mean - 0.25) < 3.0 * m.se);
    const auto one = dirichlet_symmetric(rng, 1, 1.0);
    CHECK(one.size() == 1);
    CHECK(one[0] == 1.0);
}

TEST_CASE("slice_sample: standard normal target") {
    Rng rng(37);
    const int n = 100000;
    std::vector<double> xs(n);
    double x = 0.0;
    auto target = [](double v) { return -0.5 * v * v; };
    for (int i = 0; i < n; ++i) xs[i] = x = slice_sample(rng, x, target, -INFINITY, INFINITY, SliceConfig{});
    CHECK(oracle::ks_distance(xs, [](double v) { return normal_cdf(v, 0.0, 1.0); }) < 0.02);
}

TEST_CASE("slice_sample: flat target on a bounded interval") {
    Rng rng(41);
    const int n = 100000;
    const double hi = 2.5;
    std::vector<double> xs(n);
    double x = 1.0;
    for (int i = 0; i < n; ++i) {
        x = slice_sample(rng, x, [](double) { return 0.0; }, 0.0, hi, SliceConfig{});
        CHECK_UNARY(x > 0.0);
        CHECK_UNARY(x < hi);
        xs[i] = x;
    }
    const auto m = oracle::batch_means(xs);
    CHECK(std::abs(m.mean - hi / 2.0) < 3.0 * m.se);
    CHECK(oracle::ks_distance(xs, [&](double v) { return v / hi; }) < 0.02);
}

TEST_CASE("slice_sample: points outside the support are never returned") {
    Rng rng(43);
    double x = 0.5;
    // support (0, 1) declared via -inf rather than bounds
    auto target = [](double v) { return (v > 0.0 && v < 1.0) ? std::log(v) : kNegInf; };
    for (int i = 0; i < 20000; ++i) {
        x = slice_sample(rng, x, target, -INFINITY, INFINITY, SliceConfig{0.3, 10});
        CHECK_UNARY(x > 0.0);
        CHECK_UNARY(x < 1.0);
    }
}

TEST_CASE("elliptical_slice: zero-information likelihood reproduces the prior") {
    Rng rng(47);
    const int n = 100000;
    const double sd[] = {0.5, 2.0};
    std::vector<double> f = {0.0, 0.0};
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const auto r = elliptical_slice(rng, f, sd, [](std::span<const double>) { return 0.0; }, 0.0);
        CHECK(r.moved);
        a[i] = f[0];
        b[i] = f[1];
    }
    CHECK(oracle::ks_distance(a, [](double v) { return normal_cdf(v, 0.0, 0.5); }) < 0.02);
    CHECK(oracle::ks_distance(b, [](double v) { return normal_cdf(v, 0.0, 2.0); }) < 0.02);
}

TEST_CASE("elliptical_slice: Gaussian likelihood gives the conjugate posterior") {
    Rng rng(53);
    const int n = 100000;
    const double sd[] = {1.5};
    // likelihood N(y = 1; f, 0.5^2): posterior precision 1/2.25 + 4
    const double prec = 1.0 / 2.25 + 4.0;
    const double mean = 4.0 / prec;
    auto ll = [](std::span<const double> f) { return -0.5 * (f[0] - 1.0) * (f[0] - 1.0) / 0.25; };
    std::vector<double> f = {0.0}, xs(n);
    double cur = ll(f);
    for (int i = 0; i < n; ++i) {
        cur = elliptical_slice(rng, f, sd, ll, cur).loglik;
        xs[i] = f[0];
    }
    CHECK(oracle::ks_distance(xs, [&](double v) { return normal_cdf(v, mean, 1.0 / std::sqrt(prec)); }) < 0.02);
}
