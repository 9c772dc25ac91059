#pragma once

// Independent reference computations for the test suites: direct numerical
// integration of similarity integrals, brute-force set-partition enumeration,
// and a few Monte Carlo summaries. Nothing here calls the closed forms under
// test.

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "vdlr/partition_prior.hpp"

namespace oracle {

inline double log_normal_pdf(double x, double mean, double var) {
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + (x - mean) * (x - mean) / var);
}

// Depth is capped: a tolerance below roundoff would otherwise bisect to the
// full depth.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-11,
                        unsigned max_depth = 12) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, tol);
}

// log of the integral over the latent mean t, for a Gaussian kernel with
// known variance s2, of prod N(x_i; t, s2) N(t; m, s2 / kappa).
// Integrated numerically over a window centred on the integrand's peak.
inline double log_integral_over_mean(std::span<const double> xs, double s2, double m, double kappa) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double centre = (sum + kappa * m) / (n + kappa);
    const double width = std::sqrt(s2 / (n + kappa));
    auto logf = [&](double t) {
        double v = log_normal_pdf(t, m, s2 / kappa);
        for (double x : xs) v += log_normal_pdf(x, t, s2);
        return v;
    };
    const double peak = logf(centre);
    // inner tolerance well below every check yet loose enough to keep the
    // nested quadrature cheap
    const double I = integrate([&](double t) { return std::exp(logf(t) - peak); }, centre - 14.0 * width,
                               centre + 14.0 * width, 1e-10, 8);
    return peak + std::log(I);
}

// NN family: x ~ N(t, kernel_var), t ~ N(mean, prior_var).
inline double log_similarity_nn(std::span<const double> xs, double mean, double prior_var, double kernel_var) {
    if (xs.empty()) return 0.0;
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double prec = n / kernel_var + 1.0 / prior_var;
    const double centre = (sum / kernel_var + mean / prior_var) / prec;
    const double width = std::sqrt(1.0 / prec);
    auto logf = [&](double t) {
        double v = log_normal_pdf(t, mean, prior_var);
        for (double x : xs) v += log_normal_pdf(x, t, kernel_var);
        return v;
    };
    const double peak = logf(centre);
    const double I = integrate([&](double t) { return std::exp(logf(t) - peak); }, centre - 14.0 * width,
                               centre + 14.0 * width);
    return peak + std::log(I);
}

// Normal / inverse-gamma style families: x ~ N(t, s2), t ~ N(mean, s2 / kappa),
// s2 with log density `log_prior_s2`. Outer integral over u = log s2.
inline double log_similarity_nig(std::span<const double> xs, double mean, double kappa,
                                 const std::function<double(double)>& log_prior_s2) {
    if (xs.empty()) return 0.0;
    auto logg = [&](double u) {
        const double s2 = std::exp(u);
        return log_integral_over_mean(xs, s2, mean, kappa) + log_prior_s2(s2) + u;
    };
    // locate the peak on a coarse grid, then integrate around it
    double best_u = 0.0, best = -INFINITY;
    for (double u = -30.0; u <= 15.0; u += 0.05) {
        const double g = logg(u);
        if (g > best) {
            best = g;
            best_u = u;
        }
    }
    const double I = integrate([&](double u) { return std::exp(logg(u) - best); }, best_u - 40.0, best_u + 40.0,
                               1e-11);
    return best + std::log(I);
}

inline double log_inv_gamma_pdf(double s2, double shape, double scale) {
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(s2) - scale / s2;
}

// Scaled-inverse-chi-square(nu, s0sq) written out directly.
inline double log_scaled_inv_chi2_pdf(double s2, double nu, double s0sq) {
    const double h = 0.5 * nu;
    return h * std::log(h * s0sq) - std::lgamma(h) - (h + 1.0) * std::log(s2) - h * s0sq / s2;
}

// Quadrature log similarity for any family in SimilarityParams.
inline double log_similarity(std::span<const double> xs, const vdlr::SimilarityParams& p) {
    switch (p.family) {
        case vdlr::SimilarityFamily::nn: return log_similarity_nn(xs, p.mean, p.prior_var, p.kernel_var);
        case vdlr::SimilarityFamily::nnig:
            return log_similarity_nig(xs, p.mean, 1.0 / p.var_scale,
                                      [&](double s2) { return log_inv_gamma_pdf(s2, p.shape, p.scale); });
        case vdlr::SimilarityFamily::nnsichi2:
            return log_similarity_nig(xs, p.mean, p.kappa,
                                      [&](double s2) { return log_scaled_inv_chi2_pdf(s2, p.nu, p.s0sq); });
    }
    return NAN;
}

// All set partitions of {0..n-1} as restricted-growth label vectors.
inline std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(n, 0);
    std::function<void(int, int)> rec = [&](int i, int k) {
        if (i == n) {
            out.push_back(a);
            return;
        }
        for (int c = 0; c <= k; ++c) {
            a[i] = c;
            rec(i + 1, std::max(k, c + 1));
        }
    };
    if (n == 0) return {{}};
    rec(0, 0);
    return out;
}

// Canonical (first-appearance) relabelling so partitions can be compared.
inline std::vector<int> canonical(std::span<const int> labels) {
    std::vector<int> map, out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c >= static_cast<int>(map.size())) map.resize(c + 1, -1);
        if (map[c] < 0) map[c] = *std::max_element(map.begin(), map.end()) + 1;
        out[i] = map[c];
    }
    return out;
}

// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Mean with a batch-means standard error (robust to autocorrelation).
inline MeanSe batch_means(std::span<const double> xs, int batches = 50) {
    const std::size_t n = xs.size();
    const std::size_t b = n / batches;
    MeanSe r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(n);
    double ss = 0.0;
    for (int k = 0; k < batches; ++k) {
        double m = 0.0;
        for (std::size_t i = k * b; i < (k + 1) * b; ++i) m += xs[i];
        m /= static_cast<double>(b);
        ss += (m - r.mean) * (m - r.mean);
    }
    r.se = std::sqrt(ss / (batches - 1) / batches);
    return r;
}

// Plain iid mean and standard error.
inline MeanSe iid_mean(std::span<const double> xs) {
    MeanSe r;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) r.mean += x;
    r.mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
    return r;
}

}  // namespace oracle
