#include "vdlr/simgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vdlr/errors.hpp"
#include "vdlr/random.hpp"

namespace vdlr {

namespace {

std::vector<std::string> default_names(std::size_t p) {
    std::vector<std::string> names(p);
    for (std::size_t l = 0; l < p; ++l) names[l] = "x" + std::to_string(l + 1);
    return names;
}

double logistic(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

// Draws a column mask from per-entry missing probabilities. A column left
// with no observed entry is redrawn once; a second failure is an error.
void draw_column(Rng& rng, const std::vector<double>& prob, std::vector<std::uint8_t>& mask,
                 const std::vector<std::uint8_t>& base, std::size_t l, std::size_t p) {
    const std::size_t m = prob.size();
    for (int attempt = 0; attempt < 2; ++attempt) {
        bool any = false;
        for (std::size_t i = 0; i < m; ++i) {
            const bool miss = rng.uniform() < prob[i];
            mask[i * p + l] = base[i * p + l] && !miss;
            any = any || mask[i * p + l];
        }
        if (any) return;
    }
    throw DataError("amputation left covariate column " + std::to_string(l + 1) + " with no observed entries");
}

}  // namespace

double friedman_mean(std::span<const double> x) {
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] +
           5.0 * x[4];
}

Dataset friedman(std::size_t m, bool heteroscedastic, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("friedman: m must be positive");
    constexpr std::size_t p = 10;
    Rng rng(seed);
    std::vector<double> x(m * p), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::span<double> row(x.data() + i * p, p);
        for (auto& v : row) v = rng.uniform();
        const double sd = heteroscedastic ? std::exp(0.5 * row[0]) : 1.0;
        y[i] = friedman_mean(row) + sd * rng.normal();
    }
    return Dataset(std::move(y), std::move(x), std::vector<std::uint8_t>(m * p, 1), p, default_names(p));
}

Dataset ampute_mcar(const Dataset& ds, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("MCAR rate must lie in [0, 1)");
    const std::size_t m = ds.size(), p = ds.num_covariates();
    if (rate == 0.0) return ds;
    Rng rng(seed, 0x4d434152ULL);
    std::vector<std::uint8_t> mask(ds.mask());
    const std::vector<double> prob(m, rate);
    for (std::size_t l = 0; l < p; ++l) draw_column(rng, prob, mask, ds.mask(), l, p);
    return ds.with_mask(std::move(mask));
}

double calibrate_mnar_intercept(std::span<const double> z, double rate, double steepness) {
    if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("MNAR rate must lie in (0, 1)");
    if (z.empty()) throw std::invalid_argument("MNAR calibration needs observed values");
    auto avg = [&](double a) {
        double s = 0.0;
        for (double v : z) s += logistic(a + steepness * v);
        return s / static_cast<double>(z.size());
    };
    double lo = -50.0, hi = 50.0;
    if (!(avg(lo) < rate && avg(hi) > rate))
        throw NumericalError("MNAR intercept calibration failed; steepness too extreme for the target rate");
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (avg(mid) < rate)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Dataset ampute_mnar(const Dataset& ds, double rate, double steepness, std::uint64_t seed) {
    const std::size_t m = ds.size(), p = ds.num_covariates();
    const Scaling sc = compute_scaling(ds);
    Rng rng(seed, 0x4d4e4152ULL);
    std::vector<std::uint8_t> mask(ds.mask());
    for (std::size_t l = 0; l < p; ++l) {
        std::vector<double> z;
        std::vector<double> zi(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (!ds.observed(i, l)) continue;
            zi[i] = sc.covariates[l].forward(ds.row(i)[l]);
            z.push_back(zi[i]);
        }
        const double alpha = calibrate_mnar_intercept(z, rate, steepness);
        std::vector<double> prob(m);
        for (std::size_t i = 0; i < m; ++i) prob[i] = logistic(alpha + steepness * zi[i]);
        draw_column(rng, prob, mask, ds.mask(), l, p);
    }
    return ds.with_mask(std::move(mask));
}

BenchKind parse_bench_kind(const std::string& s) {
    if (s == "step") return BenchKind::step;
    if (s == "linear") return BenchKind::linear;
    throw std::invalid_argument("unknown benchmark data kind '" + s + "' (expected step or linear)");
}

LabeledData bench_data(BenchKind kind, std::size_t m, std::size_t p, std::uint64_t seed, double slope) {
    if (m == 0 || m % 4 != 0) throw std::invalid_argument("bench_data: m must be a positive multiple of 4");
    if (p == 0) throw std::invalid_argument("bench_data: p must be positive");
    static constexpr double kCenter[4] = {-3.0, -1.0, 1.0, 3.0};
    static constexpr double kLevel[4] = {-3.0, -1.0, 1.0, 3.0};
    Rng rng(seed);
    LabeledData out;
    std::vector<double> x(m * p), y(m);
    out.labels.resize(m);
    const std::size_t per = m / 4;
    const std::size_t n_slope = std::min<std::size_t>(2, p);
    for (std::size_t i = 0; i < m; ++i) {
        const int c = static_cast<int>(i / per);
        out.labels[i] = c;
        double mean = kLevel[c];
        for (std::size_t l = 0; l < p; ++l) {
            const double v = rng.normal(kCenter[c], 1.0);
            x[i * p + l] = v;
            if (kind == BenchKind::linear && l < n_slope) {
                // alternate signs across clusters and covariates
                const double s = ((c + static_cast<int>(l)) % 2 == 0 ? 1.0 : -1.0) * slope;
                mean += s * (v - kCenter[c]);
            }
        }
        y[i] = mean + rng.normal();
    }
    Dataset full(std::move(y), std::move(x), std::vector<std::uint8_t>(m * p, 1), p, default_names(p));
    out.data = ampute_mcar(full, 0.2, seed);
    return out;
}

LabeledData screening_scenario(int scenario, std::uint64_t seed) {
    if (scenario < 1 || scenario > 3) throw std::invalid_argument("screening scenario must be 1, 2 or 3");
    constexpr std::size_t n = 200, p = 3;
    Rng rng(seed);
    LabeledData out;
    std::vector<double> x(n * p), y(n);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        x[i * p + 0] = x1;
        x[i * p + 1] = rng.uniform(-3.0, 3.0);
        x[i * p + 2] = rng.uniform(0.0, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = x[i * p], x2 = x[i * p + 1], x3 = x[i * p + 2];
        // x1 = 2 belongs to the last cluster
        const int c = x1 < -1.0 ? 0 : x1 < 0.0 ? 1 : x1 < 1.0 ? 2 : 3;
        out.labels[i] = c;
        double mean = 0.0, sd = 1.0;
        switch (scenario) {
            case 1: {
                static constexpr double a[4] = {1, 2, -1, -2}, b[4] = {10, 10, -20, 20}, g[4] = {0.5, -1, 2, -2},
                                        s[4] = {10, 6, 10, 8};
                mean = a[c] + b[c] * x1 * x1 + g[c] * x2;
                sd = s[c];
                break;
            }
            case 2: {
                static constexpr double mu[4] = {20, -20, 30, -30}, s[4] = {10, 6, 10, 8};
                mean = mu[c];
                sd = s[c];
                break;
            }
            default: {
                static constexpr double a[4] = {1, 2, -1, -2}, b[4] = {10, 10, -20, 20}, g[4] = {0.5, -1, 2, -2},
                                        s[4] = {10, 8, 10, 8};
                mean = a[c] + b[c] * x2 * x2 + g[c] * x3;
                sd = s[c];
                break;
            }
        }
        y[i] = mean + sd * rng.normal();
    }
    out.data = Dataset(std::move(y), std::move(x), std::vector<std::uint8_t>(n * p, 1), p, default_names(p));
    return out;
}

LabeledData illustration_data(std::uint64_t seed) {
    constexpr std::size_t m = 500, p = 2;
    static constexpr double kMean[3][2] = {{0.0, 0.0}, {-3.0, -1.5}, {1.0, 3.0}};
    static constexpr double kMu[3] = {1.5, 2.5, -5.0};
    static constexpr double kBeta[3][2] = {{-0.9, 2.0}, {-0.3, -1.0}, {0.7, 0.0}};
    static constexpr double kSigma[3] = {1.2, 0.5, 0.8};
    Rng rng(seed);
    LabeledData out;
    std::vector<double> x(m * p), y(m);
    out.labels.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const int c = static_cast<int>(i % 3);
        out.labels[i] = c;
        double mean = kMu[c];
        for (std::size_t l = 0; l < p; ++l) {
            const double z = rng.normal();
            x[i * p + l] = kMean[c][l] + z;
            mean += kBeta[c][l] * z;
        }
        y[i] = mean + kSigma[c] * rng.normal();
    }
    Dataset full(std::move(y), std::move(x), std::vector<std::uint8_t>(m * p, 1), p, default_names(p));
    out.data = ampute_mcar(full, 0.25, seed);
    return out;
}

}  // namespace vdlr
