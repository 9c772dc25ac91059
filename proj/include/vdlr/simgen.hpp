#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vdlr/core.hpp"

namespace vdlr {

// f(x) = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5
double friedman_mean(std::span<const double> x);

// p = 10 covariates iid U(0,1); noise N(0,1) or N(0, exp(x1)).
Dataset friedman(std::size_t m, bool heteroscedastic, std::uint64_t seed);

// Each covariate entry missing independently with probability `rate`.
Dataset ampute_mcar(const Dataset& ds, double rate, std::uint64_t seed);

// Entry (i, l) missing with probability logistic(alpha_l + steepness * z_il),
// z the column-standardized value and alpha_l calibrated so the column's
// expected missing fraction equals `rate`.
Dataset ampute_mnar(const Dataset& ds, double rate, double steepness, std::uint64_t seed);

// Solves mean_i logistic(alpha + steepness * z_i) = rate for alpha.
double calibrate_mnar_intercept(std::span<const double> z, double rate, double steepness);

enum class BenchKind { step, linear };
BenchKind parse_bench_kind(const std::string& s);

struct LabeledData {
    Dataset data;
    std::vector<int> labels;  // generating cluster per row
};

// Four equal clusters, 20% MCAR. `slope` scales the linear kind's +-1 slopes
// (slope 0 gives step data).
LabeledData bench_data(BenchKind kind, std::size_t m, std::size_t p, std::uint64_t seed, double slope = 1.0);

// Columns (x1, x2, x3); n = 200 with four x1-defined clusters of 50.
LabeledData screening_scenario(int scenario, std::uint64_t seed);

// m = 500, two covariates, three clusters, 25% MCAR.
LabeledData illustration_data(std::uint64_t seed);

}  // namespace vdlr
