#pragma once

#include <span>
#include <vector>

namespace vdlr {

// Mean squared prediction error.
double mspe(std::span<const double> y_true, std::span<const double> y_hat);

// -2 times the average over points of the posterior-mean log predictive
// density; loglik[i] holds the per-draw log densities of point i.
double predictive_deviance(const std::vector<std::vector<double>>& loglik);
// Same, from per-point posterior means that are already averaged.
double predictive_deviance_from_means(std::span<const double> mean_loglik);

// Kolmogorov-Smirnov distance between the empirical CDF of q and Uniform(0,1).
double ks_uniform(std::span<const double> q);

}  // namespace vdlr
