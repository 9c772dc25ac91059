#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vdlr/core.hpp"

namespace vdlr {

// Rows with every covariate observed; throws DataError if none remain.
Dataset complete_cases(const Dataset& ds);

struct GmmComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct GmmModel {
    int k = 0;
    std::vector<GmmComponent> components;
    double loglik = 0.0;
    double bic = 0.0;  // -2 loglik + npar log n (smaller is better)
    bool converged = true;
    std::vector<int> labels;          // hard assignment per row
    std::vector<double> loglik_trace;  // per EM iteration of the chosen fit
};

struct GmmOptions {
    int k_min = 1;
    int k_max = 9;
    int restarts = 10;
    int max_iter = 500;
    double tol = 1e-8;
    std::uint64_t seed = 1;
};

// EM for one k from a seeded start; exposed for testing.
GmmModel gmm_fit(const Eigen::MatrixXd& data, int k, int max_iter, double tol, std::uint64_t seed);
// Best-BIC full-covariance mixture over k in [k_min, k_max].
GmmModel gmm_fit_bic(const Eigen::MatrixXd& data, const GmmOptions& opts);

struct ClusterFit {
    int size = 0;
    bool eligible = false;
    Eigen::VectorXd coefficients;  // intercept first
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double p_value = 1.0;
};

struct OlsFit {
    Eigen::VectorXd coefficients;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double p_value = 1.0;
};

// OLS of y on [1, X] with the global F test of the slopes.
OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

enum class LinearityMeasure { p_value, r2, adj_r2 };

struct ScreeningResult {
    int m_complete = 0;
    int p = 0;
    GmmModel gmm;
    std::vector<ClusterFit> clusters;
    // std::nullopt when no cluster is large enough ("indeterminate")
    std::optional<double> q_p_value;
    std::optional<double> q_r2;
    std::optional<double> q_adj_r2;

    std::optional<double> indicator(LinearityMeasure m) const;
};

// Size-weighted average of per-cluster measures over eligible clusters.
std::optional<double> weighted_indicator(const std::vector<int>& sizes, const std::vector<double>& values,
                                         const std::vector<bool>& eligible);

ScreeningResult linearity_indicator(const Dataset& ds, const GmmOptions& opts);

}  // namespace vdlr
