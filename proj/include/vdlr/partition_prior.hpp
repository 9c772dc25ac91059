#pragma once

#include <span>
#include <string>
#include <vector>

#include "vdlr/core.hpp"

namespace vdlr {

// Dirichlet-process cohesion c(S | M) = M (|S| - 1)!.
double log_cohesion(int size, double mass);

enum class SimilarityFamily { nn, nnig, nnsichi2 };

SimilarityFamily parse_similarity_family(const std::string& name);
std::string to_string(SimilarityFamily f);

// Hyperparameters of one auxiliary similarity model, as named by the family.
//   nn:       x ~ N(t, kernel_var), t ~ N(mean, prior_var)
//   nnig:     x ~ N(t, s2), t ~ N(mean, var_scale s2), s2 ~ IG(shape, scale)
//   nnsichi2: x ~ N(t, s2), t ~ N(mean, s2 / kappa), s2 ~ Scaled-Inv-chi2(nu, s0sq)
struct SimilarityParams {
    SimilarityFamily family = SimilarityFamily::nnsichi2;
    double mean = 0.0;
    double prior_var = 1.0;
    double kernel_var = 1.0;
    double var_scale = 1.0;
    double shape = 1.0;
    double scale = 1.0;
    double kappa = 0.1;
    double nu = 4.0;
    double s0sq = 0.04;

    static SimilarityParams nn(double mean, double prior_var, double kernel_var);
    static SimilarityParams nnig(double mean, double var_scale, double shape, double scale);
    static SimilarityParams nnsichi2(double mean, double kappa, double nu, double s0sq);

    // Throws DataError if a scale parameter is not positive.
    void validate() const;
};

// Closed-form log marginal of a set of values under one similarity model,
// evaluated from sufficient statistics. The empty set has log marginal 0.
class Similarity {
public:
    Similarity() : Similarity(SimilarityParams{}) {}
    explicit Similarity(const SimilarityParams& params, int table_size = 0);

    const SimilarityParams& params() const { return params_; }
    double log_marginal(const CellStats& cell) const;
    double log_marginal(std::span<const double> values) const;
    // log marginal(cell + x) - log marginal(cell)
    double log_ratio_add(const CellStats& cell, double x) const {
        return log_marginal(cell.plus(x)) - log_marginal(cell);
    }

private:
    double lgamma_shape_plus_half(int n) const;

    SimilarityParams params_;
    bool gaussian_ = false;
    // normal-inverse-gamma form (nnig and nnsichi2)
    double m0_ = 0, kappa0_ = 1, a0_ = 1, b0_ = 1;
    double a0_log_b0_minus_lgamma_ = 0;
    // normal-normal form
    double s2_ = 1, v_ = 1;
    std::vector<double> lgamma_table_;
};

struct PartitionPrior {
    double mass = 1.0;
    // One similarity per covariate.
    std::vector<Similarity> similarity;

    static PartitionPrior shared(double mass, const SimilarityParams& params, std::size_t p, int table_size = 0);

    double log_cluster_weight(std::span<const CellStats> cells) const;
};

// Unnormalized log prior of a partition given the observed covariates.
double log_partition_prior(const PartitionState& state, const PartitionPrior& prior);

// Prior probability that two observations share a cluster. Missing entries
// are flagged by `observed` = false.
double co_cluster_probability(std::span<const double> x1, std::span<const bool> obs1,
                              std::span<const double> x2, std::span<const bool> obs2,
                              const PartitionPrior& prior);

}  // namespace vdlr
