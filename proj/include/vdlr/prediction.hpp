#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vdlr/core.hpp"
#include "vdlr/likelihood.hpp"
#include "vdlr/mcmc.hpp"
#include "vdlr/partition_prior.hpp"

namespace vdlr {

struct PredictiveMixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> vars;

    double mean() const;
    double cdf(double y) const;
    double log_density(double y) const;
};

// Allocation weights of a new observation over k existing clusters plus a
// new one (last entry). `cells` holds k x p cluster statistics.
std::vector<double> predictive_weights(std::span<const double> x_row, std::span<const int> observed,
                                       std::span<const int> sizes, std::span<const CellStats> cells,
                                       const PartitionPrior& prior);

// Mixture for one posterior state. Existing clusters use plug-ins from their
// training members; the new-cluster component uses `theta_new` with prior
// plug-ins.
PredictiveMixture predictive_mixture(std::span<const double> x_row, std::span<const int> observed,
                                     std::span<const int> sizes, std::span<const CellStats> cells,
                                     std::span<const ClusterParams> clusters, const ClusterParams& theta_new,
                                     const PartitionPrior& prior, const PluginPriors& plugin);

double predictive_mean(const PredictiveMixture& mix);

struct PointPrediction {
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> quantiles;
    std::optional<double> quantile_residual;
    // mean over posterior draws of the log predictive density at y
    std::optional<double> mean_loglik;
};

class Predictor {
public:
    // `train` must be on the same scale the chains were fitted on.
    Predictor(const Dataset& train, const ModelConfig& model, std::span<const PosteriorSamples> chains,
              std::uint64_t seed, bool include_query_in_plugins = false);

    std::size_t num_draws() const { return draws_.size(); }
    PredictiveMixture mixture(std::size_t draw, std::span<const double> x_row, std::span<const int> observed) const;

    // Posterior-averaged predictive summaries at one query point.
    PointPrediction predict(std::span<const double> x_row, std::span<const int> observed,
                            std::optional<double> y, std::span<const double> probs) const;
    double cdf(std::span<const double> x_row, std::span<const int> observed, double y) const;
    std::vector<double> log_density_per_draw(std::span<const double> x_row, std::span<const int> observed,
                                             double y) const;
    // Averaged density on a grid of responses.
    std::vector<double> density(std::span<const double> x_row, std::span<const int> observed,
                                std::span<const double> y_grid) const;
    // n_per_draw predictive draws for every retained posterior draw.
    std::vector<double> sample(std::span<const double> x_row, std::span<const int> observed, int n_per_draw,
                               Rng& rng) const;

private:
    struct State {
        std::vector<int> sizes;
        std::vector<CellStats> cells;
        std::vector<ClusterParams> clusters;
        ClusterParams theta_new;
    };
    std::vector<PredictiveMixture> mixtures(std::span<const double> x_row, std::span<const int> observed) const;

    ModelConfig model_;
    PartitionPrior prior_;
    std::size_t p_;
    bool include_query_;
    std::vector<State> draws_;
};

// Quantile of an equally weighted average of Gaussian mixtures, by bisection.
double mixture_quantile(std::span<const PredictiveMixture> mixes, double prob);

}  // namespace vdlr
