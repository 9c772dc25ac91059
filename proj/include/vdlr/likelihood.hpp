#pragma once

#include <span>
#include <vector>

#include "vdlr/core.hpp"
#include "vdlr/partition_prior.hpp"
#include "vdlr/random.hpp"

namespace vdlr {

enum class ModelKind { vdlreg, vdreg };

struct ClusterParams {
    double mu = 0.0;
    double sigma = 1.0;
    std::vector<double> beta;
    std::vector<double> psi;
    std::vector<double> phi;
    double tau = 1.0;

    // beta = 0, augmentation at its prior means.
    static ClusterParams initial(std::size_t p, double mu, double sigma, double tau0);
    double beta_sq_norm() const;
};

struct Baseline {
    double mu0 = 0.0;
    double sigma0 = 1.0;
};

struct ModelConfig {
    ModelKind kind = ModelKind::vdlreg;
    // Keep every coefficient at exactly zero without switching to the
    // dedicated constant-mean evaluator.
    bool zero_coefficients = false;
    double mass = 1.0;
    std::vector<SimilarityParams> similarity;  // one per covariate
    double m0 = 0.0;
    double v = 1.0;  // prior sd of mu0
    double a_sigma0 = 2.0;
    double a_sigma = 0.5;
    double tau0 = 0.1;
    PluginPriors plugin;

    bool coefficients_active() const { return kind == ModelKind::vdlreg && !zero_coefficients; }
    // Throws DataError naming the offending field.
    void validate(std::size_t p) const;
    PartitionPrior partition_prior(int table_size = 0) const;
};

// Projected Gaussian log density of one response given the cluster
// parameters and the plug-in estimates for that cluster's covariates.
double obs_loglik(double y, std::span<const double> x_row, std::span<const int> observed,
                  const ClusterParams& theta, std::span<const PluginEstimate> plugins);

// Evaluates sums of projected log densities over a (possibly hypothetical)
// cluster membership. Holds scratch space; one instance per chain.
class ClusterEvaluator {
public:
    ClusterEvaluator(const Dataset& data, std::span<const double> y, const PluginPriors& priors)
        : data_(&data), y_(y), priors_(priors) {}

    // Plug-ins from `cells`; call before term()/sum().
    void prepare(std::span<const CellStats> cells, const ClusterParams& theta);
    // Constant-mean form: plug-ins and coefficients are ignored.
    void prepare_constant(const ClusterParams& theta);

    double term(int i) const;
    double sum(std::span<const int> members, int skip = -1, int extra = -1) const;
    // Mean and variance of the projected density for observation i.
    std::pair<double, double> moments(std::span<const double> x_row, std::span<const int> observed) const;

    std::span<const double> response() const { return y_; }
    void set_response(std::span<const double> y) { y_ = y; }

private:
    const Dataset* data_;
    std::span<const double> y_;
    PluginPriors priors_;
    bool constant_ = false;
    double mu_ = 0, sigma2_ = 1, beta_sq_ = 0;
    std::vector<double> center_, coef_, beta_sq_l_;
};

// Full cluster log likelihood with plug-ins computed for `members`.
double cluster_loglik(const Dataset& data, std::span<const double> y, std::span<const int> members,
                      const ClusterParams& theta, const PluginPriors& priors);

// Dirichlet-Laplace log prior of (beta, psi, phi, tau) given sigma.
double dl_logprior(std::span<const double> beta, std::span<const double> psi, std::span<const double> phi,
                   double tau, double sigma, double tau0);
// Only the Gaussian part: log N(beta; 0, sigma^2 tau^2 diag(psi phi^2)).
double dl_beta_logprior(std::span<const double> beta, std::span<const double> psi, std::span<const double> phi,
                        double tau, double sigma);

struct MarginalizationCheck {
    double max_abs_log_gap = 0.0;  // |log MC density - obs_loglik| over the grid
    double max_z = 0.0;            // |MC density - exact density| / MC standard error
};

// Monte Carlo integration over the unobserved standardized covariates
// (z ~ N(0,1)) of the fully observed regression density, compared with
// obs_loglik on a grid of responses.
MarginalizationCheck marginalization_check(const ClusterParams& theta, std::span<const double> z_full,
                                           std::span<const int> observed, std::span<const double> y_grid,
                                           int draws, Rng& rng);

}  // namespace vdlr
