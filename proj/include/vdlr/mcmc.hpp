#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdlr/core.hpp"
#include "vdlr/likelihood.hpp"
#include "vdlr/partition_prior.hpp"
#include "vdlr/random.hpp"

namespace vdlr {

enum class InitKind { single, random };
// gig: exact blocked draws. slice: log-scale slice on each tau * phi_l, a
// cross-check of the GIG route.
enum class TauUpdate { gig, slice };
enum class AllocationKind { metropolis, gibbs };

struct McmcConfig {
    int n_iter = 1000;
    int n_burn = 0;
    int thin = 1;
    std::uint64_t seed = 1;
    int chains = 1;
    double p_type1 = 0.5;
    SliceConfig slice;
    int ess_max_shrink = 200;
    InitKind init = InitKind::single;
    int init_clusters = 4;  // for random init
    TauUpdate tau_update = TauUpdate::gig;
    // metropolis: the two-type Metropolis-Hastings move; gibbs: the full
    // conditional over all clusters plus one auxiliary new cluster.
    AllocationKind allocation = AllocationKind::metropolis;
    // false: only allocations are updated (cluster parameters and baseline frozen)
    bool update_params = true;
    bool keep_params = true;

    void validate() const;
    int num_kept() const { return n_iter > n_burn ? (n_iter - n_burn) / thin : 0; }
};

struct MoveCounts {
    long long proposed = 0;
    long long accepted = 0;
    double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct AcceptanceStats {
    MoveCounts join;      // singleton joins an existing cluster
    MoveCounts split;     // member leaves for a new singleton
    MoveCounts transfer;  // member moves between occupied clusters
    long long ess_calls = 0;
    long long ess_shrinks = 0;
    long long ess_stalls = 0;  // bracket not resolved within the limit
};

struct Draw {
    int iteration = 0;
    std::vector<int> labels;
    std::vector<ClusterParams> clusters;
    Baseline baseline;
    double logpost = 0.0;
};

struct PosteriorSamples {
    int chain = 0;
    std::vector<Draw> draws;
    // m x m counts of kept draws in which i and j share a cluster.
    std::vector<std::uint32_t> cocluster;
    std::size_t m = 0;
    AcceptanceStats acceptance;
    double seconds = 0.0;
};

class Sampler {
public:
    Sampler(const Dataset& data, const ModelConfig& model, const McmcConfig& mcmc, std::uint64_t chain = 0);

    Sampler(const Sampler&) = delete;
    Sampler& operator=(const Sampler&) = delete;

    // Replace the response being modelled (used by joint-distribution tests).
    void set_response(std::vector<double> y);
    std::span<const double> response() const { return y_; }

    // Replace the whole chain state; params.size() must equal the number of
    // distinct labels.
    void reset(std::span<const int> labels, std::vector<ClusterParams> params, const Baseline& baseline);

    // New clusters opened by the allocation move take these parameters
    // instead of a prior draw.
    void set_fixed_new_cluster(std::optional<ClusterParams> theta) { fixed_new_ = std::move(theta); }

    void scan();
    void update_allocations();
    void update_cluster(int j);
    void update_mu(int j);
    void update_sigma(int j);
    void update_beta(int j);
    void update_dl(int j);
    void update_baseline();

    // Draws a fresh response from the sampling model at the current state.
    std::vector<double> simulate_response();
    ClusterParams draw_prior_params();

    double log_posterior() const;
    double log_likelihood() const;

    const PartitionState& state() const { return state_; }
    const std::vector<ClusterParams>& params() const { return params_; }
    const Baseline& baseline() const { return baseline_; }
    const AcceptanceStats& acceptance() const { return acc_; }
    const ModelConfig& model() const { return model_; }
    Rng& rng() { return rng_; }

    // Verifies cached statistics against recomputation; throws on mismatch.
    void check_consistency(double tol = 1e-8) const;

private:
    struct MoveTerms {
        double term_i = 0.0;     // log density of i in its destination
        bool add_valid = false;  // add_terms_ holds the destination's new member terms
        bool rem_valid = false;  // rem_terms_ holds the source's new member terms
    };

    void refresh_caches();
    void refresh_cluster(int j);
    double delta_add(int h, int i, double* new_term_i);
    double delta_remove(int a, int i);
    double singleton_loglik(int i, const ClusterParams& theta);
    double log_omega_add(int h, int i) const;
    double log_omega_self(int a, int i) const;
    double singleton_similarity(int i) const;
    void commit_move(int i, int target, const MoveTerms& terms, const ClusterParams* new_theta);
    void alloc_metropolis(int i);
    void alloc_gibbs(int i);

    const Dataset& data_;
    ModelConfig model_;
    McmcConfig mcmc_;
    PartitionPrior prior_;
    Rng rng_;
    std::vector<double> y_;
    PartitionState state_;
    std::vector<ClusterParams> params_;
    Baseline baseline_;
    std::vector<double> loglik_;  // per observation, under its current cluster
    std::vector<double> logsim_;  // per cluster x covariate
    std::optional<ClusterParams> fixed_new_;
    ClusterEvaluator eval_;
    std::vector<CellStats> scratch_cells_;
    std::vector<double> scratch_w_;
    std::vector<double> add_terms_;
    std::vector<double> rem_terms_;
    AcceptanceStats acc_;
    bool use_coefficients_;
    bool constant_mean_;
    std::size_t p_;
};

Baseline initial_baseline(const ModelConfig& model);

PosteriorSamples run_chain(const Dataset& data, const ModelConfig& model, const McmcConfig& mcmc,
                           std::uint64_t chain = 0);
// Independent chains on a bounded worker pool; results ordered by chain index.
std::vector<PosteriorSamples> run_chains(const Dataset& data, const ModelConfig& model, const McmcConfig& mcmc,
                                         int threads);

}  // namespace vdlr
