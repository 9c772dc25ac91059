#pragma once

// Allocation-only chains with every cluster sharing one fixed parameter
// vector, compared with the exactly enumerated partition posterior.

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "vdlr/likelihood.hpp"
#include "vdlr/mcmc.hpp"

namespace enumeration {

inline long long key_of(std::span<const int> labels) {
    const auto c = oracle::canonical(labels);
    long long k = 0;
    for (int v : c) k = k * 16 + v;
    return k;
}

// Posterior probability of every partition given shared parameters theta.
inline std::map<long long, double> exact_posterior(const vdlr::Dataset& data, const vdlr::ModelConfig& model,
                                                   const vdlr::ClusterParams& theta) {
    const auto prior = model.partition_prior();
    std::map<long long, double> lw;
    double mx = -INFINITY;
    for (const auto& lab : oracle::set_partitions(static_cast<int>(data.size()))) {
        const vdlr::PartitionState st(data, lab);
        double w = vdlr::log_partition_prior(st, prior);
        for (int j = 0; j < st.num_clusters(); ++j)
            w += vdlr::cluster_loglik(data, data.response(), st.members(j), theta, model.plugin);
        lw[key_of(lab)] = w;
        mx = std::max(mx, w);
    }
    double z = 0.0;
    for (auto& [k, w] : lw) z += (w = std::exp(w - mx));
    for (auto& [k, w] : lw) w /= z;
    return lw;
}

struct Result {
    double tv = 0.0;
    std::size_t distinct = 0;
};

inline Result allocation_tv(const vdlr::Dataset& data, const vdlr::ModelConfig& model, vdlr::McmcConfig mcmc,
                            const vdlr::ClusterParams& theta, int scans) {
    mcmc.update_params = false;
    vdlr::Sampler s(data, model, mcmc);
    const std::vector<int> start(data.size(), 0);
    s.reset(start, {theta}, vdlr::Baseline{theta.mu, 1.0});
    s.set_fixed_new_cluster(theta);
    std::map<long long, double> freq;
    for (int t = 0; t < scans; ++t) {
        s.scan();
        freq[key_of(s.state().labels())] += 1.0;
    }
    const auto exact = exact_posterior(data, model, theta);
    Result r;
    r.distinct = freq.size();
    for (const auto& [k, p] : exact) {
        const auto it = freq.find(k);
        const double f = it == freq.end() ? 0.0 : it->second / scans;
        r.tv += 0.5 * std::abs(f - p);
    }
    return r;
}

// m = 4, p = 2 with one missing entry, responses spread enough that the
// likelihood matters whenever coefficients are nonzero.
inline vdlr::Dataset small_dataset() {
    const std::vector<double> y = {-1.0, -0.6, 0.8, 1.4};
    const std::vector<double> x = {-1.2, 0.3, -0.9, 0.0, 0.7, -0.4, 1.5, 0.9};
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0, 1, 1, 1, 1};
    return vdlr::Dataset(y, x, mask, 2, {"x1", "x2"});
}

inline vdlr::ModelConfig small_model() {
    vdlr::ModelConfig m;
    m.mass = 1.0;
    m.similarity.assign(2, vdlr::SimilarityParams::nn(0.0, 1.0, 0.5));
    m.a_sigma = 3.0;
    return m;
}

}  // namespace enumeration
