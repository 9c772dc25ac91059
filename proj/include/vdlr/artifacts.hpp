#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "vdlr/core.hpp"
#include "vdlr/likelihood.hpp"
#include "vdlr/mcmc.hpp"

namespace vdlr {

// Everything `predict` needs to rebuild a fit without rerunning it.
struct FitArtifacts {
    Dataset train;  // original scale
    Scaling scaling;
    ModelConfig model;
    McmcConfig mcmc;
    std::vector<PosteriorSamples> chains;
    nlohmann::json manifest;
};

// Directory layout:
//   manifest.json          configuration, scaling, acceptance (no timings)
//   timing.json            wall-clock seconds per chain
//   training_data.csv      training data on the original scale
//   samples_global.csv     chain, draw, iteration, k, mu0, sigma0, logpost
//   samples_clusters.csv   chain, draw, cluster, size, mu, sigma, tau, beta_1..beta_p
//   labels.csv             chain, draw, then one label column per observation
//   coclustering.csv       pooled co-clustering proportions (m x m)
void write_fit_artifacts(const std::string& dir, const FitArtifacts& fit);
FitArtifacts read_fit_artifacts(const std::string& dir);

// Pooled co-clustering proportions across chains.
std::vector<double> pooled_cocluster(const std::vector<PosteriorSamples>& chains);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace vdlr
