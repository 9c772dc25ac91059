#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vdlr/likelihood.hpp"
#include "vdlr/mcmc.hpp"
#include "vdlr/prediction.hpp"
#include "vdlr/screening.hpp"
#include "vdlr/simgen.hpp"

namespace vdlr {

// Deterministic child seed for (seed, a, b); splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

struct SimulateOptions {
    std::string kind = "friedman";  // friedman | bench | screening | illustration
    std::size_t m = 150;
    std::size_t test_m = 150;
    std::size_t p = 5;             // bench only
    std::string bench_kind = "step";
    int scenario = 1;
    bool heteroscedastic = false;
    double missing_rate = 0.0;     // friedman only; bench and illustration use their fixed rates
    std::string mechanism = "mcar";
    double steepness = 2.0;
    std::uint64_t seed = 1;
    std::string out = "sim";
};
// Writes train.csv, test.csv and truth.json into `out`.
void cmd_simulate(const SimulateOptions& o, std::ostream& log);

struct ScreenOptions {
    std::string data;
    std::string response = "y";
    std::string missing_token = "NA";
    std::string measure = "pvalue";  // pvalue | r2 | adjr2
    std::optional<double> threshold;  // default 0.05 for pvalue, 0.5 otherwise
    int k_max = 9;
    int restarts = 10;
    std::uint64_t seed = 1;
    std::string out;  // JSON path; stdout when empty
};
enum class ScreenOutcome { signal = 0, no_signal = 10, indeterminate = 11 };
ScreenOutcome cmd_screen(const ScreenOptions& o, std::ostream& log);

struct FitOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out;  // overrides [output] dir
};
void cmd_fit(const FitOptions& o, std::ostream& log);

struct PredictOptions {
    std::string fit;
    std::string query;
    std::string out = "predictions.csv";
    std::vector<double> probs = {0.025, 0.5, 0.975};
    std::optional<std::uint64_t> seed;
    bool include_query_in_plugins = false;
    // Optional density grid on the response scale: "lo:hi:n".
    std::string density_grid;
    std::string density_out = "density.csv";
};
void cmd_predict(const PredictOptions& o, std::ostream& log);

struct MetricsOptions {
    std::string predictions;
    std::string out;  // CSV path; stdout when empty
};
void cmd_metrics(const MetricsOptions& o, std::ostream& log);

struct BenchmarkOptions {
    std::vector<std::string> kinds = {"step", "linear"};
    std::vector<std::size_t> sizes = {100, 300};
    std::vector<std::size_t> dims = {5, 10};
    int repeats = 10;
    int iterations = 1000;
    std::uint64_t seed = 1;
    std::string out = "benchmark.csv";
};

struct BenchmarkRow {
    std::string data;
    std::size_t m = 0;
    ModelKind model = ModelKind::vdlreg;
    std::size_t p = 0;
    double median = 0.0;
    double sd = 0.0;
};
// Times `repeats` successive blocks of `iterations` scans per cell.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkOptions& o, std::ostream* log = nullptr);
void cmd_benchmark(const BenchmarkOptions& o, std::ostream& log);

// Friedman-study model settings; covariates are not standardized.
ModelConfig friedman_model_config(const Dataset& train, ModelKind kind);

struct FriedmanDesign {
    int replicates = 10;
    std::size_t m = 150;  // train and test size each
    int n_iter = 20000;
    int n_burn = 10000;
    int thin = 10;
    std::vector<double> rates = {0.0, 0.25};
    std::vector<std::string> mechanisms = {"mcar"};
    std::vector<bool> heteroscedastic = {false};
    double steepness = 2.0;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct FriedmanRow {
    int replicate = 0;
    double rate = 0.0;
    std::string mechanism;
    bool heteroscedastic = false;
    ModelKind model = ModelKind::vdlreg;
    double mspe = 0.0;
    double deviance = 0.0;
    double ks = 0.0;
    double median_k = 0.0;
};
std::vector<FriedmanRow> replicate_friedman(const FriedmanDesign& d, std::ostream* log = nullptr);
void write_friedman_rows(std::ostream& out, const std::vector<FriedmanRow>& rows);
void cmd_replicate_friedman(const FriedmanDesign& d, const std::string& out, std::ostream& log);

struct CoclusterGridOptions {
    std::string family = "nn";
    double mass = 1.0;
    double mean = 0.0;
    double prior_var = 1.0;
    double kernel_var = 1.0;
    double var_scale = 1.0;
    double shape = 1.0;
    double scale = 1.0;
    double lo = -3.0;
    double hi = 3.0;
    int n = 61;
    std::string out = "cocluster_grid.csv";
};
// Prior co-clustering probability of (0, 0) with each grid point, with x2 of
// the grid point observed and missing.
void cmd_cocluster_grid(const CoclusterGridOptions& o, std::ostream& log);

}  // namespace vdlr
