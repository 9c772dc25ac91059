#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vdlr {

struct ColumnScaling {
    double center = 0.0;
    double scale = 1.0;

    double forward(double raw) const { return (raw - center) / scale; }
    double inverse(double v) const { return v * scale + center; }
};

struct Scaling {
    ColumnScaling response;
    std::vector<ColumnScaling> covariates;
};

// Response plus an m x p covariate matrix with a separate observed mask.
// Missing cells are stored as 0.0 but are only reachable through the
// observed-index lists, never through arithmetic on the raw row.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<double> y, std::vector<double> x, std::vector<std::uint8_t> observed,
            std::size_t p, std::vector<std::string> covariate_names,
            std::string response_name = "y");

    std::size_t size() const { return m_; }
    std::size_t num_covariates() const { return p_; }
    bool has_response() const { return !y_.empty(); }

    double y(std::size_t i) const { return y_[i]; }
    std::span<const double> response() const { return y_; }

    bool observed(std::size_t i, std::size_t l) const { return mask_[i * p_ + l] != 0; }
    // Checked access; throws std::logic_error on a missing cell.
    double covariate(std::size_t i, std::size_t l) const;
    // Raw row storage. Only entries listed in observed_indices(i) are meaningful.
    std::span<const double> row(std::size_t i) const { return {x_.data() + i * p_, p_}; }
    // Sorted indices of the observed covariates of row i.
    std::span<const int> observed_indices(std::size_t i) const {
        return {obs_idx_.data() + obs_start_[i], obs_start_[i + 1] - obs_start_[i]};
    }
    std::size_t num_observed_cells() const { return obs_idx_.size(); }

    const std::vector<std::string>& covariate_names() const { return names_; }
    const std::string& response_name() const { return response_name_; }

    // Identity unless the dataset was standardized.
    const Scaling& scaling() const { return scaling_; }
    bool standardized() const { return standardized_; }

    // Returns a copy with `s` applied to the raw values (s must be the identity
    // for a dataset that is already standardized).
    Dataset standardize(const Scaling& s) const;
    // Values on the original scale.
    Dataset unstandardize() const;

    Dataset select_rows(std::span<const std::size_t> rows) const;
    Dataset with_response(std::vector<double> y) const;
    Dataset with_mask(std::vector<std::uint8_t> observed) const;
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    const std::vector<double>& values() const { return x_; }

private:
    void build_patterns();

    std::size_t m_ = 0;
    std::size_t p_ = 0;
    std::vector<double> y_;
    std::vector<double> x_;
    std::vector<std::uint8_t> mask_;
    std::vector<int> obs_idx_;
    std::vector<std::size_t> obs_start_{0};
    std::vector<std::string> names_;
    std::string response_name_ = "y";
    Scaling scaling_;
    bool standardized_ = false;
};

enum class Standardize { none, train, pooled };

struct LoadOptions {
    std::string response = "y";
    std::string missing_token = "NA";
    // A query file may omit the response column entirely.
    bool require_response = true;
    // Columns to use as covariates; empty means all non-response columns.
    std::vector<std::string> covariates;
};

// Raw (unstandardized) load. Errors: missing response value (names the
// row), non-numeric cell (names row and column), all-missing column.
Dataset load_dataset(std::istream& csv, const LoadOptions& opts);
Dataset load_dataset_file(const std::string& path, const LoadOptions& opts);

// Per-column mean and sample standard deviation over observed entries.
// Constant or single-entry columns get scale 1.
Scaling compute_scaling(const Dataset& ds);
Scaling compute_scaling(std::span<const Dataset* const> parts);

void write_dataset_csv(std::ostream& out, const Dataset& ds, const std::string& missing_token = "NA");

// ---------------------------------------------------------------------------
// Partition state with per-(cluster, covariate) sufficient statistics.

struct CellStats {
    int count = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double v) {
        ++count;
        sum += v;
        sumsq += v * v;
    }
    void remove(double v) {
        --count;
        sum -= v;
        sumsq -= v * v;
        if (count == 0) {
            sum = 0.0;
            sumsq = 0.0;
        }
    }
    CellStats plus(double v) const {
        CellStats c = *this;
        c.add(v);
        return c;
    }
    CellStats minus(double v) const {
        CellStats c = *this;
        c.remove(v);
        return c;
    }
    // sum of squared deviations about the cell mean, floored at 0
    double centered_ss() const;
};

struct PluginPriors {
    double nu = 1.0;
    double nu_s = 1.0;
    double mean = 0.0;   // prior guess for the covariate mean
    double var = 1.0;    // prior guess for the covariate variance
};

struct PluginEstimate {
    double mean = 0.0;
    double var = 1.0;
};

// Posterior mean / harmonic-mean variance of one cluster-covariate cell under
// a normal scaled-inverse-chi-square prior. Empty cells give the prior guesses.
PluginEstimate plugin_stats(const CellStats& cell, const PluginPriors& priors);

inline double standardized_covariate(double x, const PluginEstimate& est) {
    return (x - est.mean) / std::sqrt(est.var);
}

struct MoveResult {
    bool created = false;      // a new cluster was opened at index num_clusters()-1
    bool removed = false;      // the source cluster emptied and was compacted away
    int removed_slot = -1;     // slot that was vacated
    int relocated_from = -1;   // cluster that was moved into removed_slot (-1 if none)
};

class PartitionState {
public:
    PartitionState() = default;
    // `labels` may use any non-negative integers; they are compacted in order
    // of first appearance.
    PartitionState(const Dataset& data, std::span<const int> labels);

    const Dataset& data() const { return *data_; }
    int num_clusters() const { return static_cast<int>(members_.size()); }
    int label(std::size_t i) const { return labels_[i]; }
    const std::vector<int>& labels() const { return labels_; }
    std::span<const int> members(int j) const { return members_[j]; }
    int cluster_size(int j) const { return static_cast<int>(members_[j].size()); }
    std::span<const CellStats> cells(int j) const {
        return {stats_.data() + static_cast<std::size_t>(j) * p_, p_};
    }
    const CellStats& cell(int j, std::size_t l) const { return stats_[j * p_ + l]; }

    // Move observation i to cluster j_new; j_new == num_clusters() opens a new
    // cluster. An emptied source cluster is removed by moving the last
    // cluster into its slot.
    MoveResult apply_move(std::size_t i, int j_new);

    void recompute_stats();
    // Throws std::logic_error describing the first violated invariant.
    void check_invariants(double tol = 1e-10) const;

private:
    const Dataset* data_ = nullptr;
    std::size_t p_ = 0;
    std::vector<int> labels_;
    std::vector<int> position_;
    std::vector<std::vector<int>> members_;
    std::vector<CellStats> stats_;
};

}  // namespace vdlr
