#include "vdlr/core.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "vdlr/csv.hpp"
#include "vdlr/errors.hpp"

namespace vdlr {

Dataset::Dataset(std::vector<double> y, std::vector<double> x, std::vector<std::uint8_t> observed,
                 std::size_t p, std::vector<std::string> covariate_names, std::string response_name)
    : p_(p),
      y_(std::move(y)),
      x_(std::move(x)),
      mask_(std::move(observed)),
      names_(std::move(covariate_names)),
      response_name_(std::move(response_name)) {
    if (p_ == 0) {
        m_ = y_.size();
    } else {
        if (x_.size() % p_ != 0) throw std::invalid_argument("covariate storage is not m x p");
        m_ = x_.size() / p_;
    }
    if (!y_.empty() && y_.size() != m_) throw std::invalid_argument("response length differs from row count");
    if (mask_.size() != x_.size()) throw std::invalid_argument("mask size differs from covariate storage");
    if (names_.size() != p_) throw std::invalid_argument("covariate name count differs from p");
    for (std::size_t k = 0; k < x_.size(); ++k)
        if (!mask_[k]) x_[k] = 0.0;
    scaling_.covariates.assign(p_, ColumnScaling{});
    build_patterns();
}

void Dataset::build_patterns() {
    obs_idx_.clear();
    obs_start_.assign(1, 0);
    obs_idx_.reserve(x_.size());
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t l = 0; l < p_; ++l)
            if (mask_[i * p_ + l]) obs_idx_.push_back(static_cast<int>(l));
        obs_start_.push_back(obs_idx_.size());
    }
}

double Dataset::covariate(std::size_t i, std::size_t l) const {
    if (!observed(i, l))
        throw std::logic_error("read of missing covariate (row " + std::to_string(i) + ", column " +
                               std::to_string(l) + ")");
    return x_[i * p_ + l];
}

Dataset Dataset::standardize(const Scaling& s) const {
    if (standardized_) throw std::logic_error("dataset is already standardized");
    if (s.covariates.size() != p_) throw std::invalid_argument("scaling has wrong column count");
    Dataset out = *this;
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t l = 0; l < p_; ++l)
            if (mask_[i * p_ + l]) out.x_[i * p_ + l] = s.covariates[l].forward(x_[i * p_ + l]);
    for (auto& v : out.y_) v = s.response.forward(v);
    out.scaling_ = s;
    out.standardized_ = true;
    return out;
}

Dataset Dataset::unstandardize() const {
    Dataset out = *this;
    if (!standardized_) return out;
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t l = 0; l < p_; ++l)
            if (mask_[i * p_ + l]) out.x_[i * p_ + l] = scaling_.covariates[l].inverse(x_[i * p_ + l]);
    for (auto& v : out.y_) v = scaling_.response.inverse(v);
    out.scaling_ = Scaling{};
    out.scaling_.covariates.assign(p_, ColumnScaling{});
    out.standardized_ = false;
    return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> y;
    std::vector<double> x;
    std::vector<std::uint8_t> mask;
    for (std::size_t r : rows) {
        if (r >= m_) throw std::out_of_range("row index out of range");
        if (has_response()) y.push_back(y_[r]);
        x.insert(x.end(), x_.begin() + r * p_, x_.begin() + (r + 1) * p_);
        mask.insert(mask.end(), mask_.begin() + r * p_, mask_.begin() + (r + 1) * p_);
    }
    Dataset out(std::move(y), std::move(x), std::move(mask), p_, names_, response_name_);
    if (p_ == 0) {
        out.m_ = rows.size();
        out.build_patterns();
    }
    out.scaling_ = scaling_;
    out.standardized_ = standardized_;
    return out;
}

Dataset Dataset::with_response(std::vector<double> y) const {
    if (y.size() != m_) throw std::invalid_argument("response length differs from row count");
    Dataset out = *this;
    out.y_ = std::move(y);
    return out;
}

Dataset Dataset::with_mask(std::vector<std::uint8_t> observed) const {
    if (observed.size() != mask_.size()) throw std::invalid_argument("mask size mismatch");
    Dataset out = *this;
    out.mask_ = std::move(observed);
    for (std::size_t k = 0; k < out.x_.size(); ++k)
        if (!out.mask_[k]) out.x_[k] = 0.0;
    out.build_patterns();
    return out;
}

Dataset load_dataset(std::istream& csv, const LoadOptions& opts) {
    const CsvTable table = read_csv(csv);
    const int ycol = table.column(opts.response);
    if (ycol < 0 && opts.require_response)
        throw DataError("response column '" + opts.response + "' not found in header");

    std::vector<int> cols;
    std::vector<std::string> names;
    if (opts.covariates.empty()) {
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (static_cast<int>(j) == ycol) continue;
            cols.push_back(static_cast<int>(j));
            names.push_back(table.header[j]);
        }
    } else {
        for (const auto& name : opts.covariates) {
            const int j = table.column(name);
            if (j < 0) throw DataError("covariate column '" + name + "' not found in header");
            cols.push_back(j);
            names.push_back(name);
        }
    }
    const std::size_t m = table.rows.size();
    if (m == 0) throw DataError("dataset has no data rows");
    const std::size_t p = cols.size();

    std::vector<double> y;
    std::vector<double> x(m * p, 0.0);
    std::vector<std::uint8_t> mask(m * p, 0);
    if (ycol >= 0) y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = table.rows[i];
        if (ycol >= 0) {
            const std::string& cell = row[ycol];
            if (cell == opts.missing_token || cell.empty())
                throw DataError("response '" + opts.response + "' is missing at data row " +
                                std::to_string(i + 1));
            y[i] = parse_double(cell, i, opts.response);
        }
        for (std::size_t l = 0; l < p; ++l) {
            const std::string& cell = row[cols[l]];
            if (cell == opts.missing_token || cell.empty()) continue;
            x[i * p + l] = parse_double(cell, i, names[l]);
            mask[i * p + l] = 1;
        }
    }
    for (std::size_t l = 0; l < p; ++l) {
        bool any = false;
        for (std::size_t i = 0; i < m && !any; ++i) any = mask[i * p + l] != 0;
        if (!any) throw DataError("covariate column '" + names[l] + "' has no observed values");
    }
    Dataset ds(std::move(y), std::move(x), std::move(mask), p, std::move(names),
               ycol >= 0 ? opts.response : std::string("y"));
    return ds;
}

Dataset load_dataset_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);
    return load_dataset(in, opts);
}

namespace {

ColumnScaling scaling_from(double n, double mean, double ss) {
    ColumnScaling c;
    if (n < 1) return c;
    c.center = mean;
    if (n >= 2) {
        const double sd = std::sqrt(ss / (n - 1));
        if (sd > 0 && std::isfinite(sd)) c.scale = sd;
    }
    return c;
}

}  // namespace

Scaling compute_scaling(std::span<const Dataset* const> parts) {
    if (parts.empty()) throw std::invalid_argument("no datasets to scale");
    const std::size_t p = parts.front()->num_covariates();
    // Two passes (mean then deviations) keep the estimate accurate for large offsets.
    std::vector<double> n(p, 0.0), sum(p, 0.0);
    double ny = 0.0, sy = 0.0;
    for (const Dataset* d : parts) {
        if (d->num_covariates() != p) throw std::invalid_argument("datasets disagree on covariate count");
        for (std::size_t i = 0; i < d->size(); ++i) {
            for (int l : d->observed_indices(i)) {
                n[l] += 1;
                sum[l] += d->row(i)[l];
            }
            if (d->has_response()) {
                ny += 1;
                sy += d->y(i);
            }
        }
    }
    std::vector<double> ss(p, 0.0);
    double ssy = 0.0;
    for (const Dataset* d : parts) {
        for (std::size_t i = 0; i < d->size(); ++i) {
            for (int l : d->observed_indices(i)) {
                const double dev = d->row(i)[l] - sum[l] / n[l];
                ss[l] += dev * dev;
            }
            if (d->has_response()) {
                const double dev = d->y(i) - sy / ny;
                ssy += dev * dev;
            }
        }
    }
    Scaling s;
    s.covariates.resize(p);
    for (std::size_t l = 0; l < p; ++l) {
        s.covariates[l] = scaling_from(n[l], n[l] > 0 ? sum[l] / n[l] : 0.0, ss[l]);
    }
    if (ny > 0) {
        s.response = scaling_from(ny, sy / ny, ssy);
    }
    return s;
}

Scaling compute_scaling(const Dataset& ds) {
    const Dataset* parts[] = {&ds};
    return compute_scaling(std::span<const Dataset* const>(parts));
}

void write_dataset_csv(std::ostream& out, const Dataset& ds, const std::string& missing_token) {
    CsvWriter w(out);
    if (ds.has_response()) w.field(std::string_view(ds.response_name()));
    for (const auto& name : ds.covariate_names()) w.field(std::string_view(name));
    w.end_row();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.has_response()) w.field(ds.y(i));
        for (std::size_t l = 0; l < ds.num_covariates(); ++l) {
            if (ds.observed(i, l))
                w.field(ds.row(i)[l]);
            else
                w.field(std::string_view(missing_token));
        }
        w.end_row();
    }
}

// ---------------------------------------------------------------------------

double CellStats::centered_ss() const {
    if (count == 0) return 0.0;
    const double mean = sum / count;
    return std::max(0.0, sumsq - count * mean * mean);
}

PluginEstimate plugin_stats(const CellStats& cell, const PluginPriors& priors) {
    if (cell.count == 0) return {priors.mean, priors.var};
    const double n = cell.count;
    const double xbar = cell.sum / n;
    const double d = xbar - priors.mean;
    PluginEstimate est;
    est.mean = (priors.nu * priors.mean + cell.sum) / (priors.nu + n);
    est.var = (priors.nu_s * priors.var + cell.centered_ss() + priors.nu * n / (priors.nu + n) * d * d) /
              (priors.nu_s + n);
    return est;
}

PartitionState::PartitionState(const Dataset& data, std::span<const int> labels)
    : data_(&data), p_(data.num_covariates()) {
    if (labels.size() != data.size()) throw std::invalid_argument("label vector length differs from m");
    std::unordered_map<int, int> remap;
    labels_.resize(labels.size());
    position_.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("negative cluster label");
        auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        if (inserted) members_.emplace_back();
        const int j = it->second;
        labels_[i] = j;
        position_[i] = static_cast<int>(members_[j].size());
        members_[j].push_back(static_cast<int>(i));
    }
    recompute_stats();
}

void PartitionState::recompute_stats() {
    stats_.assign(members_.size() * p_, CellStats{});
    for (std::size_t j = 0; j < members_.size(); ++j) {
        for (int i : members_[j]) {
            const auto row = data_->row(i);
            for (int l : data_->observed_indices(i)) stats_[j * p_ + l].add(row[l]);
        }
    }
}

MoveResult PartitionState::apply_move(std::size_t i, int j_new) {
    const int k = num_clusters();
    if (j_new < 0 || j_new > k) throw std::logic_error("apply_move: target cluster out of range");
    const int j_old = labels_[i];
    MoveResult res;
    if (j_new == j_old) return res;
    if (j_new == k && members_[j_old].size() == 1) return res;  // singleton to a fresh singleton

    const auto row = data_->row(i);
    const auto obs = data_->observed_indices(i);

    if (j_new == k) {
        members_.emplace_back();
        stats_.resize(stats_.size() + p_);
        res.created = true;
    }
    // detach from the old cluster (swap-with-last inside the member list)
    auto& old_members = members_[j_old];
    const int pos = position_[i];
    const int last = old_members.back();
    old_members[pos] = last;
    position_[last] = pos;
    old_members.pop_back();
    for (int l : obs) stats_[j_old * p_ + l].remove(row[l]);

    labels_[i] = j_new;
    position_[i] = static_cast<int>(members_[j_new].size());
    members_[j_new].push_back(static_cast<int>(i));
    for (int l : obs) stats_[j_new * p_ + l].add(row[l]);

    if (old_members.empty()) {
        const int tail = num_clusters() - 1;
        res.removed = true;
        res.removed_slot = j_old;
        if (tail != j_old) {
            members_[j_old] = std::move(members_[tail]);
            for (int m : members_[j_old]) labels_[m] = j_old;
            std::copy(stats_.begin() + tail * p_, stats_.begin() + (tail + 1) * p_,
                      stats_.begin() + j_old * p_);
            res.relocated_from = tail;
        }
        members_.pop_back();
        stats_.resize(stats_.size() - p_);
    }
    return res;
}

void PartitionState::check_invariants(double tol) const {
    const std::size_t m = labels_.size();
    std::vector<int> seen(m, 0);
    for (std::size_t j = 0; j < members_.size(); ++j) {
        if (members_[j].empty()) throw std::logic_error("cluster " + std::to_string(j) + " is empty");
        for (std::size_t pos = 0; pos < members_[j].size(); ++pos) {
            const int i = members_[j][pos];
            if (i < 0 || static_cast<std::size_t>(i) >= m) throw std::logic_error("member index out of range");
            if (seen[i]++) throw std::logic_error("observation " + std::to_string(i) + " in two clusters");
            if (labels_[i] != static_cast<int>(j))
                throw std::logic_error("label of observation " + std::to_string(i) + " disagrees with membership");
            if (position_[i] != static_cast<int>(pos)) throw std::logic_error("stale position index");
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        if (!seen[i]) throw std::logic_error("observation " + std::to_string(i) + " unassigned");

    PartitionState fresh = *this;
    fresh.recompute_stats();
    for (std::size_t t = 0; t < stats_.size(); ++t) {
        const CellStats& a = stats_[t];
        const CellStats& b = fresh.stats_[t];
        if (a.count != b.count || std::abs(a.sum - b.sum) > tol || std::abs(a.sumsq - b.sumsq) > tol)
            throw std::logic_error("incremental statistics drifted from recomputation in cell " +
                                   std::to_string(t));
    }
}

}  // namespace vdlr
