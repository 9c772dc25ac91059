#include "vdlr/partition_prior.hpp"

#include <cmath>
#include <stdexcept>

#include "vdlr/errors.hpp"
#include "vdlr/numerics.hpp"

namespace vdlr {

double log_cohesion(int size, double mass) {
    if (size < 1) throw std::logic_error("log_cohesion: cluster size must be positive");
    return std::log(mass) + log_gamma(static_cast<double>(size));
}

SimilarityFamily parse_similarity_family(const std::string& name) {
    if (name == "nn") return SimilarityFamily::nn;
    if (name == "nnig") return SimilarityFamily::nnig;
    if (name == "nnsichi2" || name == "nnsix2") return SimilarityFamily::nnsichi2;
    throw DataError("unknown similarity family '" + name + "' (expected nn, nnig or nnsichi2)");
}

std::string to_string(SimilarityFamily f) {
    switch (f) {
        case SimilarityFamily::nn: return "nn";
        case SimilarityFamily::nnig: return "nnig";
        case SimilarityFamily::nnsichi2: return "nnsichi2";
    }
    return "?";
}

SimilarityParams SimilarityParams::nn(double mean, double prior_var, double kernel_var) {
    SimilarityParams p;
    p.family = SimilarityFamily::nn;
    p.mean = mean;
    p.prior_var = prior_var;
    p.kernel_var = kernel_var;
    return p;
}

SimilarityParams SimilarityParams::nnig(double mean, double var_scale, double shape, double scale) {
    SimilarityParams p;
    p.family = SimilarityFamily::nnig;
    p.mean = mean;
    p.var_scale = var_scale;
    p.shape = shape;
    p.scale = scale;
    return p;
}

SimilarityParams SimilarityParams::nnsichi2(double mean, double kappa, double nu, double s0sq) {
    SimilarityParams p;
    p.family = SimilarityFamily::nnsichi2;
    p.mean = mean;
    p.kappa = kappa;
    p.nu = nu;
    p.s0sq = s0sq;
    return p;
}

void SimilarityParams::validate() const {
    auto need = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw DataError(std::string("similarity parameter '") + name + "' must be positive and finite");
    };
    if (!std::isfinite(mean)) throw DataError("similarity parameter 'mean' must be finite");
    switch (family) {
        case SimilarityFamily::nn:
            need(prior_var, "prior_var");
            need(kernel_var, "kernel_var");
            break;
        case SimilarityFamily::nnig:
            need(var_scale, "var_scale");
            need(shape, "shape");
            need(scale, "scale");
            break;
        case SimilarityFamily::nnsichi2:
            need(kappa, "kappa");
            need(nu, "nu");
            need(s0sq, "s0sq");
            break;
    }
}

Similarity::Similarity(const SimilarityParams& params, int table_size) : params_(params) {
    params_.validate();
    switch (params_.family) {
        case SimilarityFamily::nn:
            gaussian_ = true;
            m0_ = params_.mean;
            v_ = params_.prior_var;
            s2_ = params_.kernel_var;
            break;
        case SimilarityFamily::nnig:
            m0_ = params_.mean;
            kappa0_ = 1.0 / params_.var_scale;
            a0_ = params_.shape;
            b0_ = params_.scale;
            break;
        case SimilarityFamily::nnsichi2:
            // scaled-inverse-chi-square(nu, s0^2) is IG(nu / 2, nu s0^2 / 2)
            m0_ = params_.mean;
            kappa0_ = params_.kappa;
            a0_ = 0.5 * params_.nu;
            b0_ = 0.5 * params_.nu * params_.s0sq;
            break;
    }
    a0_log_b0_minus_lgamma_ = a0_ * std::log(b0_) - log_gamma(a0_);
    if (!gaussian_ && table_size > 0) {
        lgamma_table_.resize(table_size + 1);
        for (int n = 0; n <= table_size; ++n) lgamma_table_[n] = log_gamma(a0_ + 0.5 * n);
    }
}

double Similarity::lgamma_shape_plus_half(int n) const {
    if (n < static_cast<int>(lgamma_table_.size())) return lgamma_table_[n];
    return log_gamma(a0_ + 0.5 * n);
}

double Similarity::log_marginal(const CellStats& cell) const {
    if (cell.count == 0) return 0.0;
    const double n = cell.count;
    const double xbar = cell.sum / n;
    const double ss = cell.centered_ss();
    const double d = xbar - m0_;
    if (gaussian_) {
        const double tot = s2_ + n * v_;
        return -0.5 * n * (kLog2Pi + std::log(s2_)) - ss / (2.0 * s2_) + 0.5 * std::log(s2_ / tot) -
               n * d * d / (2.0 * tot);
    }
    const double kn = kappa0_ + n;
    const double an = a0_ + 0.5 * n;
    const double bn = b0_ + 0.5 * ss + kappa0_ * n * d * d / (2.0 * kn);
    return lgamma_shape_plus_half(cell.count) + a0_log_b0_minus_lgamma_ - an * std::log(bn) +
           0.5 * std::log(kappa0_ / kn) - 0.5 * n * kLog2Pi;
}

double Similarity::log_marginal(std::span<const double> values) const {
    CellStats c;
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("similarity evaluated on a non-finite value");
        c.add(v);
    }
    return log_marginal(c);
}

PartitionPrior PartitionPrior::shared(double mass, const SimilarityParams& params, std::size_t p, int table_size) {
    if (!(mass > 0.0)) throw DataError("cohesion mass must be positive");
    PartitionPrior prior;
    prior.mass = mass;
    prior.similarity.assign(p, Similarity(params, table_size));
    return prior;
}

double PartitionPrior::log_cluster_weight(std::span<const CellStats> cells) const {
    double s = 0.0;
    for (std::size_t l = 0; l < cells.size(); ++l) s += similarity[l].log_marginal(cells[l]);
    return s;
}

double log_partition_prior(const PartitionState& state, const PartitionPrior& prior) {
    double lp = 0.0;
    for (int j = 0; j < state.num_clusters(); ++j)
        lp += log_cohesion(state.cluster_size(j), prior.mass) + prior.log_cluster_weight(state.cells(j));
    return lp;
}

double co_cluster_probability(std::span<const double> x1, std::span<const bool> obs1,
                              std::span<const double> x2, std::span<const bool> obs2,
                              const PartitionPrior& prior) {
    const std::size_t p = prior.similarity.size();
    if (x1.size() != p || x2.size() != p || obs1.size() != p || obs2.size() != p)
        throw std::invalid_argument("co_cluster_probability: covariate length mismatch");
    double together = log_cohesion(2, prior.mass);
    double apart = 2.0 * log_cohesion(1, prior.mass);
    for (std::size_t l = 0; l < p; ++l) {
        CellStats joint, a, b;
        if (obs1[l]) {
            joint.add(x1[l]);
            a.add(x1[l]);
        }
        if (obs2[l]) {
            joint.add(x2[l]);
            b.add(x2[l]);
        }
        together += prior.similarity[l].log_marginal(joint);
        apart += prior.similarity[l].log_marginal(a) + prior.similarity[l].log_marginal(b);
    }
    return 1.0 / (1.0 + std::exp(apart - together));
}

}  // namespace vdlr
