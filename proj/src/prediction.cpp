#include "vdlr/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vdlr/numerics.hpp"

namespace vdlr {

double PredictiveMixture::mean() const { return predictive_mean(*this); }

double PredictiveMixture::cdf(double y) const {
    double c = 0.0;
    for (std::size_t h = 0; h < weights.size(); ++h) c += weights[h] * normal_cdf(y, means[h], std::sqrt(vars[h]));
    return std::clamp(c, 0.0, 1.0);
}

double PredictiveMixture::log_density(double y) const {
    std::vector<double> terms(weights.size());
    for (std::size_t h = 0; h < weights.size(); ++h)
        terms[h] = (weights[h] > 0.0 ? std::log(weights[h]) : kNegInf) + normal_logpdf(y, means[h], vars[h]);
    return log_sum_exp(terms);
}

double predictive_mean(const PredictiveMixture& mix) {
    double s = 0.0;
    for (std::size_t h = 0; h < mix.weights.size(); ++h) s += mix.weights[h] * mix.means[h];
    return s;
}

std::vector<double> predictive_weights(std::span<const double> x_row, std::span<const int> observed,
                                       std::span<const int> sizes, std::span<const CellStats> cells,
                                       const PartitionPrior& prior) {
    const std::size_t k = sizes.size();
    const std::size_t p = prior.similarity.size();
    std::vector<double> lw(k + 1);
    for (std::size_t h = 0; h < k; ++h) {
        double w = std::log(static_cast<double>(sizes[h]));
        for (int l : observed) w += prior.similarity[l].log_ratio_add(cells[h * p + l], x_row[l]);
        lw[h] = w;
    }
    double wn = std::log(prior.mass);
    for (int l : observed) wn += prior.similarity[l].log_ratio_add(CellStats{}, x_row[l]);
    lw[k] = wn;
    const double lse = log_sum_exp(lw);
    for (auto& v : lw) v = std::exp(v - lse);
    return lw;
}

PredictiveMixture predictive_mixture(std::span<const double> x_row, std::span<const int> observed,
                                     std::span<const int> sizes, std::span<const CellStats> cells,
                                     std::span<const ClusterParams> clusters, const ClusterParams& theta_new,
                                     const PartitionPrior& prior, const PluginPriors& plugin) {
    const std::size_t k = sizes.size();
    const std::size_t p = prior.similarity.size();
    PredictiveMixture mix;
    mix.weights = predictive_weights(x_row, observed, sizes, cells, prior);
    mix.means.resize(k + 1);
    mix.vars.resize(k + 1);
    auto component = [&](const ClusterParams& t, const CellStats* cl, std::size_t h) {
        double mean = t.mu;
        double var = t.sigma * t.sigma;
        std::size_t next = 0;
        for (std::size_t l = 0; l < p; ++l) {
            const double b = t.beta[l];
            if (next < observed.size() && observed[next] == static_cast<int>(l)) {
                const PluginEstimate est = plugin_stats(cl ? cl[l] : CellStats{}, plugin);
                mean += b * standardized_covariate(x_row[l], est);
                ++next;
            } else {
                var += b * b;
            }
        }
        mix.means[h] = mean;
        mix.vars[h] = var;
    };
    for (std::size_t h = 0; h < k; ++h) component(clusters[h], cells.data() + h * p, h);
    component(theta_new, nullptr, k);
    return mix;
}

Predictor::Predictor(const Dataset& train, const ModelConfig& model, std::span<const PosteriorSamples> chains,
                     std::uint64_t seed, bool include_query_in_plugins)
    : model_(model),
      prior_(model.partition_prior(static_cast<int>(train.size()) + 2)),
      p_(train.num_covariates()),
      include_query_(include_query_in_plugins) {
    model_.validate(p_);
    Rng rng(seed, 0x9e3779b9ULL);
    const bool coefs = model_.coefficients_active() && p_ > 0;
    for (const auto& chain : chains) {
        for (const auto& d : chain.draws) {
            if (d.clusters.empty()) throw std::invalid_argument("posterior draws were stored without parameters");
            State s;
            int k = 0;
            for (int c : d.labels) k = std::max(k, c + 1);
            if (static_cast<std::size_t>(k) != d.clusters.size())
                throw std::invalid_argument("draw labels disagree with stored cluster count");
            s.sizes.assign(k, 0);
            s.cells.assign(static_cast<std::size_t>(k) * p_, CellStats{});
            for (std::size_t i = 0; i < d.labels.size(); ++i) {
                const int c = d.labels[i];
                ++s.sizes[c];
                const auto row = train.row(i);
                for (int l : train.observed_indices(i)) s.cells[c * p_ + l].add(row[l]);
            }
            s.clusters = d.clusters;
            // fresh new-cluster parameters from the prior hierarchy, one per draw
            ClusterParams t;
            t.mu = rng.normal(d.baseline.mu0, d.baseline.sigma0);
            t.sigma = rng.uniform(0.0, model_.a_sigma);
            if (coefs) {
                t.psi.resize(p_);
                for (auto& v : t.psi) v = rng.exponential(0.5);
                t.phi = dirichlet_symmetric(rng, p_, 1.0 / static_cast<double>(p_));
                t.tau = rng.exponential(1.0 / (2.0 * model_.tau0));
                t.beta.resize(p_);
                for (std::size_t l = 0; l < p_; ++l)
                    t.beta[l] = rng.normal(0.0, t.sigma * t.tau * t.phi[l] * std::sqrt(t.psi[l]));
            } else {
                t = ClusterParams::initial(p_, t.mu, t.sigma, model_.tau0);
            }
            s.theta_new = std::move(t);
            draws_.push_back(std::move(s));
        }
    }
    if (draws_.empty()) throw std::invalid_argument("no posterior draws to predict from");
}

PredictiveMixture Predictor::mixture(std::size_t draw, std::span<const double> x_row,
                                     std::span<const int> observed) const {
    const State& s = draws_[draw];
    if (!include_query_)
        return predictive_mixture(x_row, observed, s.sizes, s.cells, s.clusters, s.theta_new, prior_, model_.plugin);
    // Sensitivity variant: each existing cluster's plug-ins include the query point.
    PredictiveMixture mix = predictive_mixture(x_row, observed, s.sizes, s.cells, s.clusters, s.theta_new, prior_,
                                               model_.plugin);
    const std::size_t k = s.sizes.size();
    std::vector<CellStats> cl(p_);
    for (std::size_t h = 0; h < k; ++h) {
        std::copy(s.cells.begin() + h * p_, s.cells.begin() + (h + 1) * p_, cl.begin());
        for (int l : observed) cl[l].add(x_row[l]);
        const ClusterParams& t = s.clusters[h];
        double mean = t.mu;
        for (int l : observed) mean += t.beta[l] * standardized_covariate(x_row[l], plugin_stats(cl[l], model_.plugin));
        mix.means[h] = mean;
    }
    return mix;
}

std::vector<PredictiveMixture> Predictor::mixtures(std::span<const double> x_row,
                                                   std::span<const int> observed) const {
    std::vector<PredictiveMixture> out;
    out.reserve(draws_.size());
    for (std::size_t d = 0; d < draws_.size(); ++d) out.push_back(mixture(d, x_row, observed));
    return out;
}

double mixture_quantile(std::span<const PredictiveMixture> mixes, double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("quantile probability must lie in (0, 1)");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& m : mixes)
        for (std::size_t h = 0; h < m.weights.size(); ++h) {
            const double sd = std::sqrt(m.vars[h]);
            lo = std::min(lo, m.means[h] - 40.0 * sd);
            hi = std::max(hi, m.means[h] + 40.0 * sd);
        }
    auto cdf = [&](double y) {
        double c = 0.0;
        for (const auto& m : mixes) c += m.cdf(y);
        return c / static_cast<double>(mixes.size());
    };
    for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

PointPrediction Predictor::predict(std::span<const double> x_row, std::span<const int> observed,
                                   std::optional<double> y, std::span<const double> probs) const {
    const auto mixes = mixtures(x_row, observed);
    const double n = static_cast<double>(mixes.size());
    PointPrediction out;
    double m1 = 0.0, m2 = 0.0;
    for (const auto& mix : mixes)
        for (std::size_t h = 0; h < mix.weights.size(); ++h) {
            m1 += mix.weights[h] * mix.means[h];
            m2 += mix.weights[h] * (mix.vars[h] + mix.means[h] * mix.means[h]);
        }
    m1 /= n;
    m2 /= n;
    out.mean = m1;
    out.sd = std::sqrt(std::max(0.0, m2 - m1 * m1));
    for (double pr : probs) out.quantiles.push_back(mixture_quantile(mixes, pr));
    if (y) {
        double c = 0.0, ll = 0.0;
        for (const auto& mix : mixes) {
            c += mix.cdf(*y);
            ll += mix.log_density(*y);
        }
        out.quantile_residual = c / n;
        out.mean_loglik = ll / n;
    }
    return out;
}

double Predictor::cdf(std::span<const double> x_row, std::span<const int> observed, double y) const {
    double c = 0.0;
    for (std::size_t d = 0; d < draws_.size(); ++d) c += mixture(d, x_row, observed).cdf(y);
    return c / static_cast<double>(draws_.size());
}

std::vector<double> Predictor::log_density_per_draw(std::span<const double> x_row, std::span<const int> observed,
                                                    double y) const {
    std::vector<double> out(draws_.size());
    for (std::size_t d = 0; d < draws_.size(); ++d) out[d] = mixture(d, x_row, observed).log_density(y);
    return out;
}

std::vector<double> Predictor::density(std::span<const double> x_row, std::span<const int> observed,
                                       std::span<const double> y_grid) const {
    const auto mixes = mixtures(x_row, observed);
    std::vector<double> out(y_grid.size(), 0.0);
    for (const auto& mix : mixes)
        for (std::size_t g = 0; g < y_grid.size(); ++g) out[g] += std::exp(mix.log_density(y_grid[g]));
    for (auto& v : out) v /= static_cast<double>(mixes.size());
    return out;
}

std::vector<double> Predictor::sample(std::span<const double> x_row, std::span<const int> observed, int n_per_draw,
                                      Rng& rng) const {
    std::vector<double> out;
    out.reserve(draws_.size() * static_cast<std::size_t>(n_per_draw));
    std::vector<double> lw;
    for (std::size_t d = 0; d < draws_.size(); ++d) {
        const PredictiveMixture mix = mixture(d, x_row, observed);
        lw.resize(mix.weights.size());
        for (std::size_t h = 0; h < lw.size(); ++h) lw[h] = mix.weights[h] > 0 ? std::log(mix.weights[h]) : kNegInf;
        for (int r = 0; r < n_per_draw; ++r) {
            const std::size_t h = rng.categorical_log(lw);
            out.push_back(rng.normal(mix.means[h], std::sqrt(mix.vars[h])));
        }
    }
    return out;
}

}  // namespace vdlr
