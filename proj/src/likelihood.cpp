#include "vdlr/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vdlr/errors.hpp"
#include "vdlr/numerics.hpp"

namespace vdlr {

ClusterParams ClusterParams::initial(std::size_t p, double mu, double sigma, double tau0) {
    ClusterParams t;
    t.mu = mu;
    t.sigma = sigma;
    t.beta.assign(p, 0.0);
    t.psi.assign(p, 2.0);
    t.phi.assign(p, p > 0 ? 1.0 / static_cast<double>(p) : 1.0);
    t.tau = 2.0 * tau0;
    return t;
}

double ClusterParams::beta_sq_norm() const {
    double s = 0.0;
    for (double b : beta) s += b * b;
    return s;
}

void ModelConfig::validate(std::size_t p) const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DataError(std::string("model.") + name + " must be positive");
    };
    positive(mass, "mass");
    positive(v, "v");
    positive(a_sigma0, "a_sigma0");
    positive(a_sigma, "a_sigma");
    positive(tau0, "tau0");
    positive(plugin.nu, "nu");
    positive(plugin.nu_s, "nu_s");
    positive(plugin.var, "s0_x2");
    if (!std::isfinite(m0)) throw DataError("model.m0 must be finite");
    if (similarity.size() != p)
        throw DataError("similarity parameters given for " + std::to_string(similarity.size()) +
                        " covariates, data has " + std::to_string(p));
    for (const auto& s : similarity) s.validate();
}

PartitionPrior ModelConfig::partition_prior(int table_size) const {
    PartitionPrior prior;
    prior.mass = mass;
    prior.similarity.reserve(similarity.size());
    for (const auto& s : similarity) prior.similarity.emplace_back(s, table_size);
    return prior;
}

double obs_loglik(double y, std::span<const double> x_row, std::span<const int> observed,
                  const ClusterParams& theta, std::span<const PluginEstimate> plugins) {
    if (!std::isfinite(theta.mu) || !(theta.sigma > 0.0)) throw NumericalError("obs_loglik: invalid parameters");
    double mean = theta.mu;
    double var = theta.sigma * theta.sigma;
    std::size_t next = 0;
    for (std::size_t l = 0; l < theta.beta.size(); ++l) {
        const double b = theta.beta[l];
        if (!std::isfinite(b)) throw NumericalError("obs_loglik: non-finite coefficient");
        if (next < observed.size() && observed[next] == static_cast<int>(l)) {
            mean += b * standardized_covariate(x_row[l], plugins[l]);
            ++next;
        } else {
            var += b * b;
        }
    }
    return normal_logpdf(y, mean, var);
}

void ClusterEvaluator::prepare(std::span<const CellStats> cells, const ClusterParams& theta) {
    constant_ = false;
    const std::size_t p = theta.beta.size();
    center_.resize(p);
    coef_.resize(p);
    beta_sq_l_.resize(p);
    mu_ = theta.mu;
    sigma2_ = theta.sigma * theta.sigma;
    beta_sq_ = 0.0;
    for (std::size_t l = 0; l < p; ++l) {
        const PluginEstimate est = plugin_stats(cells[l], priors_);
        const double b = theta.beta[l];
        center_[l] = est.mean;
        coef_[l] = b / std::sqrt(est.var);
        beta_sq_l_[l] = b * b;
        beta_sq_ += b * b;
    }
}

void ClusterEvaluator::prepare_constant(const ClusterParams& theta) {
    constant_ = true;
    mu_ = theta.mu;
    sigma2_ = theta.sigma * theta.sigma;
}

std::pair<double, double> ClusterEvaluator::moments(std::span<const double> x_row,
                                                    std::span<const int> observed) const {
    if (constant_) return {mu_, sigma2_};
    double mean = mu_;
    double obs_sq = 0.0;
    for (int l : observed) {
        mean += coef_[l] * (x_row[l] - center_[l]);
        obs_sq += beta_sq_l_[l];
    }
    return {mean, sigma2_ + std::max(0.0, beta_sq_ - obs_sq)};
}

double ClusterEvaluator::term(int i) const {
    if (constant_) return normal_logpdf(y_[i], mu_, sigma2_);
    const auto [mean, var] = moments(data_->row(i), data_->observed_indices(i));
    return normal_logpdf(y_[i], mean, var);
}

double ClusterEvaluator::sum(std::span<const int> members, int skip, int extra) const {
    double s = 0.0;
    for (int i : members)
        if (i != skip) s += term(i);
    if (extra >= 0) s += term(extra);
    return s;
}

double cluster_loglik(const Dataset& data, std::span<const double> y, std::span<const int> members,
                      const ClusterParams& theta, const PluginPriors& priors) {
    const std::size_t p = data.num_covariates();
    std::vector<CellStats> cells(p);
    for (int i : members)
        for (int l : data.observed_indices(i)) cells[l].add(data.row(i)[l]);
    ClusterEvaluator ev(data, y, priors);
    ev.prepare(cells, theta);
    return ev.sum(members);
}

double dl_beta_logprior(std::span<const double> beta, std::span<const double> psi, std::span<const double> phi,
                        double tau, double sigma) {
    double lp = 0.0;
    for (std::size_t l = 0; l < beta.size(); ++l) {
        const double var = sigma * sigma * tau * tau * psi[l] * phi[l] * phi[l];
        if (!(var > 0.0)) return kNegInf;
        lp += normal_logpdf(beta[l], 0.0, var);
    }
    return lp;
}

double dl_logprior(std::span<const double> beta, std::span<const double> psi, std::span<const double> phi,
                   double tau, double sigma, double tau0) {
    const std::size_t p = beta.size();
    if (psi.size() != p || phi.size() != p) throw std::invalid_argument("dl_logprior: length mismatch");
    if (p == 0) return 0.0;
    double phi_sum = 0.0;
    for (double f : phi) phi_sum += f;
    if (std::abs(phi_sum - 1.0) > 1e-8) throw std::invalid_argument("dl_logprior: phi is not on the simplex");
    if (!(sigma > 0.0) || !(tau > 0.0)) return kNegInf;
    for (std::size_t l = 0; l < p; ++l)
        if (!(psi[l] > 0.0) || !(phi[l] > 0.0)) return kNegInf;

    const double alpha = 1.0 / static_cast<double>(p);
    double lp = dl_beta_logprior(beta, psi, phi, tau, sigma);
    for (double s : psi) lp += std::log(0.5) - 0.5 * s;
    lp += log_gamma(1.0) - static_cast<double>(p) * log_gamma(alpha);
    for (double f : phi) lp += (alpha - 1.0) * std::log(f);
    const double rate = 1.0 / (2.0 * tau0);
    lp += std::log(rate) - rate * tau;
    return lp;
}

MarginalizationCheck marginalization_check(const ClusterParams& theta, std::span<const double> z_full,
                                           std::span<const int> observed, std::span<const double> y_grid,
                                           int draws, Rng& rng) {
    const std::size_t p = theta.beta.size();
    // nothing to integrate
    if (observed.size() == p) return {};
    std::vector<bool> is_obs(p, false);
    for (int l : observed) is_obs[l] = true;
    // identity plug-ins so that z_full are the standardized values
    std::vector<PluginEstimate> ident(p, PluginEstimate{0.0, 1.0});

    double fixed_mean = theta.mu;
    for (std::size_t l = 0; l < p; ++l)
        if (is_obs[l]) fixed_mean += theta.beta[l] * z_full[l];
    const double s2 = theta.sigma * theta.sigma;

    std::vector<double> sum(y_grid.size(), 0.0), sumsq(y_grid.size(), 0.0);
    for (int d = 0; d < draws; ++d) {
        double mean = fixed_mean;
        for (std::size_t l = 0; l < p; ++l)
            if (!is_obs[l]) mean += theta.beta[l] * rng.normal();
        for (std::size_t g = 0; g < y_grid.size(); ++g) {
            const double dens = std::exp(normal_logpdf(y_grid[g], mean, s2));
            sum[g] += dens;
            sumsq[g] += dens * dens;
        }
    }
    MarginalizationCheck out;
    for (std::size_t g = 0; g < y_grid.size(); ++g) {
        const double n = draws;
        const double mc = sum[g] / n;
        const double var = std::max(0.0, sumsq[g] / n - mc * mc);
        const double se = std::sqrt(var / n);
        const double exact_log = obs_loglik(y_grid[g], z_full, observed, theta, ident);
        const double exact = std::exp(exact_log);
        out.max_abs_log_gap = std::max(out.max_abs_log_gap, std::abs(std::log(mc) - exact_log));
        if (se > 0.0)
            out.max_z = std::max(out.max_z, std::abs(mc - exact) / se);
        else if (std::abs(mc - exact) > 1e-12 * exact)
            out.max_z = std::numeric_limits<double>::infinity();
    }
    return out;
}

}  // namespace vdlr
