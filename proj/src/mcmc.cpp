#include "vdlr/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vdlr/errors.hpp"
#include "vdlr/numerics.hpp"

namespace vdlr {

namespace {
// Floor applied to |beta| inside the shrinkage updates so that GIG and
// inverse-Gaussian parameters stay valid when a coefficient is exactly zero.
constexpr double kBetaFloor = 1e-10;
constexpr double kPhiFloor = 1e-100;
}  // namespace

void McmcConfig::validate() const {
    if (n_iter < 1) throw DataError("mcmc.n_iter must be at least 1");
    if (n_burn < 0 || n_burn >= n_iter) throw DataError("mcmc.n_burn must satisfy 0 <= n_burn < n_iter");
    if (thin < 1) throw DataError("mcmc.thin must be at least 1");
    if (chains < 1) throw DataError("mcmc.chains must be at least 1");
    if (!(p_type1 > 0.0 && p_type1 < 1.0)) throw DataError("mcmc.p_type1 must lie in (0, 1)");
    if (!(slice.width > 0.0)) throw DataError("mcmc.slice_width must be positive");
    if (slice.max_steps < 1) throw DataError("mcmc.slice_max_steps must be at least 1");
    if (ess_max_shrink < 1) throw DataError("mcmc.ess_max_shrink must be at least 1");
    if (init_clusters < 1) throw DataError("mcmc.init_clusters must be at least 1");
}

Baseline initial_baseline(const ModelConfig& model) { return Baseline{model.m0, 0.5 * model.a_sigma0}; }

Sampler::Sampler(const Dataset& data, const ModelConfig& model, const McmcConfig& mcmc, std::uint64_t chain)
    : data_(data),
      model_(model),
      mcmc_(mcmc),
      rng_(mcmc.seed, chain),
      eval_(data, {}, model.plugin),
      use_coefficients_(model.coefficients_active()),
      constant_mean_(model.kind == ModelKind::vdreg),
      p_(data.num_covariates()) {
    model_.validate(p_);
    mcmc_.validate();
    if (!data.has_response()) throw DataError("cannot fit a dataset without a response column");
    prior_ = model_.partition_prior(static_cast<int>(data.size()) + 2);
    y_.assign(data.response().begin(), data.response().end());
    eval_.set_response(y_);

    const std::size_t m = data.size();
    std::vector<int> labels(m, 0);
    if (mcmc_.init == InitKind::random)
        for (auto& c : labels) c = static_cast<int>(rng_.index(static_cast<std::size_t>(mcmc_.init_clusters)));
    state_ = PartitionState(data_, labels);
    params_.assign(state_.num_clusters(), ClusterParams::initial(p_, 0.0, 0.5 * model_.a_sigma, model_.tau0));
    baseline_ = initial_baseline(model_);
    refresh_caches();
}

void Sampler::set_response(std::vector<double> y) {
    if (y.size() != data_.size()) throw std::invalid_argument("set_response: length mismatch");
    y_ = std::move(y);
    eval_.set_response(y_);
    refresh_caches();
}

void Sampler::reset(std::span<const int> labels, std::vector<ClusterParams> params, const Baseline& baseline) {
    state_ = PartitionState(data_, labels);
    if (params.size() != static_cast<std::size_t>(state_.num_clusters()))
        throw std::invalid_argument("reset: parameter count differs from cluster count");
    for (const auto& t : params)
        if (t.beta.size() != p_ || t.psi.size() != p_ || t.phi.size() != p_)
            throw std::invalid_argument("reset: parameter dimension mismatch");
    params_ = std::move(params);
    baseline_ = baseline;
    refresh_caches();
}

// ---------------------------------------------------------------------------
// caches

void Sampler::refresh_cluster(int j) {
    const auto members = state_.members(j);
    if (constant_mean_)
        eval_.prepare_constant(params_[j]);
    else
        eval_.prepare(state_.cells(j), params_[j]);
    for (int i : members) loglik_[i] = eval_.term(i);
}

void Sampler::refresh_caches() {
    const int k = state_.num_clusters();
    loglik_.assign(data_.size(), 0.0);
    logsim_.assign(static_cast<std::size_t>(k) * p_, 0.0);
    for (int j = 0; j < k; ++j) {
        for (std::size_t l = 0; l < p_; ++l) logsim_[j * p_ + l] = prior_.similarity[l].log_marginal(state_.cell(j, l));
        refresh_cluster(j);
    }
}

void Sampler::check_consistency(double tol) const {
    state_.check_invariants();
    if (params_.size() != static_cast<std::size_t>(state_.num_clusters()))
        throw std::logic_error("parameter count differs from cluster count");
    for (int j = 0; j < state_.num_clusters(); ++j) {
        for (std::size_t l = 0; l < p_; ++l) {
            const double fresh = prior_.similarity[l].log_marginal(state_.cell(j, l));
            if (std::abs(fresh - logsim_[j * p_ + l]) > tol) throw std::logic_error("stale similarity cache");
        }
        const double fresh = cluster_loglik(data_, y_, state_.members(j), params_[j], model_.plugin);
        double cached = 0.0;
        for (int i : state_.members(j)) cached += loglik_[i];
        if (std::abs(fresh - cached) > tol * (1.0 + std::abs(fresh))) throw std::logic_error("stale likelihood cache");
    }
}

// ---------------------------------------------------------------------------
// allocation helpers
//
// In the loglik_ vector each observation holds its current log density under
// its cluster's parameters and plug-ins. Likelihood changes are accumulated
// as sums of per-member differences; with all coefficients zero each
// difference is exactly 0, so the constant-mean path sees identical numbers.

double Sampler::delta_add(int h, int i, double* new_term_i) {
    const ClusterParams& theta = params_[h];
    if (constant_mean_) {
        eval_.prepare_constant(theta);
        const double t = eval_.term(i);
        *new_term_i = t;
        return t;
    }
    const auto cells = state_.cells(h);
    scratch_cells_.assign(cells.begin(), cells.end());
    const auto row = data_.row(i);
    for (int l : data_.observed_indices(i)) scratch_cells_[l].add(row[l]);
    eval_.prepare(scratch_cells_, theta);
    const auto members = state_.members(h);
    add_terms_.resize(members.size());
    double s = 0.0;
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
        const double t = eval_.term(members[pos]);
        add_terms_[pos] = t;
        s += t - loglik_[members[pos]];
    }
    const double t = eval_.term(i);
    *new_term_i = t;
    s += t;
    return s;
}

double Sampler::delta_remove(int a, int i) {
    if (constant_mean_) return 0.0 - loglik_[i];
    const auto cells = state_.cells(a);
    scratch_cells_.assign(cells.begin(), cells.end());
    const auto row = data_.row(i);
    for (int l : data_.observed_indices(i)) scratch_cells_[l].remove(row[l]);
    eval_.prepare(scratch_cells_, params_[a]);
    const auto members = state_.members(a);
    rem_terms_.resize(members.size());
    double s = 0.0;
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
        const int m = members[pos];
        if (m == i) continue;
        const double t = eval_.term(m);
        rem_terms_[pos] = t;
        s += t - loglik_[m];
    }
    s -= loglik_[i];
    return s;
}

double Sampler::singleton_loglik(int i, const ClusterParams& theta) {
    if (constant_mean_) {
        eval_.prepare_constant(theta);
        return eval_.term(i);
    }
    scratch_cells_.assign(p_, CellStats{});
    const auto row = data_.row(i);
    for (int l : data_.observed_indices(i)) scratch_cells_[l].add(row[l]);
    eval_.prepare(scratch_cells_, theta);
    return eval_.term(i);
}

double Sampler::log_omega_add(int h, int i) const {
    double w = std::log(static_cast<double>(state_.cluster_size(h)));
    const auto row = data_.row(i);
    for (int l : data_.observed_indices(i))
        w += prior_.similarity[l].log_marginal(state_.cell(h, l).plus(row[l])) - logsim_[h * p_ + l];
    return w;
}

double Sampler::log_omega_self(int a, int i) const {
    double w = std::log(static_cast<double>(state_.cluster_size(a) - 1));
    const auto row = data_.row(i);
    for (int l : data_.observed_indices(i))
        w += logsim_[a * p_ + l] - prior_.similarity[l].log_marginal(state_.cell(a, l).minus(row[l]));
    return w;
}

double Sampler::singleton_similarity(int i) const {
    double s = 0.0;
    const auto row = data_.row(i);
    for (int l : data_.observed_indices(i)) {
        CellStats c;
        c.add(row[l]);
        s += prior_.similarity[l].log_marginal(c);
    }
    return s;
}

void Sampler::commit_move(int i, int target, const MoveTerms& terms, const ClusterParams* new_theta) {
    const int a = state_.label(i);
    if (!constant_mean_) {
        if (terms.add_valid) {
            const auto members = state_.members(target);
            for (std::size_t pos = 0; pos < members.size(); ++pos) loglik_[members[pos]] = add_terms_[pos];
        }
        if (terms.rem_valid) {
            const auto members = state_.members(a);
            for (std::size_t pos = 0; pos < members.size(); ++pos)
                if (members[pos] != i) loglik_[members[pos]] = rem_terms_[pos];
        }
    }
    loglik_[i] = terms.term_i;

    const MoveResult res = state_.apply_move(static_cast<std::size_t>(i), target);
    if (res.created) {
        params_.push_back(*new_theta);
        logsim_.resize(logsim_.size() + p_, 0.0);
    }
    if (res.removed) {
        const int tail = static_cast<int>(params_.size()) - 1;
        if (res.relocated_from >= 0) {
            params_[res.removed_slot] = std::move(params_[tail]);
            std::copy(logsim_.begin() + tail * p_, logsim_.begin() + (tail + 1) * p_,
                      logsim_.begin() + res.removed_slot * p_);
        }
        params_.pop_back();
        logsim_.resize(logsim_.size() - p_);
    }
    const auto obs = data_.observed_indices(i);
    const int now = state_.label(i);
    for (int l : obs) logsim_[now * p_ + l] = prior_.similarity[l].log_marginal(state_.cell(now, l));
    if (!res.removed)
        for (int l : obs) logsim_[a * p_ + l] = prior_.similarity[l].log_marginal(state_.cell(a, l));
}

void Sampler::alloc_metropolis(int i) {
    const int a = state_.label(i);
    const int na = state_.cluster_size(a);
    const int k = state_.num_clusters();
    const bool type1 = rng_.uniform() < mcmc_.p_type1;
    auto& w = scratch_w_;

    if (type1 && na == 1) {
        // singleton joins an existing cluster
        if (k == 1) return;
        w.assign(k, kNegInf);
        for (int h = 0; h < k; ++h)
            if (h != a) w[h] = log_omega_add(h, i);
        const double log_sa = log_sum_exp(w);
        const int h = static_cast<int>(rng_.categorical_log(w));
        MoveTerms terms;
        const double d_add = delta_add(h, i, &terms.term_i);
        terms.add_valid = true;
        const double log_a = log_sa + d_add - std::log(model_.mass) - singleton_similarity(i) - loglik_[i];
        ++acc_.join.proposed;
        if (std::log(rng_.uniform()) < std::min(0.0, log_a)) {
            commit_move(i, h, terms, nullptr);
            ++acc_.join.accepted;
        }
        return;
    }
    if (type1) {
        // member leaves for a fresh singleton with parameters from the prior
        const ClusterParams theta = fixed_new_ ? *fixed_new_ : draw_prior_params();
        w.assign(k, kNegInf);
        for (int h = 0; h < k; ++h) w[h] = h == a ? log_omega_self(a, i) : log_omega_add(h, i);
        const double log_sb = log_sum_exp(w);
        MoveTerms terms;
        terms.term_i = singleton_loglik(i, theta);
        const double d_rem = delta_remove(a, i);
        terms.rem_valid = true;
        const double log_a = std::log(model_.mass) + singleton_similarity(i) + terms.term_i + d_rem - log_sb;
        ++acc_.split.proposed;
        if (std::log(rng_.uniform()) < std::min(0.0, log_a)) {
            commit_move(i, k, terms, &theta);
            ++acc_.split.accepted;
        }
        return;
    }
    // move between occupied clusters
    if (na == 1 || k == 1) return;
    w.assign(k, kNegInf);
    for (int h = 0; h < k; ++h) w[h] = h == a ? log_omega_self(a, i) : log_omega_add(h, i);
    const double w_a = w[a];
    w[a] = kNegInf;
    const double lse_not_a = log_sum_exp(w);
    const int b = static_cast<int>(rng_.categorical_log(w));
    w[a] = w_a;
    w[b] = kNegInf;
    const double lse_not_b = log_sum_exp(w);
    MoveTerms terms;
    const double d_add = delta_add(b, i, &terms.term_i);
    const double d_rem = delta_remove(a, i);
    terms.add_valid = terms.rem_valid = true;
    const double log_a = lse_not_a + d_add + d_rem - lse_not_b;
    ++acc_.transfer.proposed;
    if (std::log(rng_.uniform()) < std::min(0.0, log_a)) {
        commit_move(i, b, terms, nullptr);
        ++acc_.transfer.accepted;
    }
}

void Sampler::alloc_gibbs(int i) {
    const int a = state_.label(i);
    const bool singleton = state_.cluster_size(a) == 1;
    const int k = state_.num_clusters();
    const ClusterParams aux = singleton ? params_[a] : (fixed_new_ ? *fixed_new_ : draw_prior_params());
    auto& w = scratch_w_;
    // slots 0..k-1 are existing clusters, slot k the auxiliary new cluster
    w.assign(k + 1, kNegInf);
    double dummy = 0.0;
    for (int h = 0; h < k; ++h) {
        if (h == a) {
            if (!singleton) w[h] = log_omega_self(a, i) - delta_remove(a, i);
        } else {
            w[h] = log_omega_add(h, i) + delta_add(h, i, &dummy);
        }
    }
    const double single = singleton_loglik(i, aux);
    w[k] = std::log(model_.mass) + singleton_similarity(i) + single;
    const int pick = static_cast<int>(rng_.categorical_log(w));
    ++acc_.transfer.proposed;
    if (pick == a || (singleton && pick == k)) return;
    ++acc_.transfer.accepted;
    MoveTerms terms;
    if (pick == k) {
        terms.term_i = single;
        delta_remove(a, i);
        terms.rem_valid = true;
        commit_move(i, k, terms, &aux);
        return;
    }
    delta_add(pick, i, &terms.term_i);
    terms.add_valid = true;
    if (!singleton) {
        delta_remove(a, i);
        terms.rem_valid = true;
    }
    commit_move(i, pick, terms, nullptr);
}

void Sampler::update_allocations() {
    const auto order = rng_.permutation(data_.size());
    for (std::size_t idx : order) {
        if (mcmc_.allocation == AllocationKind::gibbs)
            alloc_gibbs(static_cast<int>(idx));
        else
            alloc_metropolis(static_cast<int>(idx));
    }
}

// ---------------------------------------------------------------------------
// cluster parameters

ClusterParams Sampler::draw_prior_params() {
    ClusterParams t;
    t.mu = rng_.normal(baseline_.mu0, baseline_.sigma0);
    t.sigma = rng_.uniform(0.0, model_.a_sigma);
    if (!use_coefficients_ || p_ == 0) {
        ClusterParams z = ClusterParams::initial(p_, t.mu, t.sigma, model_.tau0);
        return z;
    }
    t.psi.resize(p_);
    for (auto& s : t.psi) s = rng_.exponential(0.5);
    t.phi = dirichlet_symmetric(rng_, p_, 1.0 / static_cast<double>(p_), kPhiFloor);
    t.tau = rng_.exponential(1.0 / (2.0 * model_.tau0));
    t.beta.resize(p_);
    for (std::size_t l = 0; l < p_; ++l)
        t.beta[l] = rng_.normal(0.0, t.sigma * t.tau * t.phi[l] * std::sqrt(t.psi[l]));
    return t;
}

void Sampler::update_cluster(int j) {
    update_mu(j);
    update_sigma(j);
    if (use_coefficients_ && p_ > 0) {
        update_beta(j);
        update_dl(j);
    }
}

void Sampler::update_mu(int j) {
    ClusterParams& theta = params_[j];
    if (constant_mean_)
        eval_.prepare_constant(theta);
    else
        eval_.prepare(state_.cells(j), theta);
    const double prior_prec = 1.0 / (baseline_.sigma0 * baseline_.sigma0);
    double prec = prior_prec;
    double num = baseline_.mu0 * prior_prec;
    for (int i : state_.members(j)) {
        const auto [mean, var] = eval_.moments(data_.row(i), data_.observed_indices(i));
        const double resid = y_[i] - (mean - theta.mu);
        prec += 1.0 / var;
        num += resid / var;
    }
    theta.mu = num / prec + rng_.normal() / std::sqrt(prec);
    refresh_cluster(j);
}

void Sampler::update_sigma(int j) {
    ClusterParams& theta = params_[j];
    if (constant_mean_)
        eval_.prepare_constant(theta);
    else
        eval_.prepare(state_.cells(j), theta);
    const auto members = state_.members(j);
    // mean and coefficient-induced variance inflation do not depend on sigma
    std::vector<double> means(members.size()), extra(members.size(), 0.0);
    double total_sq = 0.0;
    if (!constant_mean_)
        for (double b : theta.beta) total_sq += b * b;
    for (std::size_t t = 0; t < members.size(); ++t) {
        const int i = members[t];
        means[t] = eval_.moments(data_.row(i), data_.observed_indices(i)).first;
        if (!constant_mean_) {
            double obs_sq = 0.0;
            for (int l : data_.observed_indices(i)) obs_sq += theta.beta[l] * theta.beta[l];
            extra[t] = std::max(0.0, total_sq - obs_sq);
        }
    }
    const bool with_prior = use_coefficients_ && p_ > 0;
    auto target = [&](double sigma) {
        const double sq = sigma * sigma;
        double lp = 0.0;
        for (std::size_t t = 0; t < members.size(); ++t) lp += normal_logpdf(y_[members[t]], means[t], sq + extra[t]);
        if (with_prior) lp += dl_beta_logprior(theta.beta, theta.psi, theta.phi, theta.tau, sigma);
        return lp;
    };
    theta.sigma = slice_sample(rng_, theta.sigma, target, 0.0, model_.a_sigma, mcmc_.slice);
    refresh_cluster(j);
}

void Sampler::update_beta(int j) {
    ClusterParams& theta = params_[j];
    const auto members = state_.members(j);
    std::vector<double> prior_sd(p_);
    for (std::size_t l = 0; l < p_; ++l)
        prior_sd[l] = theta.sigma * theta.tau * theta.phi[l] * std::sqrt(theta.psi[l]);
    double current = 0.0;
    for (int i : members) current += loglik_[i];

    ClusterParams trial = theta;
    const auto cells = state_.cells(j);
    auto loglik = [&](std::span<const double> beta) {
        std::copy(beta.begin(), beta.end(), trial.beta.begin());
        eval_.prepare(cells, trial);
        return eval_.sum(members);
    };
    const EllipticalResult r = elliptical_slice(rng_, theta.beta, prior_sd, loglik, current, mcmc_.ess_max_shrink);
    ++acc_.ess_calls;
    acc_.ess_shrinks += r.shrinks;
    if (!r.moved) ++acc_.ess_stalls;
    refresh_cluster(j);
}

void Sampler::update_dl(int j) {
    ClusterParams& theta = params_[j];
    const double tau0 = model_.tau0;
    const double p = static_cast<double>(p_);
    std::vector<double> b(p_);
    for (std::size_t l = 0; l < p_; ++l) b[l] = std::max(std::abs(theta.beta[l]), kBetaFloor) / theta.sigma;

    if (mcmc_.tau_update == TauUpdate::gig) {
        // phi | beta: normalized GIG(1/p - 1, 1, 2 b / tau0) variates
        if (p_ == 1) {
            theta.phi[0] = 1.0;
        } else {
            double total = 0.0;
            for (std::size_t l = 0; l < p_; ++l) {
                const double t = std::max(gig_sample(rng_, 1.0 / p - 1.0, 1.0, 2.0 * b[l] / tau0), 1e-300);
                theta.phi[l] = t;
                total += t;
            }
            double renorm = 0.0;
            for (auto& f : theta.phi) {
                f = std::max(f / total, kPhiFloor);
                renorm += f;
            }
            for (auto& f : theta.phi) f /= renorm;
        }

        // tau | phi, beta
        double s = 0.0;
        for (std::size_t l = 0; l < p_; ++l) s += b[l] / theta.phi[l];
        theta.tau = gig_sample(rng_, 1.0 - p, 1.0 / tau0, 2.0 * s);
    } else {
        // T_l = tau phi_l are independent Gamma(1/p, 1/(2 tau0)) a priori and
        // stay independent given beta with psi integrated out. A log-scale slice
        // on each T_l is exact, whereas slicing tau alone after the collapsed
        // phi draw would not leave the joint invariant.
        const double inf = std::numeric_limits<double>::infinity();
        double total = 0.0;
        std::vector<double> t(p_);
        for (std::size_t l = 0; l < p_; ++l) {
            auto target = [&](double u) { return (1.0 / p - 1.0) * u - b[l] * std::exp(-u) - std::exp(u) / (2.0 * tau0); };
            t[l] = std::exp(slice_sample(rng_, std::log(theta.tau * theta.phi[l]), target, -inf, inf, mcmc_.slice));
            total += t[l];
        }
        theta.tau = total;
        for (std::size_t l = 0; l < p_; ++l) theta.phi[l] = t[l] / total;
    }

    // psi | phi, tau, beta
    for (std::size_t l = 0; l < p_; ++l)
        theta.psi[l] = 1.0 / invgauss_sample(rng_, theta.phi[l] * theta.tau / b[l], 1.0);
}

void Sampler::update_baseline() {
    const int k = state_.num_clusters();
    const double v2 = model_.v * model_.v;
    const double s2 = baseline_.sigma0 * baseline_.sigma0;
    double sum = 0.0;
    for (const auto& t : params_) sum += t.mu;
    const double prec = 1.0 / v2 + k / s2;
    const double mean = (model_.m0 / v2 + sum / s2) / prec;
    baseline_.mu0 = mean + rng_.normal() / std::sqrt(prec);

    auto target = [&](double sigma0) {
        double lp = 0.0;
        const double sq = sigma0 * sigma0;
        for (const auto& t : params_) lp += normal_logpdf(t.mu, baseline_.mu0, sq);
        return lp;
    };
    baseline_.sigma0 = slice_sample(rng_, baseline_.sigma0, target, 0.0, model_.a_sigma0, mcmc_.slice);
}

void Sampler::scan() {
    state_.recompute_stats();
    refresh_caches();
    update_allocations();
    if (mcmc_.update_params) {
        for (int j = 0; j < state_.num_clusters(); ++j) update_cluster(j);
        update_baseline();
    }
#ifndef NDEBUG
    check_consistency();
#endif
}

std::vector<double> Sampler::simulate_response() {
    std::vector<double> y(data_.size());
    for (int j = 0; j < state_.num_clusters(); ++j) {
        if (constant_mean_)
            eval_.prepare_constant(params_[j]);
        else
            eval_.prepare(state_.cells(j), params_[j]);
        for (int i : state_.members(j)) {
            const auto [mean, var] = eval_.moments(data_.row(i), data_.observed_indices(i));
            y[i] = mean + std::sqrt(var) * rng_.normal();
        }
    }
    return y;
}

double Sampler::log_likelihood() const {
    double s = 0.0;
    for (double t : loglik_) s += t;
    return s;
}

double Sampler::log_posterior() const {
    double lp = log_likelihood();
    for (int j = 0; j < state_.num_clusters(); ++j) {
        lp += log_cohesion(state_.cluster_size(j), model_.mass);
        for (std::size_t l = 0; l < p_; ++l) lp += logsim_[j * p_ + l];
        const ClusterParams& t = params_[j];
        lp += normal_logpdf(t.mu, baseline_.mu0, baseline_.sigma0 * baseline_.sigma0);
        lp += (t.sigma > 0.0 && t.sigma < model_.a_sigma) ? -std::log(model_.a_sigma) : kNegInf;
        if (use_coefficients_ && p_ > 0) lp += dl_logprior(t.beta, t.psi, t.phi, t.tau, t.sigma, model_.tau0);
    }
    lp += normal_logpdf(baseline_.mu0, model_.m0, model_.v * model_.v);
    lp += (baseline_.sigma0 > 0.0 && baseline_.sigma0 < model_.a_sigma0) ? -std::log(model_.a_sigma0) : kNegInf;
    return lp;
}

// ---------------------------------------------------------------------------

PosteriorSamples run_chain(const Dataset& data, const ModelConfig& model, const McmcConfig& mcmc,
                           std::uint64_t chain) {
    const auto start = std::chrono::steady_clock::now();
    Sampler sampler(data, model, mcmc, chain);
    PosteriorSamples out;
    out.chain = static_cast<int>(chain);
    out.m = data.size();
    out.cocluster.assign(out.m * out.m, 0);
    out.draws.reserve(mcmc.num_kept());
    for (int it = 1; it <= mcmc.n_iter; ++it) {
        sampler.scan();
        if (it <= mcmc.n_burn || (it - mcmc.n_burn) % mcmc.thin != 0) continue;
        Draw d;
        d.iteration = it;
        d.labels = sampler.state().labels();
        d.baseline = sampler.baseline();
        d.logpost = sampler.log_posterior();
        if (!std::isfinite(d.logpost)) {
            std::ostringstream msg;
            msg << "non-finite log posterior at iteration " << it << " (chain " << chain
                << ", k = " << sampler.state().num_clusters() << ", mu0 = " << d.baseline.mu0
                << ", sigma0 = " << d.baseline.sigma0 << ")";
            throw NumericalError(msg.str());
        }
        if (mcmc.keep_params) d.clusters = sampler.params();
        const auto& st = sampler.state();
        for (int j = 0; j < st.num_clusters(); ++j) {
            const auto mem = st.members(j);
            for (int a : mem)
                for (int b : mem) ++out.cocluster[static_cast<std::size_t>(a) * out.m + b];
        }
        out.draws.push_back(std::move(d));
    }
    out.acceptance = sampler.acceptance();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<PosteriorSamples> run_chains(const Dataset& data, const ModelConfig& model, const McmcConfig& mcmc,
                                         int threads) {
    const int n = mcmc.chains;
    std::vector<PosteriorSamples> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int c = next++; c < n; c = next++) {
            try {
                results[c] = run_chain(data, model, mcmc, static_cast<std::uint64_t>(c));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    const int t = std::max(1, std::min(threads, n));
    if (t == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < t; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace vdlr
