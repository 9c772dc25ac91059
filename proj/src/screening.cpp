#include "vdlr/screening.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>

#include "vdlr/errors.hpp"
#include "vdlr/numerics.hpp"
#include "vdlr/random.hpp"

namespace vdlr {

Dataset complete_cases(const Dataset& ds) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.observed_indices(i).size() == ds.num_covariates()) keep.push_back(i);
    if (keep.empty()) throw DataError("no complete cases: every row has a missing covariate");
    return ds.select_rows(keep);
}

namespace {

// Log densities of every row under each component; false if a covariance is
// not positive definite.
bool component_logpdf(const Eigen::MatrixXd& data, const std::vector<GmmComponent>& comps, Eigen::MatrixXd& out) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    out.resize(n, static_cast<Eigen::Index>(comps.size()));
    for (std::size_t h = 0; h < comps.size(); ++h) {
        Eigen::LLT<Eigen::MatrixXd> llt(comps[h].cov);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::MatrixXd& L = llt.matrixL();
        double logdet = 0.0;
        for (Eigen::Index r = 0; r < d; ++r) logdet += 2.0 * std::log(L(r, r));
        Eigen::MatrixXd centered = (data.rowwise() - comps[h].mean.transpose()).transpose();
        llt.matrixL().solveInPlace(centered);
        const Eigen::VectorXd maha = centered.colwise().squaredNorm().transpose();
        const double c = -0.5 * (d * kLog2Pi + logdet) + std::log(comps[h].weight);
        out.col(static_cast<Eigen::Index>(h)) = (-0.5 * maha.array() + c).matrix();
    }
    return true;
}

double e_step(const Eigen::MatrixXd& logp, Eigen::MatrixXd& resp) {
    const Eigen::Index n = logp.rows();
    resp.resize(n, logp.cols());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = logp.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logp.row(i).array() - mx).exp().matrix();
        const double s = e.sum();
        resp.row(i) = e / s;
        ll += mx + std::log(s);
    }
    return ll;
}

void m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp, double ridge, std::vector<GmmComponent>& comps) {
    const Eigen::Index n = data.rows();
    for (std::size_t h = 0; h < comps.size(); ++h) {
        const Eigen::VectorXd r = resp.col(static_cast<Eigen::Index>(h));
        const double nk = std::max(r.sum(), 1e-10);
        GmmComponent& c = comps[h];
        c.weight = nk / static_cast<double>(n);
        c.mean = (data.transpose() * r) / nk;
        const Eigen::MatrixXd centered = data.rowwise() - c.mean.transpose();
        c.cov = (centered.transpose() * r.asDiagonal() * centered) / nk;
        c.cov.diagonal().array() += ridge;
    }
}

}  // namespace

GmmModel gmm_fit(const Eigen::MatrixXd& data, int k, int max_iter, double tol, std::uint64_t seed) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    Rng rng(seed, static_cast<std::uint64_t>(k));

    // k-means++ style seeding of the means, shared global covariance
    std::vector<GmmComponent> comps(k);
    Eigen::VectorXd global_mean = data.colwise().mean().transpose();
    Eigen::MatrixXd centered = data.rowwise() - global_mean.transpose();
    Eigen::MatrixXd global_cov = centered.transpose() * centered / std::max<double>(1.0, n - 1.0);
    // ridge on the scale of the whole data keeps a component collapsing onto
    // a few points from driving the likelihood up without bound
    const double ridge = 1e-6 * std::max(global_cov.trace() / d, 1e-12);
    global_cov.diagonal().array() += ridge;
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.index(static_cast<std::size_t>(n));
    comps[0].mean = data.row(static_cast<Eigen::Index>(first)).transpose();
    for (int h = 1; h < k; ++h) {
        std::vector<double> lw(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], (data.row(i).transpose() - comps[h - 1].mean).squaredNorm());
            lw[i] = dist[i] > 0 ? std::log(dist[i]) : kNegInf;
        }
        bool any = false;
        for (double v : lw) any = any || v > kNegInf;
        const std::size_t pick = any ? rng.categorical_log(lw) : rng.index(static_cast<std::size_t>(n));
        comps[h].mean = data.row(static_cast<Eigen::Index>(pick)).transpose();
    }
    for (auto& c : comps) {
        c.weight = 1.0 / k;
        c.cov = global_cov;
    }

    GmmModel model;
    model.k = k;
    Eigen::MatrixXd logp, resp;
    double prev = -std::numeric_limits<double>::infinity();
    model.converged = false;
    for (int it = 0; it < max_iter; ++it) {
        if (!component_logpdf(data, comps, logp)) break;
        const double ll = e_step(logp, resp);
        model.loglik_trace.push_back(ll);
        if (std::abs(ll - prev) <= tol * (1.0 + std::abs(ll))) {
            model.converged = true;
            break;
        }
        prev = ll;
        m_step(data, resp, ridge, comps);
    }
    if (!component_logpdf(data, comps, logp)) {
        model.loglik = -std::numeric_limits<double>::infinity();
        model.bic = std::numeric_limits<double>::infinity();
        return model;
    }
    model.loglik = e_step(logp, resp);
    model.components = comps;
    const double npar = (k - 1) + k * d + k * d * (d + 1) / 2.0;
    model.bic = -2.0 * model.loglik + npar * std::log(static_cast<double>(n));
    model.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index h = 1; h < resp.cols(); ++h)
            if (resp(i, h) > resp(i, best)) best = h;  // strict: ties keep the lowest index
        model.labels[i] = static_cast<int>(best);
    }
    return model;
}

GmmModel gmm_fit_bic(const Eigen::MatrixXd& data, const GmmOptions& opts) {
    if (data.rows() <= data.cols() + 1) throw DataError("too few complete observations for mixture fitting");
    GmmModel best;
    best.bic = std::numeric_limits<double>::infinity();
    bool have = false;
    for (int k = opts.k_min; k <= opts.k_max; ++k) {
        if (k > data.rows()) break;
        for (int r = 0; r < opts.restarts; ++r) {
            GmmModel m = gmm_fit(data, k, opts.max_iter, opts.tol,
                                 opts.seed * 1000003ULL + static_cast<std::uint64_t>(r));
            if (!std::isfinite(m.bic)) continue;
            if (!have || m.bic < best.bic) {
                best = std::move(m);
                have = true;
            }
        }
    }
    if (!have) throw NumericalError("mixture fitting failed for every k and restart");
    return best;
}

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    OlsFit fit;
    fit.coefficients = design.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - design * fit.coefficients;
    const double sse = resid.squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    fit.r2 = sst > 0 ? 1.0 - sse / sst : 0.0;
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(n - p);
    const double df1 = static_cast<double>(p);
    const double df2 = static_cast<double>(n - p - 1);
    if (p == 0 || df2 <= 0) {
        fit.p_value = 1.0;
    } else if (sse <= 0.0) {
        fit.p_value = sst > 0 ? 0.0 : 1.0;
    } else {
        const double f = ((sst - sse) / df1) / (sse / df2);
        boost::math::fisher_f_distribution<double> dist(df1, df2);
        fit.p_value = f > 0 ? boost::math::cdf(boost::math::complement(dist, f)) : 1.0;
    }
    return fit;
}

std::optional<double> weighted_indicator(const std::vector<int>& sizes, const std::vector<double>& values,
                                         const std::vector<bool>& eligible) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        if (!eligible[j]) continue;
        num += sizes[j] * values[j];
        den += sizes[j];
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

std::optional<double> ScreeningResult::indicator(LinearityMeasure m) const {
    switch (m) {
        case LinearityMeasure::p_value: return q_p_value;
        case LinearityMeasure::r2: return q_r2;
        case LinearityMeasure::adj_r2: return q_adj_r2;
    }
    return std::nullopt;
}

ScreeningResult linearity_indicator(const Dataset& ds, const GmmOptions& opts) {
    if (!ds.has_response()) throw DataError("screening needs a response column");
    const Dataset cc = complete_cases(ds);
    const Eigen::Index n = static_cast<Eigen::Index>(cc.size());
    const Eigen::Index p = static_cast<Eigen::Index>(cc.num_covariates());
    Eigen::MatrixXd joint(n, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        joint(i, 0) = cc.y(i);
        for (Eigen::Index l = 0; l < p; ++l) joint(i, l + 1) = cc.row(i)[l];
    }
    ScreeningResult res;
    res.m_complete = static_cast<int>(n);
    res.p = static_cast<int>(p);
    // too few complete cases for any mixture: no cluster, indicator indeterminate
    if (n <= p + 2) {
        res.gmm.k = 0;
        res.gmm.bic = std::numeric_limits<double>::infinity();
        return res;
    }
    res.gmm = gmm_fit_bic(joint, opts);

    const int k = res.gmm.k;
    std::vector<std::vector<Eigen::Index>> members(k);
    for (Eigen::Index i = 0; i < n; ++i) members[res.gmm.labels[i]].push_back(i);
    std::vector<int> sizes;
    std::vector<double> pv, r2, ar2;
    std::vector<bool> elig;
    for (int j = 0; j < k; ++j) {
        ClusterFit cf;
        cf.size = static_cast<int>(members[j].size());
        cf.eligible = cf.size > p + 2;
        if (cf.eligible) {
            Eigen::VectorXd y(cf.size);
            Eigen::MatrixXd x(cf.size, p);
            for (int r = 0; r < cf.size; ++r) {
                y(r) = joint(members[j][r], 0);
                x.row(r) = joint.row(members[j][r]).tail(p);
            }
            const OlsFit fit = ols_fit(y, x);
            cf.coefficients = fit.coefficients;
            cf.r2 = fit.r2;
            cf.adj_r2 = fit.adj_r2;
            cf.p_value = fit.p_value;
        }
        sizes.push_back(cf.size);
        pv.push_back(cf.p_value);
        r2.push_back(cf.r2);
        ar2.push_back(cf.adj_r2);
        elig.push_back(cf.eligible);
        res.clusters.push_back(std::move(cf));
    }
    res.q_p_value = weighted_indicator(sizes, pv, elig);
    res.q_r2 = weighted_indicator(sizes, r2, elig);
    res.q_adj_r2 = weighted_indicator(sizes, ar2, elig);
    return res;
}

}  // namespace vdlr
