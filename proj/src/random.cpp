#include "vdlr/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vdlr/numerics.hpp"

namespace vdlr {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() {
    for (;;) {
        const double u = std::generate_canonical<double, 53>(engine_);
        if (u > 0.0) return u;
    }
}

double Rng::log_gamma_variate(double shape) {
    if (shape >= 1.0) {
        std::gamma_distribution<double> g(shape, 1.0);
        return std::log(g(engine_));
    }
    // Gamma(a) = Gamma(a + 1) * U^(1/a), kept in log space
    std::gamma_distribution<double> g(shape + 1.0, 1.0);
    const double lg = std::log(g(engine_));
    return lg + std::log(uniform()) / shape;
}

double Rng::gamma(double shape, double rate) { return std::exp(log_gamma_variate(shape)) / rate; }

std::size_t Rng::index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    // Fisher-Yates with our own index draws keeps the result library-independent.
    for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[index(i)]);
    return out;
}

std::size_t Rng::categorical_log(std::span<const double> log_w) {
    if (log_w.empty()) throw std::invalid_argument("categorical draw over an empty set");
    const double mx = *std::max_element(log_w.begin(), log_w.end());
    double total = 0.0;
    for (double v : log_w) total += std::exp(v - mx);
    double u = uniform() * total;
    for (std::size_t h = 0; h < log_w.size(); ++h) {
        u -= std::exp(log_w[h] - mx);
        if (u <= 0.0) return h;
    }
    // rounding: fall back to the last positive-weight entry
    for (std::size_t h = log_w.size(); h > 0; --h)
        if (log_w[h - 1] > kNegInf) return h - 1;
    return log_w.size() - 1;
}

// ---------------------------------------------------------------------------
// GIG following Hormann and Leydold (2014): the standardized two-parameter
// form with omega = sqrt(a b), sampled by one of three rejection schemes.

namespace {

double gig_mode(double lambda, double omega) {
    if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

double gig_rou_noshift(Rng& rng, double lambda, double omega) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
    for (;;) {
        const double u = um * rng.uniform();
        const double v = rng.uniform();
        const double x = u / v;
        if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
}

double gig_rou_shift(Rng& rng, double lambda, double omega) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

    // Cardano's method for the bounding-rectangle roots.
    const double a = -2.0 * (lambda + 1.0) / omega - xm;
    const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
    const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);
    for (;;) {
        const double u = uminus + rng.uniform() * (uplus - uminus);
        const double v = rng.uniform();
        const double x = u / v + xm;
        if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
}

// 0 <= lambda < 1 and small omega: piecewise constant / power / exponential hat.
double gig_small_omega(Rng& rng, double lambda, double omega) {
    const double x0 = omega / (1.0 - lambda);
    const double xm = gig_mode(lambda, omega);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    double area[3];
    area[0] = k0 * x0;
    double k1, k2;
    if (x0 >= 2.0 / omega) {
        k1 = 0.0;
        area[1] = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                                : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double total = area[0] + area[1] + area[2];
    for (;;) {
        double v = total * rng.uniform();
        double x, hx;
        if (v <= area[0]) {
            x = x0 * v / area[0];
            hx = k0;
        } else if ((v -= area[0]) <= area[1]) {
            if (lambda == 0.0) {
                x = omega * std::exp(std::exp(omega) * v);
                hx = k1 / x;
            } else {
                x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
                hx = k1 * std::pow(x, lambda - 1.0);
            }
        } else {
            v -= area[1];
            const double lo = std::max(x0, 2.0 / omega);
            x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
            hx = k2 * std::exp(-omega / 2.0 * x);
        }
        const double u = rng.uniform() * hx;
        if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
    }
}

}  // namespace

double gig_sample(Rng& rng, double lambda, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(lambda))
        throw std::invalid_argument("gig_sample: requires finite a > 0 and b > 0");
    const double omega = std::sqrt(a * b);
    const double alpha = std::sqrt(b / a);
    const double lam = std::abs(lambda);
    double y;
    if (lam > 1.0 || omega > 1.0)
        y = gig_rou_shift(rng, lam, omega);
    else if (omega >= std::min(0.5, 2.0 / 3.0 * std::sqrt(1.0 - lam)))
        y = gig_rou_noshift(rng, lam, omega);
    else
        y = gig_small_omega(rng, lam, omega);
    return lambda < 0.0 ? alpha / y : alpha * y;
}

double invgauss_sample(Rng& rng, double mean, double shape) {
    if (!(mean > 0.0) || !(shape > 0.0)) throw std::invalid_argument("invgauss_sample: requires mean, shape > 0");
    const double nu = rng.normal();
    const double y = nu * nu;
    const double my = mean * y;
    // cancellation-free form of mu + mu^2 y / (2 l) - mu / (2 l) sqrt(4 mu l y + mu^2 y^2)
    const double x = mean - 2.0 * mean * my / (my + std::sqrt(4.0 * mean * shape * y + my * my));
    if (rng.uniform() <= mean / (mean + x)) return x;
    return mean * mean / x;
}

std::vector<double> dirichlet_symmetric(Rng& rng, std::size_t p, double alpha, double floor) {
    std::vector<double> lg(p);
    for (auto& v : lg) v = rng.log_gamma_variate(alpha);
    const double lse = log_sum_exp(lg);
    double total = 0.0;
    for (auto& v : lg) {
        v = std::max(std::exp(v - lse), floor);
        total += v;
    }
    for (auto& v : lg) v /= total;
    return lg;
}

double slice_sample(Rng& rng, double x0, const std::function<double(double)>& log_target, double lo,
                    double hi, const SliceConfig& cfg, double* log_at_x0) {
    const double f0 = log_at_x0 ? *log_at_x0 : log_target(x0);
    const double level = f0 + std::log(rng.uniform());

    double left = x0 - cfg.width * rng.uniform();
    double right = left + cfg.width;
    int j = static_cast<int>(std::floor(cfg.max_steps * rng.uniform()));
    int k = cfg.max_steps - 1 - j;
    left = std::max(left, lo);
    right = std::min(right, hi);
    while (j > 0 && left > lo && log_target(left) > level) {
        left = std::max(left - cfg.width, lo);
        --j;
    }
    while (k > 0 && right < hi && log_target(right) > level) {
        right = std::min(right + cfg.width, hi);
        --k;
    }
    for (;;) {
        const double x1 = rng.uniform(left, right);
        const double f1 = (x1 > lo && x1 < hi) ? log_target(x1) : kNegInf;
        if (f1 > level) {
            if (log_at_x0) *log_at_x0 = f1;
            return x1;
        }
        if (x1 < x0)
            left = x1;
        else
            right = x1;
        if (right - left <= 0.0) {
            if (log_at_x0) *log_at_x0 = f0;
            return x0;
        }
    }
}

EllipticalResult elliptical_slice(Rng& rng, std::vector<double>& f, std::span<const double> prior_sd,
                                  const std::function<double(std::span<const double>)>& loglik,
                                  double current_loglik, int max_shrink) {
    const std::size_t n = f.size();
    std::vector<double> nu(n), prop(n);
    for (std::size_t l = 0; l < n; ++l) nu[l] = prior_sd[l] * rng.normal();
    const double level = current_loglik + std::log(rng.uniform());
    double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double lo = theta - 2.0 * std::numbers::pi;
    double hi = theta;
    EllipticalResult res;
    res.loglik = current_loglik;
    for (int s = 0; s <= max_shrink; ++s) {
        const double c = std::cos(theta), sn = std::sin(theta);
        for (std::size_t l = 0; l < n; ++l) prop[l] = f[l] * c + nu[l] * sn;
        const double ll = loglik(prop);
        if (ll > level) {
            f = prop;
            res.moved = true;
            res.loglik = ll;
            res.shrinks = s;
            return res;
        }
        if (theta < 0.0)
            lo = theta;
        else
            hi = theta;
        theta = rng.uniform(lo, hi);
    }
    res.shrinks = max_shrink;
    return res;
}

}  // namespace vdlr
