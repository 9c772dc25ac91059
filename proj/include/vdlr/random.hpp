#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace vdlr {

// Per-chain random source. All draws go through these methods so that the
// consumption pattern is part of the determinism contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}
    // Independent stream for (seed, stream) pairs such as (master, chain).
    Rng(std::uint64_t seed, std::uint64_t stream);

    // Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    double gamma(double shape, double rate);
    // log of a Gamma(shape, 1) draw, accurate for small shapes.
    double log_gamma_variate(double shape);
    std::size_t index(std::size_t n);
    std::vector<std::size_t> permutation(std::size_t n);
    // Categorical draw from unnormalized log weights.
    std::size_t categorical_log(std::span<const double> log_w);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Generalized inverse Gaussian with density proportional to
// x^(lambda-1) exp(-(a x + b / x) / 2); a, b > 0.
double gig_sample(Rng& rng, double lambda, double a, double b);

// Inverse Gaussian (Wald) with the given mean and shape.
double invgauss_sample(Rng& rng, double mean, double shape);

// Dirichlet with all concentrations equal to `alpha`; entries are floored at
// `floor` and renormalized.
std::vector<double> dirichlet_symmetric(Rng& rng, std::size_t p, double alpha, double floor = 1e-100);

struct SliceConfig {
    double width = 1.0;
    int max_steps = 20;
};

// Univariate slice sampler with stepping out and shrinkage, restricted to
// (lo, hi). `log_target` may return -inf outside the support.
double slice_sample(Rng& rng, double x0, const std::function<double(double)>& log_target,
                    double lo, double hi, const SliceConfig& cfg, double* log_at_x0 = nullptr);

struct EllipticalResult {
    bool moved = false;
    int shrinks = 0;
    double loglik = 0.0;
};

// Elliptical slice update of `f` (in place) for a zero-mean Gaussian prior
// with independent coordinates of standard deviation `prior_sd`. If the
// bracket is not resolved within `max_shrink` shrinks the state is left
// unchanged.
EllipticalResult elliptical_slice(Rng& rng, std::vector<double>& f, std::span<const double> prior_sd,
                                  const std::function<double(std::span<const double>)>& loglik,
                                  double current_loglik, int max_shrink = 200);

}  // namespace vdlr
