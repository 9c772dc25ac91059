#include "vdlr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vdlr {

double mspe(std::span<const double> y_true, std::span<const double> y_hat) {
    if (y_true.size() != y_hat.size()) throw std::invalid_argument("mspe: length mismatch");
    if (y_true.empty()) throw std::invalid_argument("mspe: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double d = y_true[i] - y_hat[i];
        s += d * d;
    }
    return s / static_cast<double>(y_true.size());
}

double predictive_deviance(const std::vector<std::vector<double>>& loglik) {
    if (loglik.empty()) throw std::invalid_argument("predictive_deviance: no points");
    std::vector<double> means;
    means.reserve(loglik.size());
    for (const auto& draws : loglik) {
        if (draws.empty()) throw std::invalid_argument("predictive_deviance: point without draws");
        double s = 0.0;
        for (double v : draws) s += v;
        means.push_back(s / static_cast<double>(draws.size()));
    }
    return predictive_deviance_from_means(means);
}

double predictive_deviance_from_means(std::span<const double> mean_loglik) {
    if (mean_loglik.empty()) throw std::invalid_argument("predictive_deviance: no points");
    double s = 0.0;
    for (double v : mean_loglik) s += v;
    return -2.0 * s / static_cast<double>(mean_loglik.size());
}

double ks_uniform(std::span<const double> q) {
    if (q.empty()) throw std::invalid_argument("ks_uniform: empty input");
    std::vector<double> s(q.begin(), q.end());
    for (double v : s)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ks_uniform: value outside [0, 1]");
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        d = std::max(d, (i + 1) / n - s[i]);
        d = std::max(d, s[i] - i / n);
    }
    return d;
}

}  // namespace vdlr
