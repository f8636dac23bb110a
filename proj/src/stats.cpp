#include "sigsas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sigsas {

double normal_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

KsResult ks_test_normal(std::vector<double> samples, double sigma) {
    if (samples.empty()) throw std::invalid_argument("ks_test_normal: empty sample");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = normal_cdf(samples[i], sigma);
        const double lo = f - static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n - f;
        d = std::max(d, std::max(lo, hi));
    }
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    return KsResult{d, kolmogorov_q(lambda), n};
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson_correlation: mismatched or tiny samples");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

Moments sample_moments(const std::vector<double>& x) {
    Moments m;
    m.n = x.size();
    if (m.n == 0) return m;
    for (double v : x) m.mean += v;
    m.mean /= m.n;
    if (m.n < 2) return m;
    double s = 0.0;
    for (double v : x) s += (v - m.mean) * (v - m.mean);
    m.variance = s / (m.n - 1);
    return m;
}

}  // namespace sigsas
