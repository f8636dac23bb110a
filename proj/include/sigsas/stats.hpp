#pragma once

// Statistical helpers for the law audits: one-sample Kolmogorov-Smirnov test
// against a centered normal, Pearson correlation, running moments.

#include <cstddef>
#include <vector>

namespace sigsas {

double normal_cdf(double x, double sigma = 1.0);

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
    double statistic = 0.0;  // sup |F_n - F|
    double p_value = 1.0;
    std::size_t n = 0;
};

/// One-sample KS test of `samples` against N(0, sigma^2). Uses the Stephens
/// finite-sample correction for the p-value.
KsResult ks_test_normal(std::vector<double> samples, double sigma);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};
Moments sample_moments(const std::vector<double>& x);

}  // namespace sigsas
