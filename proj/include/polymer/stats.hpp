#pragma once

// Statistics used by the Monte Carlo harness: moment summaries with standard
// errors, Kolmogorov-Smirnov and Anderson-Darling tests, OLS slopes with
// bootstrap confidence intervals, and quantiles.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace polymer::stats {

struct Moments {
    long n = 0;
    double mean = 0.0;
    double var = 0.0;       // unbiased
    double se_mean = 0.0;   // sd/sqrt(n)
    double se_var = 0.0;    // via fourth central moment
    double m4 = 0.0;        // fourth central moment
};
Moments moments(std::span<const double> x);

double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> x, double p);

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 l^2).
double kolmogorov_q(double lambda);

struct KsResult {
    double statistic = 0.0;  // sup |F1 - F2|
    double p_value = 1.0;
};
// One-sample KS against a callable CDF.
template <typename Cdf>
KsResult ks_test(std::vector<double> x, Cdf&& cdf);
// Two-sample KS.
KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

// Anderson-Darling normality test with fitted mean/variance (case 3);
// p-value per D'Agostino & Stephens.
struct AdResult {
    double a2_star = 0.0;
    double p_value = 1.0;
};
AdResult ad_normality(std::vector<double> x);

// Lilliefors: KS against a normal with fitted mean/sd, Dallal-Wilkinson
// p approximation. Far less powerful than AD; reported alongside it.
KsResult lilliefors_normality(std::vector<double> x);

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
};
OlsFit ols(std::span<const double> x, std::span<const double> y);

// Percentile bootstrap CI of an OLS slope where each y_k is a statistic of
// a per-group sample; `statistic` maps a resampled group to its y value.
struct SlopeCi {
    double slope = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};
SlopeCi bootstrap_slope(const std::vector<double>& x,
                        const std::vector<std::vector<double>>& groups,
                        double (*statistic)(std::span<const double>),
                        int resamples, uint64_t seed);

double sample_mean(std::span<const double> x);
double sample_var(std::span<const double> x);

// ---------------------------------------------------------------------------

namespace detail {
KsResult ks_from_sorted_onesample(const std::vector<double>& x,
                                  const std::vector<double>& f);
}

template <typename Cdf>
KsResult ks_test(std::vector<double> x, Cdf&& cdf) {
    std::sort(x.begin(), x.end());
    std::vector<double> f(x.size());
    for (size_t i = 0; i < x.size(); ++i) f[i] = cdf(x[i]);
    return detail::ks_from_sorted_onesample(x, f);
}

}  // namespace polymer::stats
