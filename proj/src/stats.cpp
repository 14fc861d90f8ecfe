#include "polymer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polymer/rng.hpp"

namespace polymer::stats {

Moments moments(std::span<const double> x) {
    Moments m;
    m.n = static_cast<long>(x.size());
    if (m.n == 0) return m;
    double s = 0.0;
    for (double v : x) s += v;
    m.mean = s / m.n;
    if (m.n < 2) {
        m.var = std::nan("");
        m.se_mean = std::nan("");
        m.se_var = std::nan("");
        return m;
    }
    double s2 = 0.0, s4 = 0.0;
    for (double v : x) {
        const double d = v - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    m.var = s2 / (m.n - 1);
    m.m4 = s4 / m.n;
    m.se_mean = std::sqrt(m.var / m.n);
    // Var(s^2) = (mu4 - sigma^4 (n-3)/(n-1)) / n
    const double sigma4 = m.var * m.var;
    const double vv = (m.m4 - sigma4 * (m.n - 3.0) / (m.n - 1.0)) / m.n;
    m.se_var = vv > 0.0 ? std::sqrt(vv) : 0.0;
    return m;
}

double sample_mean(std::span<const double> x) { return moments(x).mean; }
double sample_var(std::span<const double> x) { return moments(x).var; }

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) return std::nan("");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double pos = p * (sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const double frac = pos - lo;
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double quantile(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, p);
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    const double q = 2.0 * sum;
    return std::clamp(q, 0.0, 1.0);
}

namespace detail {

KsResult ks_from_sorted_onesample(const std::vector<double>& x,
                                  const std::vector<double>& f) {
    const size_t n = x.size();
    if (n == 0) throw std::invalid_argument("ks_test: empty sample");
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::fabs(f[i] - lo));
        d = std::max(d, std::fabs(f[i] - hi));
    }
    const double sn = std::sqrt(static_cast<double>(n));
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

}  // namespace detail

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
    if (x.empty() || y.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const size_t n1 = x.size(), n2 = y.size();
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n1 && j < n2) {
        const double v = std::min(x[i], y[j]);
        while (i < n1 && x[i] <= v) ++i;
        while (j < n2 && y[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n1 -
                                  static_cast<double>(j) / n2));
    }
    const double ne = std::sqrt(static_cast<double>(n1) * n2 / (n1 + n2));
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

AdResult ad_normality(std::vector<double> x) {
    const size_t n = x.size();
    if (n < 8) throw std::invalid_argument("ad_normality: need n >= 8");
    const Moments m = moments(x);
    const double sd = std::sqrt(m.var);
    std::sort(x.begin(), x.end());

    const double inv_sqrt2 = 0.70710678118654752440;
    double a2 = -static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        const double zi = (x[i] - m.mean) / sd;
        const double zr = (x[n - 1 - i] - m.mean) / sd;
        const double log_phi = std::log(0.5 * std::erfc(-zi * inv_sqrt2));
        const double log_one_minus = std::log(0.5 * std::erfc(zr * inv_sqrt2));
        a2 -= (2.0 * (i + 1.0) - 1.0) / n * (log_phi + log_one_minus);
    }
    AdResult r;
    r.a2_star = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
    const double a = r.a2_star;
    // D'Agostino & Stephens, Table 4.9 (case: mean and variance estimated)
    if (a < 0.2)
        r.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
    else if (a < 0.34)
        r.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
    else if (a < 0.6)
        r.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
    else
        r.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    return r;
}

KsResult lilliefors_normality(std::vector<double> x) {
    const size_t n = x.size();
    if (n < 8) throw std::invalid_argument("lilliefors: need n >= 8");
    const Moments m = moments(x);
    const double sd = std::sqrt(m.var);
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double f =
            0.5 * std::erfc(-(x[i] - m.mean) / sd * 0.70710678118654752440);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
    }
    KsResult r;
    r.statistic = d;
    const double nn = static_cast<double>(n);
    // Dallal & Wilkinson (1986) approximation
    const double p = std::exp(-7.01256 * d * d * (nn + 2.78019) +
                              2.99587 * d * std::sqrt(nn + 2.78019) -
                              0.122119 + 0.974598 / std::sqrt(nn) +
                              1.67997 / nn);
    r.p_value = std::clamp(p, 0.0, 1.0);
    return r;
}

OlsFit ols(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols: need matching samples, n >= 2");
    const double mx = sample_mean(x);
    const double my = sample_mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    OlsFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

SlopeCi bootstrap_slope(const std::vector<double>& x,
                        const std::vector<std::vector<double>>& groups,
                        double (*statistic)(std::span<const double>),
                        int resamples, uint64_t seed) {
    if (x.size() != groups.size())
        throw std::invalid_argument("bootstrap_slope: size mismatch");
    const size_t k = groups.size();
    std::vector<double> y(k);
    for (size_t g = 0; g < k; ++g) y[g] = statistic(groups[g]);
    SlopeCi ci;
    ci.slope = ols(x, y).slope;

    rng::Philox gen(seed, 0xB00757'F17ull);
    std::vector<double> slopes(resamples);
    std::vector<double> resampled;
    std::vector<double> yb(k);
    for (int b = 0; b < resamples; ++b) {
        for (size_t g = 0; g < k; ++g) {
            const auto& src = groups[g];
            resampled.resize(src.size());
            for (size_t i = 0; i < src.size(); ++i)
                resampled[i] = src[gen.next_u64() % src.size()];
            yb[g] = statistic(resampled);
        }
        slopes[b] = ols(x, yb).slope;
    }
    std::sort(slopes.begin(), slopes.end());
    ci.lo = quantile_sorted(slopes, 0.025);
    ci.hi = quantile_sorted(slopes, 0.975);
    return ci;
}

}  // namespace polymer::stats
