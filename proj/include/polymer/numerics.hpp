#pragma once

// Quadrature and root-finding helpers shared by the distribution layer and
// the test oracles. Double-exponential rules (tanh-sinh on finite intervals,
// exp-sinh on half-lines) tolerate the endpoint singularities that show up
// in Mellin densities.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace polymer::numerics {

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

struct QuadResult {
    double value = 0.0;
    double error = std::numeric_limits<double>::infinity();
    int evals = 0;
    int levels = 0;
};

namespace detail {
constexpr double kHalfPi = 1.5707963267948966192313216916398;
constexpr double kUMax = 6.5;
constexpr int kMaxLevels = 11;
}  // namespace detail

// Integrate g over (a,b). Nodes never touch the endpoints, so integrable
// endpoint singularities are fine. Stops when successive level estimates
// agree to the requested tolerance.
template <typename F>
QuadResult tanh_sinh(F&& g, double a, double b, double abs_tol = 1e-12,
                     double rel_tol = 1e-12) {
    using detail::kHalfPi;
    QuadResult res;
    const double r = 0.5 * (b - a);
    if (!(r > 0.0)) return res;

    // contribution of the node at transformed abscissa u (and -u via mirror)
    auto node_pair = [&](double u, double& acc) {
        const double z = kHalfPi * std::sinh(u);
        const double ez = std::exp(-2.0 * z);
        const double s = 2.0 * ez / (1.0 + ez);        // 1 - tanh(z)
        const double sech = 2.0 * std::exp(-z) / (1.0 + ez);
        const double w = kHalfPi * std::cosh(u) * sech * sech;
        const double yl = a + r * s;
        const double yr = b - r * s;
        if (yl > a) { acc += w * g(yl); ++res.evals; }
        if (yr < b && u > 0.0) { acc += w * g(yr); ++res.evals; }
    };

    double h = 1.0;
    double sum = 0.0;
    node_pair(0.0, sum);
    for (double u = h; u <= detail::kUMax; u += h) node_pair(u, sum);
    double prev = sum * h * r;

    for (int level = 1; level <= detail::kMaxLevels; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double u = h; u <= detail::kUMax; u += 2.0 * h) node_pair(u, add);
        sum += add;
        const double cur = sum * h * r;
        res.levels = level;
        res.error = std::fabs(cur - prev);
        prev = cur;
        if (level >= 3 &&
            res.error <= std::fmax(abs_tol, rel_tol * std::fabs(cur)))
            break;
    }
    res.value = prev;
    return res;
}

// Integrate g over (a, inf) for integrands with (at least algebraic) decay.
template <typename F>
QuadResult exp_sinh(F&& g, double a, double abs_tol = 1e-12,
                    double rel_tol = 1e-12) {
    using detail::kHalfPi;
    QuadResult res;

    auto node_pair = [&](double u, double& acc) {
        // y = a + exp(z), weight = exp(z) * (pi/2) cosh(u)
        for (const double sign : {1.0, -1.0}) {
            if (u == 0.0 && sign < 0.0) continue;
            const double z = kHalfPi * std::sinh(sign * u);
            const double ez = std::exp(z);
            if (!(ez > 0.0) || !std::isfinite(ez)) continue;
            const double y = a + ez;
            if (!(y > a) || !std::isfinite(y)) continue;
            const double w = kHalfPi * std::cosh(u) * ez;
            const double gv = g(y);
            ++res.evals;
            if (gv != 0.0 && std::isfinite(gv)) acc += w * gv;
        }
    };

    double h = 1.0;
    double sum = 0.0;
    node_pair(0.0, sum);
    for (double u = h; u <= detail::kUMax; u += h) node_pair(u, sum);
    double prev = sum * h;

    for (int level = 1; level <= detail::kMaxLevels; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double u = h; u <= detail::kUMax; u += 2.0 * h) node_pair(u, add);
        sum += add;
        const double cur = sum * h;
        res.levels = level;
        res.error = std::fabs(cur - prev);
        prev = cur;
        if (level >= 3 &&
            res.error <= std::fmax(abs_tol, rel_tol * std::fabs(cur)))
            break;
    }
    res.value = prev;
    return res;
}

// Brent's method on a sign-changing bracket, with an early exit once |f|
// drops below f_tol (used for quantiles, where the tolerance lives in
// probability space).
template <typename F>
double brent_root(F&& f, double lo, double hi, double flo, double fhi,
                  double x_tol = 0.0, double f_tol = 1e-13,
                  int max_iter = 200) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("brent_root: endpoints do not bracket");

    double a = lo, b = hi, fa = flo, fb = fhi;
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = e = b - a; }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 =
            2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) +
            0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= f_tol)
            return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::fmin(3.0 * xm * q - std::fabs(tol1 * q),
                                    std::fabs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

}  // namespace polymer::numerics
