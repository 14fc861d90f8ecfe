#include "polymer/specfun.hpp"

#include <cmath>
#include <limits>

namespace polymer::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// B_{2k}/(2k) for 2k = 2..20, used by the digamma asymptotic series.
constexpr double kBern2kOver2k[10] = {
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
};

// B_{2k} for 2k = 2..20.
constexpr double kBern2k[10] = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
};

constexpr double kAsymptoticThreshold = 16.0;

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// Psi_0(x) for x >= threshold: ln x - 1/(2x) - sum B_{2k}/(2k x^{2k}).
double digamma_asymptotic(double x) {
    const double inv2 = 1.0 / (x * x);
    double sum = 0.0;
    double pw = inv2;
    for (int k = 0; k < 10; ++k) {
        sum += kBern2kOver2k[k] * pw;
        pw *= inv2;
    }
    return std::log(x) - 0.5 / x - sum;
}

// Psi_n(x), n >= 1, for x >= threshold:
// (-1)^{n-1} [ (n-1)!/x^n + n!/(2 x^{n+1})
//              + sum_k B_{2k} (2k+n-1)!/((2k)! x^{2k+n}) ].
double polygamma_asymptotic(int n, double x) {
    const double invx = 1.0 / x;
    double xpow = std::pow(invx, n);
    double sum = factorial(n - 1) * xpow + 0.5 * factorial(n) * xpow * invx;
    double pw = xpow / x;  // x^{-(n+1)}
    for (int k = 0; k < 10; ++k) {
        pw *= invx;  // x^{-(2k+n)} after the increments below
        // ratio (2k+n-1)!/(2k)! accumulated iteratively
        double ratio = 1.0;
        for (int j = 2 * (k + 1) + 1; j <= 2 * (k + 1) + n - 1; ++j) ratio *= j;
        sum += kBern2k[k] * ratio * pw;
        pw *= invx;
    }
    return ((n % 2) ? 1.0 : -1.0) * sum;
}

}  // namespace

double polygamma(int n, double x) {
    if (n < 0 || n > 4)
        throw std::domain_error("polygamma: order must be in 0..4");
    if (!(x > 0.0))
        throw std::domain_error("polygamma: x must be positive");

    // Shift x above the asymptotic threshold:
    // Psi_n(x) = Psi_n(x+1) - (-1)^n n! x^{-(n+1)}.
    double shift = 0.0;
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    const double nfac = factorial(n);
    while (x < kAsymptoticThreshold) {
        shift -= sgn * nfac * std::pow(x, -(n + 1));
        x += 1.0;
    }
    const double tail =
        (n == 0) ? digamma_asymptotic(x) : polygamma_asymptotic(n, x);
    return tail + shift;
}

double igamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("igamma: a must be positive");
    if (x < 0.0) throw std::domain_error("igamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        // series for P(a,x)
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 800; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    return 1.0 - igamma_q(a, x);
}

double igamma_q(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("igamma: a must be positive");
    if (x < 0.0) throw std::domain_error("igamma: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - igamma_p(a, x);
    // Lentz continued fraction for Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 800; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

namespace {

double ibeta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace

double ibeta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("ibeta: parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lnfront =
        a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(lnfront) * ibeta_cf(a, b, x) / a;
    return 1.0 - std::exp(lnfront) * ibeta_cf(b, a, 1.0 - x) / b;
}

// ---------------------------------------------------------------------------
// MellinFamily
// ---------------------------------------------------------------------------

const char* family_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::ExpDecay: return "exp_decay";
        case FamilyKind::ExpDecayInv: return "exp_decay_inv";
        case FamilyKind::BetaKernel: return "beta_kernel";
        case FamilyKind::BetaKernelInv: return "beta_kernel_inv";
        case FamilyKind::ShiftedInvBeta: return "shifted_inv_beta";
    }
    return "?";
}

MellinFamily::MellinFamily(FamilyKind k, double shape) : kind(k), b(shape) {
    if (!(b > 0.0))
        throw std::domain_error("MellinFamily: shape b must be positive");
}

Interval MellinFamily::domain() const {
    switch (kind) {
        case FamilyKind::ExpDecay: return {0.0, kInf};
        case FamilyKind::ExpDecayInv: return {-kInf, 0.0};
        case FamilyKind::BetaKernel: return {0.0, kInf};
        case FamilyKind::BetaKernelInv: return {-kInf, 0.0};
        case FamilyKind::ShiftedInvBeta: return {-b, 0.0};
    }
    return {0.0, 0.0};
}

Interval MellinFamily::support() const {
    switch (kind) {
        case FamilyKind::ExpDecay: return {0.0, kInf};
        case FamilyKind::ExpDecayInv: return {0.0, kInf};
        case FamilyKind::BetaKernel: return {0.0, 1.0};
        case FamilyKind::BetaKernelInv: return {1.0, kInf};
        case FamilyKind::ShiftedInvBeta: return {0.0, kInf};
    }
    return {0.0, 0.0};
}

double MellinFamily::log_f(double x) const {
    if (!support().contains(x)) return -kInf;
    switch (kind) {
        case FamilyKind::ExpDecay: return -b * x;
        case FamilyKind::ExpDecayInv: return -b / x;
        case FamilyKind::BetaKernel: return (b - 1.0) * std::log1p(-x);
        case FamilyKind::BetaKernelInv: return (b - 1.0) * std::log1p(-1.0 / x);
        case FamilyKind::ShiftedInvBeta:
            return b * (std::log(x) - std::log1p(x));
    }
    return -kInf;
}

double MellinFamily::f(double x) const { return std::exp(log_f(x)); }

void MellinFamily::require_in_domain(double a) const {
    if (!domain().contains(a))
        throw std::domain_error(std::string("Mellin parameter a=") +
                                std::to_string(a) + " outside D(M_f) of " +
                                family_name(kind));
}

double MellinFamily::log_mellin(double a) const {
    require_in_domain(a);
    switch (kind) {
        case FamilyKind::ExpDecay:
            return std::lgamma(a) - a * std::log(b);
        case FamilyKind::ExpDecayInv:
            return std::lgamma(-a) + a * std::log(b);
        case FamilyKind::BetaKernel:
            return log_beta(a, b);
        case FamilyKind::BetaKernelInv:
            return log_beta(-a, b);
        case FamilyKind::ShiftedInvBeta:
            return log_beta(-a, b + a);
    }
    return 0.0;
}

double MellinFamily::mellin(double a) const { return std::exp(log_mellin(a)); }

double MellinFamily::psi(int n, double a) const {
    require_in_domain(a);
    if (n < 0 || n > 2)
        throw std::domain_error("psi_f: order must be in 0..2");
    const double flip = (n % 2 == 0) ? -1.0 : 1.0;  // (-1)^{n+1}
    switch (kind) {
        case FamilyKind::ExpDecay:
            return polygamma(n, a) - (n == 0 ? std::log(b) : 0.0);
        case FamilyKind::ExpDecayInv:
            return flip * (polygamma(n, -a) - (n == 0 ? std::log(b) : 0.0));
        case FamilyKind::BetaKernel:
            return polygamma(n, a) - polygamma(n, a + b);
        case FamilyKind::BetaKernelInv:
            return flip * (polygamma(n, -a) - polygamma(n, -a + b));
        case FamilyKind::ShiftedInvBeta:
            return polygamma(n, a + b) + flip * polygamma(n, -a);
    }
    return 0.0;
}

bool MellinFamily::has_mirror() const {
    return kind != FamilyKind::ShiftedInvBeta;
}

MellinFamily MellinFamily::mirror() const {
    switch (kind) {
        case FamilyKind::ExpDecay: return {FamilyKind::ExpDecayInv, b};
        case FamilyKind::ExpDecayInv: return {FamilyKind::ExpDecay, b};
        case FamilyKind::BetaKernel: return {FamilyKind::BetaKernelInv, b};
        case FamilyKind::BetaKernelInv: return {FamilyKind::BetaKernel, b};
        case FamilyKind::ShiftedInvBeta: break;
    }
    throw std::domain_error("mirror: family has no in-enum mirror");
}

}  // namespace polymer::specfun
