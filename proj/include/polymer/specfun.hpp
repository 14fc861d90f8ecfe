#pragma once

// Exact special-function layer: polygamma, log-beta, regularized incomplete
// gamma/beta, and the Mellin data (M_f, psi_n^f) for the five kernel
// families used by the four basic beta-gamma polymer models.

#include <cmath>
#include <stdexcept>
#include <string>

namespace polymer::specfun {

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

// Psi_n(x) = d^{n+1}/dx^{n+1} log Gamma(x), n in 0..4, x > 0.
// Upward recurrence to shift x above the asymptotic threshold, then the
// Bernoulli-number series. Absolute error ~1e-13 for n <= 2 on x >= 0.05.
double polygamma(int n, double x);

inline double log_beta(double a, double b);

// Regularized incomplete gamma P(a,x) = gamma(a,x)/Gamma(a) and its
// complement Q(a,x); series / continued-fraction split at x = a+1.
double igamma_p(double a, double x);
double igamma_q(double a, double x);

// Regularized incomplete beta I_x(a,b), continued fraction (Lentz).
double ibeta(double a, double b, double x);

// ---------------------------------------------------------------------------
// Mellin kernel families
// ---------------------------------------------------------------------------

enum class FamilyKind {
    ExpDecay,        // f(x) = exp(-b x)              on (0,inf)
    ExpDecayInv,     // f(x) = exp(-b/x)              on (0,inf)
    BetaKernel,      // f(x) = (1-x)^{b-1}            on (0,1)
    BetaKernelInv,   // f(x) = (1-1/x)^{b-1}          on (1,inf)
    ShiftedInvBeta,  // f(x) = (x/(x+1))^b            on (0,inf)
};

const char* family_name(FamilyKind k);

struct Interval {
    double lo;
    double hi;
    bool contains(double a) const { return a > lo && a < hi; }
};

struct MellinFamily {
    FamilyKind kind;
    double b;  // positive shape parameter

    MellinFamily(FamilyKind k, double shape);

    Interval domain() const;   // D(M_f)
    Interval support() const;  // supp(f)

    double log_f(double x) const;  // log f(x); -inf outside support
    double f(double x) const;

    // log M_f(a); throws std::domain_error for a outside D(M_f).
    double log_mellin(double a) const;
    double mellin(double a) const;

    // psi_n^f(a) = d^{n+1}/da^{n+1} log M_f(a), n in 0..2.
    double psi(int n, double a) const;

    // Family g with g(x) = f(1/x), where representable in the enum.
    bool has_mirror() const;
    MellinFamily mirror() const;

    void require_in_domain(double a) const;
};

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace polymer::specfun
