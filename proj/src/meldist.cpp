#include "polymer/meldist.hpp"

#include <cmath>
#include <limits>

#include "polymer/numerics.hpp"

namespace polymer::meldist {

using specfun::FamilyKind;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Marsaglia & Tsang (2000), log of a Ga(alpha,1) draw for alpha >= 1.
double gamma_log_ge1(double alpha, rng::Philox& gen) {
    const double d = alpha - 1.0 / 3.0;
    const double c = (1.0 / 3.0) / std::sqrt(d);
    for (;;) {
        double x, v;
        do {
            x = gen.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = gen.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return std::log(d * v);
    }
}

// Quantile of Ga(shape,1) via Brent on the regularized incomplete gamma.
double gamma_quantile(double shape, double p) {
    auto f = [&](double y) { return specfun::igamma_p(shape, y) - p; };
    double lo = shape, hi = shape;
    double flo = f(lo), fhi = flo;
    while (flo > 0.0) { lo *= 0.25; flo = f(lo); if (lo < 1e-290) break; }
    while (fhi < 0.0) { hi *= 4.0; fhi = f(hi); if (hi > 1e290) break; }
    return numerics::brent_root(f, lo, hi, flo, fhi, 0.0, 1e-14);
}

// Quantile of Be(a,b) via Brent on the regularized incomplete beta.
double beta_quantile(double a, double b, double p) {
    auto f = [&](double y) { return specfun::ibeta(a, b, y) - p; };
    double lo = 0.0, hi = 1.0;
    double flo = -p, fhi = 1.0 - p;
    return numerics::brent_root(f, lo, hi, flo, fhi, 5e-17, 1e-14, 400);
}

}  // namespace

double gamma_log(double alpha, rng::Philox& gen) {
    if (!(alpha > 0.0))
        throw std::domain_error("gamma_log: shape must be positive");
    if (alpha < 1.0)
        return gamma_log_ge1(alpha + 1.0, gen) +
               std::log(gen.uniform()) / alpha;
    return gamma_log_ge1(alpha, gen);
}

MellinLaw::MellinLaw(specfun::MellinFamily f, double exponent)
    : family(f), a(exponent), median_(-1.0) {
    family.require_in_domain(a);
    log_norm_ = family.log_mellin(a);
    psi0_ = family.psi(0, a);
}

double MellinLaw::log_density(double x) const {
    if (!(x > 0.0))
        throw std::domain_error("density: x must be positive");
    const double lf = family.log_f(x);
    if (lf == -kInf) return -kInf;
    return (a - 1.0) * std::log(x) + lf - log_norm_;
}

double MellinLaw::density(double x) const { return std::exp(log_density(x)); }

double MellinLaw::cdf(double x) const {
    if (!(x > 0.0)) throw std::domain_error("cdf: x must be positive");
    const double b = family.b;
    switch (family.kind) {
        case FamilyKind::ExpDecay:
            return specfun::igamma_p(a, b * x);
        case FamilyKind::ExpDecayInv:
            return specfun::igamma_q(-a, b / x);
        case FamilyKind::BetaKernel:
            return x >= 1.0 ? 1.0 : specfun::ibeta(a, b, x);
        case FamilyKind::BetaKernelInv:
            return x <= 1.0 ? 0.0 : 1.0 - specfun::ibeta(-a, b, 1.0 / x);
        case FamilyKind::ShiftedInvBeta:
            return 1.0 - specfun::ibeta(-a, b + a, 1.0 / (1.0 + x));
    }
    return 0.0;
}

double MellinLaw::quantile(double p) const {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("quantile: p must lie in (0,1)");
    const double b = family.b;
    switch (family.kind) {
        case FamilyKind::ExpDecay:
            if (a == 1.0) return -std::log1p(-p) / b;  // exponential(b)
            return gamma_quantile(a, p) / b;
        case FamilyKind::ExpDecayInv:
            return b / gamma_quantile(-a, 1.0 - p);
        case FamilyKind::BetaKernel:
            if (a == 1.0 && b == 1.0) return p;  // uniform
            if (b == 1.0) return std::pow(p, 1.0 / a);
            return beta_quantile(a, b, p);
        case FamilyKind::BetaKernelInv:
            return 1.0 / beta_quantile(-a, b, 1.0 - p);
        case FamilyKind::ShiftedInvBeta: {
            const double q = beta_quantile(-a, b + a, 1.0 - p);
            return (1.0 - q) / q;  // 1/q - 1, without cancellation for q near 1
        }
    }
    return 0.0;
}

double MellinLaw::sample_log(rng::Philox& gen) const {
    const double b = family.b;
    switch (family.kind) {
        case FamilyKind::ExpDecay:
            return gamma_log(a, gen) - std::log(b);
        case FamilyKind::ExpDecayInv:
            return std::log(b) - gamma_log(-a, gen);
        case FamilyKind::BetaKernel: {
            const double l1 = gamma_log(a, gen);
            const double l2 = gamma_log(b, gen);
            return l1 - numerics::log_add(l1, l2);
        }
        case FamilyKind::BetaKernelInv: {
            const double l1 = gamma_log(-a, gen);
            const double l2 = gamma_log(b, gen);
            return numerics::log_add(l1, l2) - l1;
        }
        case FamilyKind::ShiftedInvBeta: {
            // X = 1/Be(-a, b+a) - 1 = G2/G1 for the usual gamma ratio
            const double l1 = gamma_log(-a, gen);
            const double l2 = gamma_log(b + a, gen);
            return l2 - l1;
        }
    }
    return 0.0;
}

double MellinLaw::sample(rng::Philox& gen) const {
    return std::exp(sample_log(gen));
}

double MellinLaw::median() const {
    if (median_ < 0.0) median_ = quantile(0.5);
    return median_;
}

double MellinLaw::l_kernel_form(double x, bool lower_tail) const {
    if (!family.support().contains(x))
        throw std::domain_error("l_kernel: x outside support of f");
    const double log_rho_x = log_density(x);
    // integrand (psi_0 - log y) rho(y); logs are summed before exponentiating
    auto integrand = [&](double y) {
        const double ly = std::log(y);
        const double lf = family.log_f(y);
        if (lf == -kInf) return 0.0;
        const double lr = (a - 1.0) * ly + lf - log_norm_;
        if (lr < -745.0) return 0.0;
        return (psi0_ - ly) * std::exp(lr);
    };
    const specfun::Interval sup = family.support();
    numerics::QuadResult q;
    double sign;
    if (lower_tail) {
        q = numerics::tanh_sinh(integrand, sup.lo, x, 1e-11, 1e-10);
        sign = 1.0;
    } else {
        if (std::isfinite(sup.hi))
            q = numerics::tanh_sinh(integrand, x, sup.hi, 1e-11, 1e-10);
        else
            q = numerics::exp_sinh(integrand, x, 1e-11, 1e-10);
        sign = -1.0;
    }
    return sign * q.value * std::exp(-std::log(x) - log_rho_x);
}

double MellinLaw::l_kernel(double x) const {
    return l_kernel_form(x, x <= median());
}

}  // namespace polymer::meldist
