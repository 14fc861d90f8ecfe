#pragma once

// Distribution toolkit for the Mellin-tilted laws m_f(a): density, CDF,
// quantile H^f(a,p), sampling (value and log-value), and the L^f kernel
// that enters the exact variance formulas.

#include "polymer/rng.hpp"
#include "polymer/specfun.hpp"

namespace polymer::meldist {

// Log of a Gamma(shape alpha, rate 1) draw. Marsaglia-Tsang for alpha >= 1;
// the alpha < 1 boost is applied in log space so tiny shapes never underflow.
double gamma_log(double alpha, rng::Philox& gen);

struct MellinLaw {
    specfun::MellinFamily family;
    double a;

    MellinLaw(specfun::MellinFamily f, double exponent);

    double log_norm() const { return log_norm_; }   // log M_f(a)
    double log_mean() const { return psi0_; }       // E[log X] = psi_0^f(a)

    double log_density(double x) const;  // -inf outside support
    double density(double x) const;

    double cdf(double x) const;

    // H^f(a,p) = inf{x : p <= F(a,x)}; |cdf(quantile(p)) - p| <= ~1e-13.
    double quantile(double p) const;

    double sample(rng::Philox& gen) const;
    double sample_log(rng::Philox& gen) const;

    // L^f(a,x) by adaptive quadrature of eq-style integrals over (0,x] /
    // [x,inf); `lower_tail` selects the form, the default switches at the
    // median to keep the smaller tail integral out of the difference.
    double l_kernel(double x) const;
    double l_kernel_form(double x, bool lower_tail) const;

private:
    double log_norm_;
    double psi0_;
    mutable double median_;  // lazily computed; <0 means unset
    double median() const;
};

}  // namespace polymer::meldist
