#include "polymer/models.hpp"

#include <cmath>
#include <stdexcept>

#include "polymer/numerics.hpp"

namespace polymer::models {

using specfun::FamilyKind;
using specfun::MellinFamily;

const char* model_name(ModelKind k) {
    switch (k) {
        case ModelKind::IG: return "ig";
        case ModelKind::G: return "g";
        case ModelKind::B: return "b";
        case ModelKind::IB: return "ib";
    }
    return "?";
}

ModelKind model_from_name(const std::string& s) {
    if (s == "ig" || s == "IG") return ModelKind::IG;
    if (s == "g" || s == "G") return ModelKind::G;
    if (s == "b" || s == "B") return ModelKind::B;
    if (s == "ib" || s == "IB") return ModelKind::IB;
    throw std::invalid_argument("unknown model '" + s +
                                "' (expected ig, g, b, or ib)");
}

void ModelSpec::validate() const {
    if (!(beta > 0.0))
        throw std::invalid_argument("model requires beta > 0");
    if (kind == ModelKind::IG || kind == ModelKind::IB) {
        if (!(mu > theta) || !(theta > 0.0))
            throw std::invalid_argument(
                std::string(model_name(kind)) + " requires mu > theta > 0");
    } else {
        if (!(mu > 0.0) || !(theta > 0.0))
            throw std::invalid_argument(
                std::string(model_name(kind)) + " requires mu, theta > 0");
    }
}

ModelParams resolve(const ModelSpec& spec, double lambda) {
    spec.validate();
    const double mu = spec.mu, theta = spec.theta, beta = spec.beta;
    ModelParams p = [&]() -> ModelParams {
        switch (spec.kind) {
            case ModelKind::IG:
                return {MellinFamily(FamilyKind::ExpDecayInv, beta),
                        MellinFamily(FamilyKind::ExpDecayInv, beta),
                        theta - mu, -theta, -mu};
            case ModelKind::G:
                return {MellinFamily(FamilyKind::ExpDecay, beta),
                        MellinFamily(FamilyKind::BetaKernelInv, mu),
                        mu + theta, -theta, mu};
            case ModelKind::B:
                return {MellinFamily(FamilyKind::BetaKernel, beta),
                        MellinFamily(FamilyKind::BetaKernelInv, mu),
                        mu + theta, -theta, mu};
            case ModelKind::IB:
                return {MellinFamily(FamilyKind::BetaKernelInv, beta),
                        MellinFamily(FamilyKind::ShiftedInvBeta, beta + mu),
                        theta - mu, -theta, -mu};
        }
        throw std::logic_error("unreachable");
    }();
    p.a1 += lambda;
    p.a2 -= lambda;
    if (!p.f1.domain().contains(p.a1) || !p.f2.domain().contains(p.a2))
        throw std::invalid_argument(
            "perturbation lambda pushes a boundary parameter out of D(M_f)");
    return p;
}

std::pair<double, double> bulk_pair(const ModelSpec& spec, double x) {
    if (!(x > 0.0)) throw std::domain_error("bulk_pair: x must be positive");
    switch (spec.kind) {
        case ModelKind::IG:
            return {x, x};
        case ModelKind::G:
            return {x, 1.0};
        case ModelKind::B:
            if (!(x < 1.0))
                throw std::domain_error("bulk_pair: model B requires x in (0,1)");
            return {x, 1.0 - x};
        case ModelKind::IB:
            if (!(x > 1.0))
                throw std::domain_error("bulk_pair: model IB requires x > 1");
            return {x, x - 1.0};
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> sample_bulk_log(const ModelSpec& spec,
                                          rng::Philox& gen) {
    switch (spec.kind) {
        case ModelKind::IG: {
            // X ~ Ga^{-1}(mu, beta)
            const double lx =
                std::log(spec.beta) - meldist::gamma_log(spec.mu, gen);
            return {lx, lx};
        }
        case ModelKind::G: {
            const double lx =
                meldist::gamma_log(spec.mu, gen) - std::log(spec.beta);
            return {lx, 0.0};
        }
        case ModelKind::B: {
            // X = G1/(G1+G2), 1-X = G2/(G1+G2)
            const double l1 = meldist::gamma_log(spec.mu, gen);
            const double l2 = meldist::gamma_log(spec.beta, gen);
            const double ls = numerics::log_add(l1, l2);
            return {l1 - ls, l2 - ls};
        }
        case ModelKind::IB: {
            // X = (G1+G2)/G1, X-1 = G2/G1
            const double l1 = meldist::gamma_log(spec.mu, gen);
            const double l2 = meldist::gamma_log(spec.beta, gen);
            return {numerics::log_add(l1, l2) - l1, l2 - l1};
        }
    }
    throw std::logic_error("unreachable");
}

std::pair<long, long> characteristic_direction(const ModelSpec& spec, long N) {
    if (N < 0) throw std::invalid_argument("characteristic_direction: N < 0");
    if (N == 0) return {0, 0};
    const ModelParams p = resolve(spec);
    const double var_log_r1 = p.psi1(1);
    const double var_log_r2 = p.psi2(1);
    return {static_cast<long>(std::floor(N * var_log_r2)),
            static_cast<long>(std::floor(N * var_log_r1))};
}

}  // namespace polymer::models
