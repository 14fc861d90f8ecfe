#pragma once

// The four basic beta-gamma polymer models: parameter maps into the Mellin
// framework, bulk weight construction, the down-right one-step map, and the
// characteristic direction.

#include <string>
#include <utility>

#include "polymer/meldist.hpp"
#include "polymer/rng.hpp"
#include "polymer/specfun.hpp"

namespace polymer::models {

enum class ModelKind { IG, G, B, IB };

const char* model_name(ModelKind k);
ModelKind model_from_name(const std::string& s);

struct ModelSpec {
    ModelKind kind;
    double mu;
    double theta;
    double beta;

    // IG and IB require mu > theta > 0; G and B require mu, theta, beta > 0.
    void validate() const;
};

struct ModelParams {
    specfun::MellinFamily f1;
    specfun::MellinFamily f2;
    double a1;
    double a2;
    double a3;

    meldist::MellinLaw boundary1() const { return {f1, a1}; }
    meldist::MellinLaw boundary2() const { return {f2, a2}; }
    meldist::MellinLaw bulk() const { return {f1, a3}; }

    double psi1(int n) const { return f1.psi(n, a1); }  // psi_n^{f1}(a1)
    double psi2(int n) const { return f2.psi(n, a2); }  // psi_n^{f2}(a2)
};

// Mellin data for the model, with the boundary parameters perturbed to
// (a1 + lambda, a2 - lambda); a3 is untouched, so the perturbed model keeps
// the down-right property.
ModelParams resolve(const ModelSpec& spec, double lambda = 0.0);

// (Y1, Y2) from a bulk draw x ~ m_{f1}(a3).
std::pair<double, double> bulk_pair(const ModelSpec& spec, double x);

// Same construction in log space, drawing x internally; used by the
// environment generator so weights never round-trip through exp/log.
std::pair<double, double> sample_bulk_log(const ModelSpec& spec,
                                          rng::Philox& gen);

// One step of the down-right map, matching the ratio recursions that the
// partition recursion induces:
//   R1~ = Y1 + Y2 R1/R2,   R2~ = Y1 R2/R1 + Y2.
inline std::pair<double, double> downright_step(double r1, double r2,
                                                double y1, double y2) {
    const double ratio = r1 / r2;
    return {y1 + y2 * ratio, y1 / ratio + y2};
}

// (m, n) = (floor(N Var[log R2]), floor(N Var[log R1])).
std::pair<long, long> characteristic_direction(const ModelSpec& spec, long N);

}  // namespace polymer::models
