// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Heavier Monte Carlo settings than the unit tests; expect a
// total runtime in the tens of minutes on one core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "polymer/experiments.hpp"
#include "polymer/kernels.hpp"
#include "polymer/lattice.hpp"
#include "polymer/meldist.hpp"
#include "polymer/models.hpp"
#include "polymer/specfun.hpp"
#include "polymer/stats.hpp"
#include "support/enumeration.hpp"

using namespace polymer;
using models::ModelKind;
using models::ModelSpec;

namespace {

int g_failures = 0;

struct Criterion {
    int id;
    std::string label;
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    Criterion(int i, std::string l) : id(i), label(std::move(l)) {}

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }

    void finish() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        std::printf("[%2d] %s  %s (%.1f s)%s%s\n", id,
                    ok ? "PASS" : "FAIL", label.c_str(), secs,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

const std::vector<ModelSpec> kModels = {
    {ModelKind::IG, 2.0, 1.0, 1.0},
    {ModelKind::G, 1.0, 0.5, 1.0},
    {ModelKind::B, 1.0, 0.5, 1.0},
    {ModelKind::IB, 2.0, 0.5, 1.0},
};

std::string tag(const ModelSpec& s) { return models::model_name(s.kind); }

void criterion_oracle_equivalence() {
    Criterion c(1, "oracle equivalence: DP vs path enumeration, m,n <= 6");
    double worst = 0.0;
    for (const auto& spec : kModels) {
        for (long m = 0; m <= 6; ++m) {
            for (long n = 0; n <= 6; ++n) {
                if (m + n == 0) continue;
                for (uint64_t seed = 1; seed <= 100; ++seed) {
                    const auto env = lattice::generate(spec, m, n, seed);
                    const auto grid = lattice::forward_dp(env);
                    const double diff = std::fabs(
                        grid.log_z() - oracle::enumerate_log_z(env));
                    worst = std::fmax(worst, diff);
                }
            }
        }
    }
    c.expect(worst <= 1e-10, "max |DP - enumeration| = " + std::to_string(worst));
    c.finish();
}

void criterion_exact_mean() {
    Criterion c(2, "exact mean of log Z at N=48, 4000 replicas, 4 sigma");
    for (const auto& spec : kModels) {
        experiments::ExperimentConfig cfg;
        cfg.spec = spec;
        cfg.n_grid = {48};
        cfg.replicas = 4000;
        cfg.seed = 480001;
        const auto res = experiments::free_energy_stats(cfg);
        const auto* t = res.test("mean_matches_exact", 48);
        c.expect(t && t->pass,
                 tag(spec) + " z=" + std::to_string(t ? t->statistic : -1.0));
    }
    c.finish();
}

void criterion_variance_identity() {
    Criterion c(3, "variance identity on 24x24, 4000 replicas, 3 sigma");
    for (const auto& spec : kModels) {
        experiments::ExperimentConfig cfg;
        cfg.spec = spec;
        cfg.direction = experiments::DirectionMode::Explicit;
        cfg.m_override = 24;
        cfg.n_override = 24;
        cfg.n_grid = {24};
        cfg.replicas = 4000;
        cfg.seed = 240002;
        const auto res = experiments::variance_identity(cfg);
        for (const char* name : {"var_vs_form1", "var_vs_form2",
                                 "var_vs_averaged", "form1_vs_form2"}) {
            const auto* t = res.test(name, 24);
            c.expect(t && t->pass, tag(spec) + " " + name + " z=" +
                                       std::to_string(t ? t->statistic : -1.0));
        }
    }
    c.finish();
}

void criterion_stationarity() {
    Criterion c(4, "stationarity battery at 1e5 samples + negative control");
    for (const auto& spec : kModels) {
        const auto res = experiments::burke_test(spec, 100000, 555000);
        for (const auto& t : res.tests)
            c.expect(t.pass, tag(spec) + " " + t.name +
                                 " p=" + std::to_string(t.p_value));
    }
    const auto control = experiments::burke_test(kModels[0], 100000, 555001, true);
    const auto* t = control.test("iter32_mismatch_detected");
    c.expect(t && t->pass && t->p_value < 1e-6,
             "negative control p=" + std::to_string(t ? t->p_value : 1.0));
    c.finish();
}

struct ExponentRuns {
    std::vector<experiments::ExperimentResult> per_model;
};

ExponentRuns run_exponent_fits() {
    ExponentRuns runs;
    for (const auto& spec : kModels) {
        experiments::ExperimentConfig cfg;
        cfg.spec = spec;
        cfg.n_grid = {64, 128, 256, 512};
        cfg.replicas = 2000;
        cfg.seed = 640003;
        cfg.tau = 0.5;
        runs.per_model.push_back(experiments::exponent_fit(cfg));
        std::printf("     exponent fit %s: slope_var=%.3f slope_t=%.3f "
                    "(%.0f s)\n",
                    tag(spec).c_str(), runs.per_model.back().value("slope_var"),
                    runs.per_model.back().value("slope_t"),
                    runs.per_model.back().wall_seconds);
        std::fflush(stdout);
    }
    return runs;
}

void criterion_variance_exponent(const ExponentRuns& runs) {
    Criterion c(5, "variance exponent slope in [0.53, 0.80]");
    for (size_t k = 0; k < kModels.size(); ++k) {
        const double slope = runs.per_model[k].value("slope_var");
        c.expect(slope >= 0.53 && slope <= 0.80,
                 tag(kModels[k]) + " slope=" + std::to_string(slope));
    }
    c.finish();
}

void criterion_exit_exponent(const ExponentRuns& runs) {
    Criterion c(6, "exit-point exponent in [0.50, 0.85] and mass near axis");
    for (size_t k = 0; k < kModels.size(); ++k) {
        const double slope = runs.per_model[k].value("slope_t");
        c.expect(slope >= 0.50 && slope <= 0.85,
                 tag(kModels[k]) + " slope=" + std::to_string(slope));
    }
    for (const auto& spec : kModels) {
        experiments::ExperimentConfig cfg;
        cfg.spec = spec;
        cfg.n_grid = {128};
        cfg.replicas = 500;
        cfg.seed = 1280006;
        cfg.b_grid = {1.0, 2.0, 5.0};
        const auto res = experiments::tail_check(cfg);
        const double mass = res.value("mass_within_5n23", 128);
        c.expect(mass >= 0.5, tag(spec) + " mass=" + std::to_string(mass));
    }
    c.finish();
}

void criterion_path_localization(const ExponentRuns& runs) {
    // P(|v1(tau n) - tau m| >= b N^{2/3}) < 0.5/b^2 at N=256, tau=0.5,
    // b in {2,3,4}, 5000 path samples. The true tail bound for these models
    // is C/b^3 with a model-dependent constant; at this scale the horizontal
    // deviation at fixed height carries the aspect ratio m/n
    // (= psi1_2/psi1_1, up to ~12 for IB), so the pinned 0.5/b^2 is expected
    // to fail. Full exceedance values are printed, and the N^{2/3} scaling
    // itself is shown by the deviation quantiles staying flat in N.
    Criterion c(7, "path localization: P(|v1 - tau m| >= b N^{2/3}) < 0.5/b^2");
    const long N = 256;
    const double tau = 0.5;
    const long envs = 1250, paths_per_env = 4;
    const double n23 = std::pow(static_cast<double>(N), 2.0 / 3.0);
    for (const auto& spec : kModels) {
        const auto [m, n] = models::characteristic_direction(spec, N);
        const long tau_row = static_cast<long>(std::floor(tau * n));
        std::vector<long> exceed(3, 0);
        long total = 0;
        for (long r = 0; r < envs; ++r) {
            const auto env =
                lattice::generate(spec, m, n, 2560007, 0.0, false, r);
            const auto grid = lattice::forward_dp(env);
            rng::Philox gen(2560007, r * 4 + 3);
            for (long k = 0; k < paths_per_env; ++k) {
                const auto path = lattice::sample_path(env, grid, gen);
                const double dev =
                    std::fabs(path.v1[tau_row] - tau * m) / n23;
                ++total;
                const double bs[3] = {2.0, 3.0, 4.0};
                for (int bi = 0; bi < 3; ++bi)
                    if (dev >= bs[bi]) ++exceed[bi];
            }
        }
        const double bs[3] = {2.0, 3.0, 4.0};
        for (int bi = 0; bi < 3; ++bi) {
            const double phat = double(exceed[bi]) / total;
            const double bound = 0.5 / (bs[bi] * bs[bi]);
            char info[128];
            std::snprintf(info, sizeof(info), "%s b=%.0f p=%.4f bound=%.4f",
                          tag(spec).c_str(), bs[bi], phat, bound);
            c.expect(phat < bound, info);
        }
    }
    c.finish();

    Criterion aux(7, "  aux: |v1 - tau m|/N^{2/3} quantiles flat in N "
                     "(informational)");
    for (size_t k = 0; k < kModels.size(); ++k) {
        const auto& res = runs.per_model[k];
        const double q_small = res.value("path_dev_tau_q90", 64);
        const double q_large = res.value("path_dev_tau_q90", 512);
        char info[128];
        std::snprintf(info, sizeof(info), "%s q90(N=64)=%.2f q90(N=512)=%.2f",
                      tag(kModels[k]).c_str(), q_small, q_large);
        // scaling holds when the normalized quantile neither blows up nor
        // collapses across a decade of N
        aux.expect(q_large < 3.0 * q_small && q_small < 3.0 * q_large, info);
    }
    aux.finish();
}

void criterion_clt() {
    // alpha=1, c1=0.5, N=256, 2000 replicas. At this scale the N^{2/3}
    // stationary corrections still dominate the shape of the law
    // (skew ~ 0.2-0.5), so this check is expected to fail; the full
    // diagnostics are printed so the failure is interpretable.
    Criterion c(8, "off-characteristic CLT: alpha=1, c1=0.5, N=256");
    for (const auto& spec : kModels) {
        experiments::ExperimentConfig cfg;
        cfg.spec = spec;
        cfg.n_grid = {256};
        cfg.replicas = 2000;
        cfg.seed = 2560008;
        cfg.alpha = 1.0;
        cfg.c1 = 0.5;
        const auto res = experiments::clt_check(cfg);
        const auto* norm = res.test("normality_ad", 256);
        const auto* band = res.test("var_ratio_in_band", 256);
        char info[256];
        std::snprintf(info, sizeof(info),
                      "%s ad_p=%.3g lilliefors_p=%.3g skew=%.3f ratio=%.3f",
                      tag(spec).c_str(), norm ? norm->p_value : -1.0,
                      res.value("lilliefors_p", 256),
                      res.value("clt_skew", 256),
                      band ? band->statistic : -1.0);
        c.expect(norm && norm->pass && band && band->pass, info);
    }
    c.finish();

    // Mechanism verification (informational, not a criterion): when the
    // off-characteristic columns dominate (c1 = 8) the normal limit shows.
    Criterion aux(8, "  aux: CLT mechanism at c1=8, N=64 (informational)");
    experiments::ExperimentConfig cfg;
    cfg.spec = kModels[0];
    cfg.n_grid = {64};
    cfg.replicas = 1500;
    cfg.seed = 640088;
    cfg.alpha = 1.0;
    cfg.c1 = 8.0;
    const auto res = experiments::clt_check(cfg);
    const auto* norm = res.test("normality_ad", 64);
    const auto* band = res.test("var_ratio_in_band", 64);
    aux.expect(norm && norm->pass && band && band->pass,
               "ad_p=" + std::to_string(norm ? norm->p_value : -1.0) +
                   " ratio=" + std::to_string(band ? band->statistic : -1.0));
    aux.finish();
}

void criterion_special_functions() {
    Criterion c(9, "special functions: classical values, recurrence, symmetry");
    using specfun::FamilyKind;
    using specfun::MellinFamily;
    c.expect(std::fabs(specfun::polygamma(0, 1.0) + specfun::euler_gamma) <=
                 1e-12,
             "psi_0(1)");
    c.expect(std::fabs(specfun::polygamma(1, 1.0) - 1.6449340668482264365) <=
                 1e-12,
             "psi_1(1)");
    // recurrence on a grid
    for (int n = 0; n <= 2; ++n) {
        const double nfac = (n == 2) ? 2.0 : 1.0;
        const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
        for (double x = 0.5; x <= 12.0; x += 0.5) {
            const double lhs = specfun::polygamma(n, x + 1.0);
            const double rhs = specfun::polygamma(n, x) +
                               sgn * nfac * std::pow(x, -(n + 1));
            if (std::fabs(lhs - rhs) > 1e-10) {
                c.expect(false, "recurrence n=" + std::to_string(n));
                break;
            }
        }
    }
    // inversion symmetry across the mirrored pairs
    for (const auto& fam : {MellinFamily(FamilyKind::ExpDecay, 1.7),
                            MellinFamily(FamilyKind::BetaKernel, 2.3)}) {
        const auto g = fam.mirror();
        for (int k = 1; k <= 100; ++k) {
            const double a = 0.06 * k;
            bool fine =
                std::fabs(fam.log_mellin(a) - g.log_mellin(-a)) <=
                1e-10 * std::fmax(1.0, std::fabs(fam.log_mellin(a)));
            for (int n = 0; n <= 2 && fine; ++n) {
                const double flip = (n % 2 == 0) ? -1.0 : 1.0;
                fine = std::fabs(fam.psi(n, a) - flip * g.psi(n, -a)) <= 1e-10;
            }
            if (!fine) {
                c.expect(false, "inversion symmetry");
                break;
            }
        }
    }
    // psi ratio monotonicity (grid) and the cross-combination positivity
    for (int n = 1; n <= 2; ++n) {
        double prev = -1e300;
        for (int k = 1; k <= 200; ++k) {
            const double x = 0.1 * k;
            const double ratio =
                specfun::polygamma(n + 1, x) / specfun::polygamma(n, x);
            if (ratio <= prev) {
                c.expect(false, "ratio monotonicity n=" + std::to_string(n));
                break;
            }
            prev = ratio;
        }
    }
    rng::Philox gen(90009, 0);
    auto draw = [&]() {
        return std::exp(std::log(0.1) + gen.uniform() * std::log(100.0));
    };
    for (const auto& base : kModels) {
        for (int k = 0; k < 1000; ++k) {
            ModelSpec s = base;
            s.beta = draw();
            if (s.kind == ModelKind::IG || s.kind == ModelKind::IB) {
                do {
                    s.mu = draw();
                    s.theta = draw();
                } while (!(s.mu > s.theta));
            } else {
                s.mu = draw();
                s.theta = draw();
            }
            const auto p = models::resolve(s);
            const double combo =
                p.psi1(1) * p.psi2(2) + p.psi2(1) * p.psi1(2);
            if (!(combo > 0.0)) {
                c.expect(false, "psi1*psi2 combination sign for " + tag(s));
                break;
            }
        }
    }
    c.finish();
}

void criterion_determinism() {
    Criterion c(10, "byte-identical JSON/CSV across thread counts");
    experiments::ExperimentConfig cfg;
    cfg.spec = kModels[2];
    cfg.n_grid = {32};
    cfg.replicas = 200;
    cfg.seed = 777;
    cfg.threads = 1;
    const auto a = experiments::free_energy_stats(cfg);
    cfg.threads = 3;
    const auto b = experiments::free_energy_stats(cfg);
    c.expect(a.to_json() == b.to_json(), "JSON differs across thread counts");
    c.expect(a.to_csv() == b.to_csv(), "CSV differs across thread counts");

    experiments::ExperimentConfig tcfg;
    tcfg.spec = kModels[3];
    tcfg.n_grid = {16};
    tcfg.replicas = 64;
    tcfg.seed = 778;
    tcfg.threads = 1;
    const auto ta = experiments::tail_check(tcfg);
    tcfg.threads = 4;
    const auto tb = experiments::tail_check(tcfg);
    c.expect(ta.to_json() == tb.to_json(), "tail JSON differs across threads");
    c.finish();
}

}  // namespace

int main() {
    std::printf("acceptance suite: kernel=%s\n",
                kernels::isa_name(kernels::active_isa()));
    criterion_oracle_equivalence();
    criterion_exact_mean();
    criterion_variance_identity();
    criterion_stationarity();
    const auto runs = run_exponent_fits();
    criterion_variance_exponent(runs);
    criterion_exit_exponent(runs);
    criterion_path_localization(runs);
    criterion_clt();
    criterion_special_functions();
    criterion_determinism();
    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
