#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "polymer/kernels.hpp"
#include "polymer/lattice.hpp"
#include "polymer/stats.hpp"
#include "support/enumeration.hpp"

using namespace polymer;
using lattice::Environment;
using models::ModelKind;
using models::ModelSpec;

namespace {

const std::vector<ModelSpec> kSpecs = {
    {ModelKind::IG, 2.0, 1.0, 1.0},
    {ModelKind::G, 1.0, 0.5, 1.0},
    {ModelKind::B, 1.0, 0.5, 1.0},
    {ModelKind::IB, 2.0, 0.5, 1.0},
};

// 1x1 environment with hand-set weights R1=2, R2=1, Y1=1, Y2=3.
Environment tiny_env() {
    Environment env;
    env.spec = kSpecs[0];
    env.m = env.n = 1;
    env.log_r1 = {std::log(2.0)};
    env.log_r2 = {0.0};
    env.log_y1 = {0.0};
    env.log_y2 = {std::log(3.0)};
    return env;
}

}  // namespace

TEST_CASE("generation is deterministic in (spec, m, n, seed, lambda, stream)") {
    const auto a = lattice::generate(kSpecs[1], 12, 9, 42, 0.0, false, 3);
    const auto b = lattice::generate(kSpecs[1], 12, 9, 42, 0.0, false, 3);
    CHECK(a.log_r1 == b.log_r1);
    CHECK(a.log_r2 == b.log_r2);
    CHECK(a.log_y1 == b.log_y1);
    CHECK(a.log_y2 == b.log_y2);
    const auto c = lattice::generate(kSpecs[1], 12, 9, 43, 0.0, false, 3);
    CHECK(a.log_y1 != c.log_y1);
    const auto d = lattice::generate(kSpecs[1], 12, 9, 42, 0.0, false, 4);
    CHECK(a.log_y1 != d.log_y1);
}

TEST_CASE("model B bulk weights stay in (0,1)") {
    const auto env = lattice::generate(kSpecs[2], 20, 20, 7);
    for (double v : env.log_y1) CHECK(v < 0.0);
    for (double v : env.log_y2) CHECK(v < 0.0);
}

TEST_CASE("1x1 grid follows the partition recursion") {
    const auto grid = lattice::forward_dp(tiny_env());
    // Z_{1,1} = Y1 * Z_{0,1} + Y2 * Z_{1,0} = 1*1 + 3*2
    CHECK(grid.fwd(1, 1) == doctest::Approx(std::log(7.0)).epsilon(1e-14));
}

TEST_CASE("boundary rows are prefix sums") {
    const auto env = lattice::generate(kSpecs[0], 8, 5, 11);
    const auto grid = lattice::forward_dp(env);
    double acc = 0.0;
    for (long i = 1; i <= env.m; ++i) {
        acc += env.log_r1[i - 1];
        CHECK(grid.fwd(i, 0) == doctest::Approx(acc).epsilon(1e-15));
    }
    acc = 0.0;
    for (long j = 1; j <= env.n; ++j) {
        acc += env.log_r2[j - 1];
        CHECK(grid.fwd(0, j) == doctest::Approx(acc).epsilon(1e-15));
    }
}

TEST_CASE("forward DP matches path enumeration for all m,n <= 6") {
    for (const auto& spec : kSpecs) {
        for (long m = 0; m <= 6; ++m) {
            for (long n = 0; n <= 6; ++n) {
                for (uint64_t seed : {1u, 2u}) {
                    const auto env = lattice::generate(spec, m, n, seed);
                    const auto grid = lattice::forward_dp(env);
                    if (m + n == 0) {
                        CHECK(grid.log_z() == 0.0);
                        continue;
                    }
                    const double oracle_log_z = oracle::enumerate_log_z(env);
                    CHECK(std::fabs(grid.log_z() - oracle_log_z) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("forward DP matches enumeration on elongated shapes, m+n <= 12") {
    const std::vector<std::pair<long, long>> shapes = {
        {12, 0}, {11, 1}, {10, 2}, {9, 3}, {8, 4}, {7, 5}, {1, 11}, {2, 10}};
    for (const auto& [m, n] : shapes) {
        for (const auto& spec : {kSpecs[0], kSpecs[2]}) {
            const auto env = lattice::generate(spec, m, n, 99);
            const auto grid = lattice::forward_dp(env);
            CHECK(std::fabs(grid.log_z() - oracle::enumerate_log_z(env)) <=
                  1e-10);
        }
    }
}

TEST_CASE("rolling DP stays finite on a 4096^2 lattice") {
    const auto env = lattice::generate(kSpecs[0], 4096, 4096, 1);
    const double log_z = lattice::forward_log_z(env);
    CHECK(std::isfinite(log_z));
    // E[log Z] = (m+n) * gamma_E for IG(2,1,1); allow a wide fluctuation band
    const double exact = 8192.0 * 0.57721566490153286;
    CHECK(std::fabs(log_z - exact) < 500.0);
}

TEST_CASE("rolling pass agrees with the full grid bit-for-bit (scalar)") {
    kernels::force_isa(kernels::Isa::Scalar);
    const auto env = lattice::generate(kSpecs[3], 37, 23, 5);
    const auto grid = lattice::forward_dp(env);
    lattice::RollingCapture cap;
    cap.want_edges = true;
    const double log_z = lattice::forward_log_z(env, &cap);
    CHECK(log_z == grid.log_z());
    for (long i = 0; i <= env.m; ++i) CHECK(cap.top_row[i] == grid.fwd(i, env.n));
    for (long j = 0; j <= env.n; ++j) CHECK(cap.right_col[j] == grid.fwd(env.m, j));
    kernels::reset_isa();
}

TEST_CASE("rolling corner capture matches sub-corner values") {
    kernels::force_isa(kernels::Isa::Scalar);
    const auto env = lattice::generate(kSpecs[0], 24, 18, 9);
    lattice::RollingCapture cap;
    cap.corners = {{6, 4}, {12, 9}, {24, 18}};
    const double log_z = lattice::forward_log_z(env, &cap);
    const auto grid = lattice::forward_dp(env);
    CHECK(cap.corner_log_z[0] == grid.fwd(6, 4));
    CHECK(cap.corner_log_z[1] == grid.fwd(12, 9));
    CHECK(cap.corner_log_z[2] == log_z);
    kernels::reset_isa();
}

TEST_CASE("degenerate extents") {
    const auto env = lattice::generate(kSpecs[1], 5, 0, 3);
    const auto grid = lattice::forward_dp(env);
    double acc = 0.0;
    for (double v : env.log_r1) acc += v;
    CHECK(grid.log_z() == doctest::Approx(acc).epsilon(1e-15));
    CHECK(lattice::forward_log_z(env) == doctest::Approx(acc).epsilon(1e-15));
    const auto ed = lattice::exit_distribution(env, grid);
    CHECK(ed.q1[5] == 1.0);
    CHECK(ed.mean_t1() == 5.0);
}

TEST_CASE("reverse DP basics and the exit decomposition") {
    const auto env = lattice::generate(kSpecs[2], 4, 4, 17);
    auto grid = lattice::forward_dp(env);
    lattice::reverse_dp(env, grid);
    CHECK(grid.rev(4, 4) == 0.0);
    CHECK(grid.rev(3, 4) == doctest::Approx(env.ly1(4, 4)).epsilon(1e-15));
    CHECK(grid.rev(4, 3) == doctest::Approx(env.ly2(4, 4)).epsilon(1e-15));

    // Z_{m,n} = sum_i Z_{i,0} Y2_{i,1} Z_{(i,1),(m,n)}
    //         + sum_j Z_{0,j} Y1_{1,j} Z_{(1,j),(m,n)}
    double total = -std::numeric_limits<double>::infinity();
    for (long i = 1; i <= 4; ++i)
        total = kernels::lse(total,
                             grid.fwd(i, 0) + env.ly2(i, 1) + grid.rev(i, 1));
    for (long j = 1; j <= 4; ++j)
        total = kernels::lse(total,
                             grid.fwd(0, j) + env.ly1(1, j) + grid.rev(1, j));
    CHECK(std::fabs(total - grid.log_z()) <= 1e-10);
}

TEST_CASE("exit distribution: normalization and enumeration oracle") {
    const auto env = lattice::generate(kSpecs[0], 3, 3, 23);
    auto grid = lattice::forward_dp(env);
    lattice::reverse_dp(env, grid);
    const auto ed = lattice::exit_distribution(env, grid);
    CHECK(ed.q1[0] == 0.0);
    CHECK(ed.q2[0] == 0.0);
    double total = 0.0;
    for (double p : ed.q1) total += p;
    for (double p : ed.q2) total += p;
    CHECK(std::fabs(total - 1.0) <= 1e-10);

    const auto paths = oracle::enumerate_paths(env);
    const double oracle_log_z = oracle::log_sum(paths.log_w);
    std::vector<double> q1(4, 0.0), q2(4, 0.0);
    for (size_t k = 0; k < paths.log_w.size(); ++k) {
        const double w = std::exp(paths.log_w[k] - oracle_log_z);
        if (paths.t1[k] > 0) q1[paths.t1[k]] += w;
        if (paths.t2[k] > 0) q2[paths.t2[k]] += w;
    }
    for (long r = 1; r <= 3; ++r) {
        CHECK(std::fabs(ed.q1[r] - q1[r]) <= 1e-10);
        CHECK(std::fabs(ed.q2[r] - q2[r]) <= 1e-10);
    }
}

TEST_CASE("sampled paths satisfy the structural invariants") {
    const auto env = lattice::generate(kSpecs[3], 9, 7, 31);
    const auto grid = lattice::forward_dp(env);
    rng::Philox gen(1, 100);
    for (int k = 0; k < 200; ++k) {
        const auto path = lattice::sample_path(env, grid, gen);
        REQUIRE(path.vertices.size() == size_t(env.m + env.n + 1));
        CHECK(path.vertices.front() == std::pair{0L, 0L});
        CHECK(path.vertices.back() == std::pair{env.m, env.n});
        for (size_t v = 1; v < path.vertices.size(); ++v) {
            const auto [i0, j0] = path.vertices[v - 1];
            const auto [i1, j1] = path.vertices[v];
            CHECK(((i1 == i0 + 1 && j1 == j0) || (i1 == i0 && j1 == j0 + 1)));
        }
        CHECK(std::min(path.t1, path.t2) == 0);
        for (long l = 0; l <= env.n; ++l) CHECK(path.v0[l] <= path.v1[l]);
        for (long c = 0; c <= env.m; ++c) CHECK(path.w0[c] <= path.w1[c]);
        // exit points coincide with the v1/w1 definition at the axes
        CHECK(path.t1 == path.v1[0]);
        CHECK(path.t2 == path.w1[0]);
    }
}

TEST_CASE("sampled exit frequencies match the exact quenched law") {
    const auto env = lattice::generate(kSpecs[1], 4, 4, 77);
    auto grid = lattice::forward_dp(env);
    lattice::reverse_dp(env, grid);
    const auto ed = lattice::exit_distribution(env, grid);
    rng::Philox gen(7, 200);
    const long N = 100000;
    std::vector<double> freq1(5, 0.0), freq2(5, 0.0);
    for (long k = 0; k < N; ++k) {
        const auto path = lattice::sample_path(env, grid, gen);
        if (path.t1 > 0) freq1[path.t1] += 1.0;
        if (path.t2 > 0) freq2[path.t2] += 1.0;
    }
    for (long r = 1; r <= 4; ++r) {
        const double band1 =
            4.0 * std::sqrt(ed.q1[r] * (1.0 - ed.q1[r]) / N) + 1e-9;
        CHECK(std::fabs(freq1[r] / N - ed.q1[r]) <= band1);
        const double band2 =
            4.0 * std::sqrt(ed.q2[r] * (1.0 - ed.q2[r]) / N) + 1e-9;
        CHECK(std::fabs(freq2[r] / N - ed.q2[r]) <= band2);
    }
}

TEST_CASE("ratio fields: boundary row, recursion, and stationarity") {
    const auto env = lattice::generate(kSpecs[0], 10, 8, 3);
    const auto grid = lattice::forward_dp(env);
    const auto rf = lattice::ratio_fields(grid);
    for (long i = 1; i <= env.m; ++i)
        CHECK(rf.r1(i, 0) == doctest::Approx(env.log_r1[i - 1]).epsilon(1e-15));

    // eq-style recursion R1_x = Y1_x + Y2_x R1_{x-a2}/R2_{x-a1}
    for (long j = 1; j <= env.n; ++j) {
        for (long i = 1; i <= env.m; ++i) {
            const double rhs = kernels::lse(
                env.ly1(i, j),
                env.ly2(i, j) + rf.r1(i, j - 1) - rf.r2(i - 1, j));
            CHECK(std::fabs(rf.r1(i, j) - rhs) <=
                  1e-9 * std::fmax(1.0, std::fabs(rhs)));
        }
    }
}

TEST_CASE("ratio entries along a down-right staircase are uncorrelated") {
    // staircase through (i, n-i): alternating R1/R2 entries; collect a few
    // positions across replicas and test pairwise correlation and marginals
    const ModelSpec spec = kSpecs[2];
    const auto params = models::resolve(spec);
    const long m = 12, n = 12, R = 4000;
    std::vector<std::vector<double>> entries(6, std::vector<double>(R));
    for (long r = 0; r < R; ++r) {
        const auto env = lattice::generate(spec, m, n, 1234, 0.0, false, r);
        const auto grid = lattice::forward_dp(env);
        const auto rf = lattice::ratio_fields(grid);
        // down-right path: right steps at rows j = 12..7 (R1), with the
        // connecting down steps (R2)
        entries[0][r] = rf.r1(3, 12);
        entries[1][r] = rf.r2(3, 12);
        entries[2][r] = rf.r1(4, 11);
        entries[3][r] = rf.r2(4, 11);
        entries[4][r] = rf.r1(5, 10);
        entries[5][r] = rf.r2(5, 10);
    }
    const double bound = 4.0 / std::sqrt(static_cast<double>(R));
    for (size_t u = 0; u < entries.size(); ++u) {
        for (size_t v = u + 1; v < entries.size(); ++v) {
            const auto mu = stats::moments(entries[u]);
            const auto mv = stats::moments(entries[v]);
            double cov = 0.0;
            for (long r = 0; r < R; ++r)
                cov += (entries[u][r] - mu.mean) * (entries[v][r] - mv.mean);
            cov /= (R - 1);
            const double corr = cov / std::sqrt(mu.var * mv.var);
            CHECK(std::fabs(corr) <= bound);
        }
    }
    // marginals: R1 entries ~ log boundary1 law, R2 entries ~ log boundary2
    const auto law1 = params.boundary1();
    const auto law2 = params.boundary2();
    CHECK(stats::ks_test(entries[2], [&](double x) {
              return law1.cdf(std::exp(x));
          }).p_value > 0.001);
    CHECK(stats::ks_test(entries[3], [&](double x) {
              return law2.cdf(std::exp(x));
          }).p_value > 0.001);
}

TEST_CASE("log-sum-exp shift covariance") {
    const auto env = lattice::generate(kSpecs[1], 16, 12, 8);
    const double c = 50.0;
    Environment shifted = env;
    for (auto& v : shifted.log_r1) v += c;
    for (auto& v : shifted.log_r2) v += c;
    for (auto& v : shifted.log_y1) v += c;
    for (auto& v : shifted.log_y2) v += c;
    const auto g0 = lattice::forward_dp(env);
    const auto g1 = lattice::forward_dp(shifted);
    for (long j = 0; j <= env.n; ++j)
        for (long i = 0; i <= env.m; ++i)
            CHECK(std::fabs(g1.fwd(i, j) - g0.fwd(i, j) - (i + j) * c) <= 1e-8);
}

TEST_CASE("coupled environments are monotone in lambda") {
    const ModelSpec spec = kSpecs[0];
    const auto lo = lattice::generate(spec, 30, 30, 99, 0.0, true, 1);
    const auto hi = lattice::generate(spec, 30, 30, 99, 0.2, true, 1);
    for (long i = 0; i < 30; ++i)
        CHECK(hi.log_r1[i] >= lo.log_r1[i] - 1e-12);
    // same uniforms, opposite perturbation sign on the vertical boundary
    for (long j = 0; j < 30; ++j)
        CHECK(hi.log_r2[j] <= lo.log_r2[j] + 1e-12);
    CHECK(lo.log_y1 == hi.log_y1);  // bulk untouched by the coupling
    CHECK(lo.log_y2 == hi.log_y2);
}

TEST_CASE("coupled and direct boundary sampling agree in law") {
    const ModelSpec spec = kSpecs[3];
    const long m = 20000;
    const auto coupled = lattice::generate(spec, m, 0, 5150, 0.0, true, 0);
    const auto direct = lattice::generate(spec, m, 0, 5151, 0.0, false, 0);
    CHECK(stats::ks_two_sample(coupled.log_r1, direct.log_r1).p_value > 0.001);
}

TEST_CASE("boundary log-weight means match psi_0") {
    for (const auto& spec : kSpecs) {
        const auto params = models::resolve(spec);
        const long m = 100000;
        const auto env = lattice::generate(spec, m, 0, 31415);
        const auto mom = stats::moments(env.log_r1);
        CHECK(std::fabs(mom.mean - params.psi1(0)) <= 4.0 * mom.se_mean);
        CHECK(std::fabs(mom.var - params.psi1(1)) <= 4.0 * mom.se_var);
    }
}

TEST_CASE("environment dump/load round trip is bit exact") {
    const auto env = lattice::generate(kSpecs[2], 7, 5, 271828, 0.05, false, 2);
    const std::string path = "test_env_roundtrip.tmp";
    lattice::dump_env(env, path);
    const auto back = lattice::load_env(path);
    CHECK(back.spec.kind == env.spec.kind);
    CHECK(back.spec.mu == env.spec.mu);
    CHECK(back.lambda == env.lambda);
    CHECK(back.m == env.m);
    CHECK(back.n == env.n);
    CHECK(back.seed == env.seed);
    CHECK(back.stream == env.stream);
    CHECK(back.log_r1 == env.log_r1);
    CHECK(back.log_r2 == env.log_r2);
    CHECK(back.log_y1 == env.log_y1);
    CHECK(back.log_y2 == env.log_y2);
    std::remove(path.c_str());
}
